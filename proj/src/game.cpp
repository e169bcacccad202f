#include "mla/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "mla/numeric.hpp"

namespace mla {

// ---------------------------------------------------------------------------
// VariableSchema

VariableSchema::VariableSchema(std::vector<Variable> vars) : vars_(std::move(vars)) {
    bits_.reserve(vars_.size());
    for (const auto& v : vars_) {
        if (v.domain_size < 1) {
            throw ConfigError("variable '" + v.name + "' has empty domain");
        }
        bits_.push_back(ceil_log2(v.domain_size));
        total_bits_ += bits_.back();
    }
    if (total_bits_ > 63) {
        throw ConfigError("schema exceeds 63 encoding bits");
    }
}

VariableSchema VariableSchema::index_schema(std::uint64_t n, const std::string& name) {
    return VariableSchema({{name, n < 2 ? 2 : n}});
}

std::uint64_t VariableSchema::encode(std::span<const std::uint64_t> assignment) const {
    if (assignment.size() != vars_.size()) {
        throw DimensionMismatchError("assignment arity does not match schema");
    }
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (assignment[i] >= vars_[i].domain_size) {
            throw ConfigError("assignment value out of domain for variable '" + vars_[i].name +
                              "'");
        }
        code = (code << bits_[i]) | assignment[i];
    }
    return code;
}

std::vector<std::uint64_t> VariableSchema::decode(std::uint64_t code) const {
    std::vector<std::uint64_t> out(vars_.size());
    for (std::size_t i = vars_.size(); i-- > 0;) {
        std::uint64_t mask = bits_[i] == 0 ? 0 : ((std::uint64_t{1} << bits_[i]) - 1);
        out[i] = code & mask;
        code >>= bits_[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {
const char* violation_name(ViolationKind k) {
    switch (k) {
    case ViolationKind::DanglingEdge: return "DanglingEdge";
    case ViolationKind::EmptySuccessorSet: return "EmptySuccessorSet";
    case ViolationKind::BadDistribution: return "BadDistribution";
    case ViolationKind::NegativeProbability: return "NegativeProbability";
    case ViolationKind::DuplicateEdge: return "DuplicateEdge";
    case ViolationKind::MissingAssignment: return "MissingAssignment";
    case ViolationKind::BadAssignment: return "BadAssignment";
    case ViolationKind::DuplicateAssignment: return "DuplicateAssignment";
    }
    return "?";
}
} // namespace

std::string ValidationResult::to_string() const {
    std::string out;
    for (const auto& v : violations) {
        out += "state " + std::to_string(v.state) + ": " + violation_name(v.kind);
        if (!v.detail.empty()) out += " (" + v.detail + ")";
        out += "\n";
    }
    return out;
}

ValidationError::ValidationError(ValidationResult r)
    : Error("invalid game graph:\n" + r.to_string()), result(std::move(r)) {}

ValidationResult validate(const GameGraph& g) {
    ValidationResult res;
    const std::size_t n = g.num_states();
    for (StateId s = 0; s < n; ++s) {
        auto succ = g.successors(s);
        if (succ.empty()) {
            res.violations.push_back({s, ViolationKind::EmptySuccessorSet, ""});
            continue;
        }
        bool dangling = false;
        for (StateId t : succ) {
            if (t >= n) {
                res.violations.push_back(
                    {s, ViolationKind::DanglingEdge, "target " + std::to_string(t)});
                dangling = true;
            }
        }
        std::unordered_set<StateId> seen(succ.begin(), succ.end());
        if (seen.size() != succ.size()) {
            res.violations.push_back({s, ViolationKind::DuplicateEdge, ""});
        }
        if (g.kind(s) == StateKind::Probabilistic && !dangling) {
            auto probs = g.probabilities(s);
            CompensatedSum sum;
            bool nonpositive = false;
            for (double p : probs) {
                if (!(p > 0.0)) nonpositive = true;
                sum.add(p);
            }
            if (nonpositive) {
                res.violations.push_back({s, ViolationKind::NegativeProbability, ""});
            } else if (std::abs(sum.value() - 1.0) > kProbSumTolerance) {
                res.violations.push_back({s, ViolationKind::BadDistribution,
                                          "sum " + std::to_string(sum.value())});
            }
        }
    }
    if (g.schema_.has_value()) {
        const std::size_t arity = g.schema_->size();
        std::unordered_set<std::uint64_t> codes;
        for (StateId s = 0; s < n; ++s) {
            auto a = g.assignment(s);
            if (a.size() != arity) {
                res.violations.push_back({s, ViolationKind::MissingAssignment, ""});
                continue;
            }
            bool in_domain = true;
            for (std::size_t i = 0; i < arity; ++i) {
                if (a[i] >= g.schema_->variables()[i].domain_size) {
                    res.violations.push_back(
                        {s, ViolationKind::BadAssignment,
                         "variable '" + g.schema_->variables()[i].name + "'"});
                    in_domain = false;
                }
            }
            if (in_domain && !codes.insert(g.schema_->encode(a)).second) {
                res.violations.push_back({s, ViolationKind::DuplicateAssignment, ""});
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// GameGraph

double GameGraph::max_abs_reward() const {
    double m = 0.0;
    for (double r : rewards_) m = std::max(m, std::abs(r));
    return m;
}

double GameGraph::max_reward() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double r : rewards_) m = std::max(m, r);
    return m;
}

double GameGraph::min_reward() const {
    double m = std::numeric_limits<double>::infinity();
    for (double r : rewards_) m = std::min(m, r);
    return m;
}

bool GameGraph::is_mdp() const {
    return std::none_of(kinds_.begin(), kinds_.end(),
                        [](StateKind k) { return k == StateKind::Player2; });
}

std::span<const std::uint64_t> GameGraph::assignment(StateId s) const {
    if (!schema_.has_value()) return {};
    const std::size_t arity = schema_->size();
    return {assignments_.data() + std::size_t{s} * arity, arity};
}

GameGraph::StateCodes GameGraph::state_codes() const {
    StateCodes out;
    out.codes.resize(num_states());
    if (schema_.has_value()) {
        out.total_bits = schema_->total_bits();
        for (StateId s = 0; s < num_states(); ++s) {
            out.codes[s] = schema_->encode(assignment(s));
        }
    } else {
        out.total_bits = num_states() <= 1 ? 1 : ceil_log2(num_states());
        for (StateId s = 0; s < num_states(); ++s) out.codes[s] = s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Builder

StateId GameGraph::Builder::add_state(StateKind kind, double reward) {
    kinds_.push_back(kind);
    rewards_.push_back(reward);
    return static_cast<StateId>(kinds_.size() - 1);
}

void GameGraph::Builder::add_edge(StateId from, StateId to) { edges_.push_back({from, to, 0.0}); }

void GameGraph::Builder::add_edge(StateId from, StateId to, double prob) {
    edges_.push_back({from, to, prob});
}

void GameGraph::Builder::set_schema(VariableSchema schema) { schema_ = std::move(schema); }

void GameGraph::Builder::set_assignment(StateId s, std::vector<std::uint64_t> values) {
    assignments_.emplace_back(s, std::move(values));
}

void GameGraph::Builder::set_meta(std::string meta_json) { meta_ = std::move(meta_json); }

void GameGraph::Builder::reserve(std::size_t states, std::size_t edges) {
    kinds_.reserve(states);
    rewards_.reserve(states);
    edges_.reserve(edges);
}

GameGraph GameGraph::Builder::assemble() {
    GameGraph g;
    g.kinds_ = std::move(kinds_);
    g.rewards_ = std::move(rewards_);
    g.meta_json = std::move(meta_);
    const std::size_t n = g.kinds_.size();

    // Counting sort of edges by source keeps per-state insertion order.
    g.offsets_.assign(n + 1, 0);
    for (const Edge& e : edges_) {
        if (e.from >= n) throw ConfigError("edge from unknown state " + std::to_string(e.from));
        ++g.offsets_[e.from + 1];
    }
    for (std::size_t s = 0; s < n; ++s) g.offsets_[s + 1] += g.offsets_[s];
    g.targets_.resize(edges_.size());
    g.probs_.resize(edges_.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : edges_) {
        std::size_t i = cursor[e.from]++;
        g.targets_[i] = e.to;
        g.probs_[i] = e.prob;
    }

    if (schema_.has_value()) {
        g.schema_ = std::move(schema_);
        const std::size_t arity = g.schema_->size();
        g.assignments_.assign(n * arity, std::uint64_t{0});
        std::vector<bool> have(n, false);
        for (auto& [s, vals] : assignments_) {
            if (s >= n) throw ConfigError("assignment for unknown state");
            if (vals.size() != arity) {
                throw ConfigError("assignment arity mismatch for state " + std::to_string(s));
            }
            std::copy(vals.begin(), vals.end(), g.assignments_.begin() + std::size_t{s} * arity);
            have[s] = true;
        }
        for (std::size_t s = 0; s < n; ++s) {
            if (!have[s]) {
                ValidationResult r;
                r.violations.push_back(
                    {static_cast<StateId>(s), ViolationKind::MissingAssignment, ""});
                throw ValidationError(std::move(r));
            }
        }
    }
    return g;
}

GameGraph GameGraph::Builder::build_unchecked() { return assemble(); }

GameGraph GameGraph::Builder::build() {
    GameGraph g = assemble();
    ValidationResult res = validate(g);
    if (!res.ok()) throw ValidationError(std::move(res));
    // Renormalize rows whose sum is within tolerance of 1.
    for (StateId s = 0; s < g.num_states(); ++s) {
        if (g.kind(s) != StateKind::Probabilistic) continue;
        CompensatedSum sum;
        for (double p : g.probabilities(s)) sum.add(p);
        const double total = sum.value();
        if (total != 1.0) {
            for (std::size_t i = g.offsets_[s]; i < g.offsets_[s + 1]; ++i) {
                g.probs_[i] /= total;
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Pre and the concrete solvers

namespace {

double apply_state(const GameGraph& g, StateId s, const Valuation& v) {
    auto succ = g.successors(s);
    switch (g.kind(s)) {
    case StateKind::Player1: {
        double best = -std::numeric_limits<double>::infinity();
        for (StateId t : succ) best = std::max(best, v[t]);
        return best;
    }
    case StateKind::Player2: {
        double best = std::numeric_limits<double>::infinity();
        for (StateId t : succ) best = std::min(best, v[t]);
        return best;
    }
    case StateKind::Probabilistic: {
        auto probs = g.probabilities(s);
        CompensatedSum sum;
        for (std::size_t i = 0; i < succ.size(); ++i) sum.add(probs[i] * v[succ[i]]);
        return sum.value();
    }
    }
    return 0.0;
}

} // namespace

Valuation pre(const GameGraph& g, const Valuation& v) {
    if (v.size() != g.num_states()) {
        throw DimensionMismatchError("valuation covers " + std::to_string(v.size()) +
                                     " states, graph has " + std::to_string(g.num_states()));
    }
    Valuation out(g.num_states());
    for (StateId s = 0; s < g.num_states(); ++s) out[s] = apply_state(g, s, v);
    return out;
}

double pre_at(const GameGraph& g, StateId s, const Valuation& v) { return apply_state(g, s, v); }

ValueIterationResult value_iteration_discounted(const GameGraph& g, double beta, double eps_float,
                                                long max_sweeps) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("discount factor must lie in (0,1)");
    if (eps_float < 0.0) throw ConfigError("eps_float must be >= 0");
    const double target = eps_float > 0.0 ? eps_float : 1e-14;

    ValueIterationResult res;
    Valuation v(g.num_states(), 0.0);
    Valuation next(g.num_states(), 0.0);
    for (long sweep = 1; sweep <= max_sweeps; ++sweep) {
        double residual = 0.0;
        for (StateId s = 0; s < g.num_states(); ++s) {
            next[s] = (1.0 - beta) * g.reward(s) + beta * apply_state(g, s, v);
            residual = std::max(residual, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        res.sweeps = sweep;
        res.residual = residual;
        if (residual <= target) {
            res.values = std::move(v);
            return res;
        }
    }
    throw NoConvergenceError("discounted value iteration did not converge", res.residual,
                             res.sweeps);
}

OracleResult exact_discounted_oracle(const GameGraph& g, double beta) {
    // Sweep budget sized from the geometric decay of the residual.
    const double q = g.max_abs_reward() / (1.0 - beta);
    long budget = 1000;
    if (q > 0.0) {
        budget += static_cast<long>(std::ceil(std::log(q / 1e-15) / -std::log(beta))) * 4;
    }
    ValueIterationResult vi = value_iteration_discounted(g, beta, 0.0, budget);
    OracleResult out;
    out.values = std::move(vi.values);
    out.sweeps = vi.sweeps;
    out.error_bound = vi.residual * beta / (1.0 - beta);
    if (out.error_bound > 1e-12) {
        throw NoConvergenceError("oracle error bound above 1e-12", vi.residual, vi.sweeps);
    }
    return out;
}

RelativeVIResult relative_value_iteration(const GameGraph& g, double c, int k) {
    if (k < 1) throw ConfigError("relative value iteration needs k >= 1");
    Valuation v(g.num_states(), c);
    Valuation next(g.num_states(), 0.0);
    for (int i = 0; i <= k; ++i) {
        for (StateId s = 0; s < g.num_states(); ++s) {
            next[s] = g.reward(s) - c + apply_state(g, s, v);
        }
        v.swap(next);
    }
    RelativeVIResult res;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (lo > c) {
        res.verdict = DivergenceVerdict::Plus;
    } else if (hi < c) {
        res.verdict = DivergenceVerdict::Minus;
    }
    res.values = std::move(v);
    return res;
}

} // namespace mla
