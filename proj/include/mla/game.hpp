#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mla/errors.hpp"
#include "mla/schema.hpp"

namespace mla {

using StateId = std::uint32_t;

enum class StateKind : std::uint8_t {
    Player1,       // maximizer picks the successor
    Player2,       // minimizer picks the successor
    Probabilistic, // successor drawn from the state's distribution
};

/// Real value per state.
using Valuation = std::vector<double>;

enum class DivergenceVerdict { Plus, Minus, Unknown };

enum class Player { One = 1, Two = 2 };

/// Tolerance on probability-row sums. Rows within this of 1 are
/// renormalized at construction; rows further off are rejected.
inline constexpr double kProbSumTolerance = 1e-9;

enum class ViolationKind {
    DanglingEdge,
    EmptySuccessorSet,
    BadDistribution,
    NegativeProbability,
    DuplicateEdge,
    MissingAssignment,
    BadAssignment,
    DuplicateAssignment,
};

struct Violation {
    StateId state = 0;
    ViolationKind kind = ViolationKind::DanglingEdge;
    std::string detail;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Carries the full violation list of a rejected graph.
class ValidationError : public Error {
public:
    explicit ValidationError(ValidationResult result);
    ValidationResult result;
};

/**
 * Sparse turn-based stochastic game graph.
 *
 * States are dense ids in [0, num_states()). Every state owns a successor
 * list; probabilistic states additionally own one probability per successor.
 * Rewards are arbitrary reals attached to states. Optionally each state maps
 * to an assignment of a VariableSchema, which gives partition trees their
 * bit encoding.
 *
 * Immutable after construction; safe to share across concurrent solver runs.
 */
class GameGraph {
public:
    class Builder;

    GameGraph() = default;

    std::size_t num_states() const { return kinds_.size(); }
    std::size_t num_transitions() const { return targets_.size(); }

    StateKind kind(StateId s) const { return kinds_[s]; }
    double reward(StateId s) const { return rewards_[s]; }

    std::span<const StateId> successors(StateId s) const {
        return {targets_.data() + offsets_[s], targets_.data() + offsets_[s + 1]};
    }
    /// Probabilities parallel to successors(s); meaningful for
    /// Probabilistic states only.
    std::span<const double> probabilities(StateId s) const {
        return {probs_.data() + offsets_[s], probs_.data() + offsets_[s + 1]};
    }

    double max_abs_reward() const;
    double max_reward() const;
    double min_reward() const;

    bool is_mdp() const; // no player-2 states

    const std::optional<VariableSchema>& schema() const { return schema_; }
    std::span<const std::uint64_t> assignment(StateId s) const;

    struct StateCodes {
        std::vector<std::uint64_t> codes; // one per state
        int total_bits = 0;
    };
    /// Bit encoding each state according to the schema, or the state index
    /// itself when no schema is declared.
    StateCodes state_codes() const;

    /// Free-form metadata carried through the file format (JSON text).
    std::string meta_json = "{}";

    friend ValidationResult validate(const GameGraph&);

private:
    std::vector<StateKind> kinds_;
    std::vector<double> rewards_;
    std::vector<std::size_t> offsets_; // size num_states()+1
    std::vector<StateId> targets_;
    std::vector<double> probs_; // parallel to targets_
    std::optional<VariableSchema> schema_;
    std::vector<std::uint64_t> assignments_; // num_states() * schema.size()
};

/// Incremental construction; edges may reference states added later.
class GameGraph::Builder {
public:
    StateId add_state(StateKind kind, double reward);
    void add_edge(StateId from, StateId to);
    void add_edge(StateId from, StateId to, double prob);
    void set_schema(VariableSchema schema);
    void set_assignment(StateId s, std::vector<std::uint64_t> values);
    void set_meta(std::string meta_json);
    void reserve(std::size_t states, std::size_t edges);

    /// Assembles the graph. Validates and renormalizes probability rows;
    /// throws ValidationError on any violation.
    GameGraph build();
    /// Assembles without validation (for tests exercising validate()).
    GameGraph build_unchecked();

private:
    GameGraph assemble();
    std::vector<StateKind> kinds_;
    std::vector<double> rewards_;
    struct Edge {
        StateId from, to;
        double prob;
    };
    std::vector<Edge> edges_;
    std::optional<VariableSchema> schema_;
    std::vector<std::pair<StateId, std::vector<std::uint64_t>>> assignments_;
    std::string meta_ = "{}";
};

/// Checks every structural rule and returns the full list of violations.
ValidationResult validate(const GameGraph& g);

/**
 * One-step predecessor operator: max over successors at player-1 states,
 * min at player-2 states, expectation at probabilistic states.
 */
Valuation pre(const GameGraph& g, const Valuation& v);

/// The s-entry of pre(g, v) without materializing the full valuation.
double pre_at(const GameGraph& g, StateId s, const Valuation& v);

struct ValueIterationResult {
    Valuation values;
    long sweeps = 0;
    double residual = 0.0;
};

/**
 * Discounted value iteration in normalized form,
 *     v_{i+1}(s) = (1-beta) * r(s) + beta * Pre(v_i)(s),
 * starting from v0 = 0 and stopping when the sup-norm step falls to
 * eps_float (eps_float == 0 is mapped to 1e-14). Throws NoConvergenceError
 * when max_sweeps is exhausted first.
 */
ValueIterationResult value_iteration_discounted(const GameGraph& g, double beta,
                                                double eps_float, long max_sweeps);

struct OracleResult {
    Valuation values;
    double error_bound = 0.0; // certified sup-norm distance to the fixpoint
    long sweeps = 0;
};

/// Reference solution: iterate to residual 1e-14 and certify the result via
/// the contraction bound beta/(1-beta) * residual (required to be <= 1e-12).
OracleResult exact_discounted_oracle(const GameGraph& g, double beta);

struct RelativeVIResult {
    DivergenceVerdict verdict = DivergenceVerdict::Unknown;
    Valuation values; // v_{k+1}
};

/**
 * Relative value iteration probe for mean payoff: v0 = c everywhere,
 * v_{i+1}(s) = r(s) - c + Pre(v_i)(s), run for k+1 steps. Verdict Plus when
 * min_s v_{k+1}(s) > c, Minus when max_s v_{k+1}(s) < c, else Unknown.
 * On uniform-value games divergence direction locates the gain against c.
 */
RelativeVIResult relative_value_iteration(const GameGraph& g, double c, int k);

} // namespace mla
