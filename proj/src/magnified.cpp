#include "mla/magnified.hpp"

#include <algorithm>
#include <limits>

#include "mla/numeric.hpp"

namespace mla {

double RegionLocalValues::at(StateId s) const {
    std::ptrdiff_t i = index_of(s);
    if (i < 0) {
        throw ForeignStateError("state " + std::to_string(s) +
                                " is not covered by this region valuation");
    }
    return values_[static_cast<std::size_t>(i)];
}

std::ptrdiff_t RegionLocalValues::index_of(StateId s) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), s);
    if (it == states_.end() || *it != s) return -1;
    return it - states_.begin();
}

double g_aux(const GameGraph&, StateId s, HMode h, const PartitionTree& tree, const Valuation& v,
             StateId t) {
    if (tree.region_of(t) == tree.region_of(s)) return v[t];
    double acc = h_identity(h);
    for (StateId t2 : tree.states_of(tree.region_of(t))) {
        acc = h_fold(h, acc, v[t2]);
    }
    return acc;
}

Valuation mpre(const GameGraph& g, HMode h, const Valuation& v, const PartitionTree& tree) {
    if (v.size() != g.num_states()) {
        throw DimensionMismatchError("valuation covers " + std::to_string(v.size()) +
                                     " states, graph has " + std::to_string(g.num_states()));
    }
    // Summarize every region once instead of re-folding per edge.
    RegionValuation summary =
        RegionValuation::constant(tree.num_regions(), h_identity(h),
                                  h == HMode::Max ? BoundRole::Upper : BoundRole::Lower);
    for (StateId s = 0; s < g.num_states(); ++s) {
        RegionId x = tree.region_of(s);
        summary[x] = h_fold(h, summary[x], v[s]);
    }
    Valuation out(g.num_states());
    for (StateId s = 0; s < g.num_states(); ++s) {
        const RegionId home = tree.region_of(s);
        auto value_at = [&](StateId t) {
            RegionId xt = tree.region_of(t);
            return xt == home ? v[t] : summary[xt];
        };
        auto succ = g.successors(s);
        switch (g.kind(s)) {
        case StateKind::Player1: {
            double best = -std::numeric_limits<double>::infinity();
            for (StateId t : succ) best = std::max(best, value_at(t));
            out[s] = best;
            break;
        }
        case StateKind::Player2: {
            double best = std::numeric_limits<double>::infinity();
            for (StateId t : succ) best = std::min(best, value_at(t));
            out[s] = best;
            break;
        }
        case StateKind::Probabilistic: {
            auto probs = g.probabilities(s);
            CompensatedSum sum;
            for (std::size_t i = 0; i < succ.size(); ++i) sum.add(probs[i] * value_at(succ[i]));
            out[s] = sum.value();
            break;
        }
        }
    }
    return out;
}

double ghat_aux(StateId s, const PartitionTree& tree, const RegionLocalValues& v_x,
                const RegionValuation& u, StateId t) {
    if (tree.region_of(t) == tree.region_of(s)) return v_x.at(t);
    return u[tree.region_of(t)];
}

double mprex_state(const GameGraph& g, const PartitionTree& tree, const RegionLocalValues& v_x,
                   const RegionValuation& u, StateId s) {
    const RegionId home = tree.region_of(s);
    auto value_at = [&](StateId t) {
        RegionId xt = tree.region_of(t);
        return xt == home ? v_x.at(t) : u[xt];
    };
    auto succ = g.successors(s);
    switch (g.kind(s)) {
    case StateKind::Player1: {
        double best = -std::numeric_limits<double>::infinity();
        for (StateId t : succ) best = std::max(best, value_at(t));
        return best;
    }
    case StateKind::Player2: {
        double best = std::numeric_limits<double>::infinity();
        for (StateId t : succ) best = std::min(best, value_at(t));
        return best;
    }
    case StateKind::Probabilistic: {
        auto probs = g.probabilities(s);
        CompensatedSum sum;
        for (std::size_t i = 0; i < succ.size(); ++i) sum.add(probs[i] * value_at(succ[i]));
        return sum.value();
    }
    }
    return 0.0;
}

RegionLocalValues mprex(const GameGraph& g, RegionId x, const RegionLocalValues& v_x,
                        const PartitionTree& tree, const RegionValuation& u) {
    if (u.size() != tree.num_regions()) {
        throw DimensionMismatchError("region valuation does not cover the partition");
    }
    auto xs = tree.states_of(x);
    if (v_x.states().size() != xs.size() ||
        !std::equal(xs.begin(), xs.end(), v_x.states().begin())) {
        throw DimensionMismatchError("local valuation does not cover region " + std::to_string(x));
    }
    RegionLocalValues out(xs, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i] = mprex_state(g, tree, v_x, u, xs[i]);
    }
    return out;
}

ResolvedRegion resolve_region(const GameGraph& g, const PartitionTree& tree, RegionId x) {
    ResolvedRegion rr;
    auto xs = tree.states_of(x);
    rr.states.assign(xs.begin(), xs.end());
    rr.kinds.reserve(xs.size());
    rr.rewards.reserve(xs.size());
    rr.offsets.reserve(xs.size() + 1);
    rr.offsets.push_back(0);
    for (StateId s : xs) {
        rr.kinds.push_back(g.kind(s));
        rr.rewards.push_back(g.reward(s));
        auto succ = g.successors(s);
        auto probs = g.probabilities(s);
        for (std::size_t i = 0; i < succ.size(); ++i) {
            ResolvedRegion::Succ e;
            RegionId xt = tree.region_of(succ[i]);
            if (xt == x) {
                auto it = std::lower_bound(xs.begin(), xs.end(), succ[i]);
                e.local = static_cast<std::int32_t>(it - xs.begin());
                e.region = x;
            } else {
                e.local = -1;
                e.region = xt;
            }
            e.prob = g.kind(s) == StateKind::Probabilistic ? probs[i] : 0.0;
            rr.succs.push_back(e);
        }
        rr.offsets.push_back(rr.succs.size());
    }
    return rr;
}

double resolved_update(const ResolvedRegion& rr, std::size_t i, const RegionLocalValues& v,
                       const RegionValuation& u) {
    const std::size_t lo = rr.offsets[i];
    const std::size_t hi = rr.offsets[i + 1];
    switch (rr.kinds[i]) {
    case StateKind::Player1: {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t e = lo; e < hi; ++e) {
            const auto& s = rr.succs[e];
            best = std::max(best, s.local >= 0 ? v[static_cast<std::size_t>(s.local)]
                                               : u[s.region]);
        }
        return best;
    }
    case StateKind::Player2: {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t e = lo; e < hi; ++e) {
            const auto& s = rr.succs[e];
            best = std::min(best, s.local >= 0 ? v[static_cast<std::size_t>(s.local)]
                                               : u[s.region]);
        }
        return best;
    }
    case StateKind::Probabilistic: {
        CompensatedSum sum;
        for (std::size_t e = lo; e < hi; ++e) {
            const auto& s = rr.succs[e];
            sum.add(s.prob *
                    (s.local >= 0 ? v[static_cast<std::size_t>(s.local)] : u[s.region]));
        }
        return sum.value();
    }
    }
    return 0.0;
}

} // namespace mla
