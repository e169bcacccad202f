#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "mla/game.hpp"
#include "mla/instrument.hpp"
#include "mla/partition.hpp"

namespace mla {

enum class HMode { Max, Min };

inline double h_identity(HMode h) {
    return h == HMode::Max ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
}

inline double h_fold(HMode h, double a, double b) {
    return h == HMode::Max ? std::max(a, b) : std::min(a, b);
}

/**
 * Valuation over one region's states. The value buffer is instrumented:
 * these are the only concrete-state valuations the magnified solvers hold,
 * so the peak instrument reading bounds their live-entry footprint.
 */
class RegionLocalValues {
public:
    RegionLocalValues(std::span<const StateId> states, double init)
        : states_(states), values_(states.size(), init) {
        instrument::add_live(static_cast<std::ptrdiff_t>(values_.size()));
    }
    RegionLocalValues(const RegionLocalValues& o) : states_(o.states_), values_(o.values_) {
        instrument::add_live(static_cast<std::ptrdiff_t>(values_.size()));
    }
    RegionLocalValues& operator=(const RegionLocalValues&) = delete;
    ~RegionLocalValues() { instrument::add_live(-static_cast<std::ptrdiff_t>(values_.size())); }

    std::span<const StateId> states() const { return states_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t local) const { return values_[local]; }
    double& operator[](std::size_t local) { return values_[local]; }

    /// Value at a concrete state; throws ForeignStateError when the state
    /// is not covered.
    double at(StateId s) const;
    /// Local index of s, or -1 when s is not in the region.
    std::ptrdiff_t index_of(StateId s) const;

private:
    std::span<const StateId> states_; // ascending; owned by the partition
    std::vector<double> values_;
};

/**
 * Auxiliary lens g: reads v directly inside s's region and summarizes
 * foreign regions by h over their values,
 *     g(s,h,R,v)(t) = v(t)                     if t in [s]_R
 *                     h{ v(t') : t' in [t]_R } otherwise.
 */
double g_aux(const GameGraph& g, StateId s, HMode h, const PartitionTree& tree,
             const Valuation& v, StateId t);

/// Predecessor operator reading successor values through g. Full-graph
/// variant, used to check the operator laws; solvers use mprex instead.
Valuation mpre(const GameGraph& g, HMode h, const Valuation& v, const PartitionTree& tree);

/**
 * Auxiliary lens over a single region: in-region states read the local
 * valuation, foreign states read the abstract region value,
 *     ghat(s,R,v_x,u)(t) = v_x(t)    if t in [s]_R
 *                          u([t]_R)  otherwise.
 */
double ghat_aux(StateId s, const PartitionTree& tree, const RegionLocalValues& v_x,
                const RegionValuation& u, StateId t);

/// One entry of mprex: the predecessor update at s in x, reading successors
/// through ghat. This is the solvers' hot-loop primitive.
double mprex_state(const GameGraph& g, const PartitionTree& tree, const RegionLocalValues& v_x,
                   const RegionValuation& u, StateId s);

/// Region-confined predecessor operator: applies mprex_state at every state
/// of x. Needs only |x| concrete entries plus the region valuation.
RegionLocalValues mprex(const GameGraph& g, RegionId x, const RegionLocalValues& v_x,
                        const PartitionTree& tree, const RegionValuation& u);

/**
 * Successor resolution of one region, precomputed so repeated sweeps skip
 * the per-edge region lookups. resolve() then update_state() computes
 * exactly what mprex_state computes.
 */
struct ResolvedRegion {
    struct Succ {
        std::int32_t local; // >= 0: index into the region; -1: foreign
        RegionId region;    // foreign successor's region
        double prob;        // probabilistic source states only
    };
    std::vector<StateId> states;
    std::vector<StateKind> kinds;
    std::vector<double> rewards;
    std::vector<std::size_t> offsets;
    std::vector<Succ> succs;

    std::size_t size() const { return states.size(); }
};

ResolvedRegion resolve_region(const GameGraph& g, const PartitionTree& tree, RegionId x);

/// Operator value at local state i, reading locals from v and foreigners
/// from u. Bit-identical to mprex_state on the same inputs.
double resolved_update(const ResolvedRegion& rr, std::size_t i, const RegionLocalValues& v,
                       const RegionValuation& u);

} // namespace mla
