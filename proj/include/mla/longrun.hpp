#pragma once

#include <optional>
#include <string>

#include "mla/game.hpp"
#include "mla/magnified.hpp"
#include "mla/partition.hpp"

namespace mla {

struct LongRunConfig {
    double eps_abs = 0.01;
    int k = 100;        // update steps per divergence probe
    double ratio = 0.5; // share of regions split on an indecisive probe
    int initial_depth = -1;
    int max_bisection_steps = 256;
    int threads = 0;

    void check() const;
};

/**
 * Magnified relative value iteration over one region: from v0 = u(x),
 * exactly k+1 updates v(s) <- r(s) - c + MPrex(v, R, u)(s) against the
 * previous iterate, then the h-summary of the final local valuation.
 */
double mag_iter2(const GameGraph& g, const PartitionTree& tree, RegionId x,
                 const RegionValuation& u, double c, HMode h, int k);

struct DivergenceResult {
    DivergenceVerdict verdict = DivergenceVerdict::Unknown;
    RegionValuation values; // final region valuation of the probe
};

/**
 * Drift probe at level c: from v = c on every region, k+1 sweeps of
 * mag_iter2 against the previous sweep's snapshot. Verdict Plus when every
 * region ends strictly above c, Minus when every region ends strictly
 * below, Unknown otherwise (comparisons are exact; no tolerance).
 */
DivergenceResult check_divergence(const GameGraph& g, const PartitionTree& tree, double c,
                                  HMode h, int k, int threads = 1);

struct MecInterval {
    std::vector<StateId> states;
    double lo = 0.0, hi = 0.0;
};

struct LongRunReport {
    std::string status = "ok"; // ok | probe_budget | step_limit
    double c_lo = 0.0, c_hi = 0.0;
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::size_t regions = 0;
    std::size_t space_metric = 0;
    long probes = 0;
    long refinements = 0;
    std::vector<MecInterval> mecs; // filled by the MDP pipeline
    bool fallback = false;         // concrete probing took over
    double wall_ms = 0.0;
    std::string regions_dump;
};

/**
 * Dichotomic search for the long-run average value of a game in which every
 * state has the same value (callers establish this via check_uniform_value
 * or the end-component pipeline). Probes the midpoint with magnified
 * relative value iteration in both bound directions; an indecisive probe
 * refines the partition, and once regions are all singletons the probes
 * continue concretely with a doubling step budget.
 */
LongRunReport mla_longrun(const GameGraph& g, const LongRunConfig& cfg);

/**
 * States from which the given player can reach t with positive probability
 * against every opponent strategy: least fixpoint containing t, closed
 * under [own state with a successor inside], [opponent state with all
 * successors inside], [probabilistic state with a successor inside].
 */
std::vector<StateId> positive_reach_set(const GameGraph& g, Player player, StateId t);

struct UniformValueCheck {
    bool uniform = false;
    std::optional<StateId> witness;
};

/// Sufficient condition for a uniform game value: some state t that both
/// players can reach with positive probability from everywhere.
UniformValueCheck check_uniform_value(const GameGraph& g);

struct EndComponent {
    std::vector<StateId> states; // ascending
};

/**
 * Maximal end components of an MDP: strongly connected sets keeping all
 * probabilistic branching inside. Iterative prune: decompose into SCCs,
 * drop probabilistic states with external edges and player states with
 * no internal edge, repeat until stable. Throws NotAnMdpError on
 * player-2 states.
 */
std::vector<EndComponent> mec_decomposition(const GameGraph& g);

struct SubGraph {
    GameGraph graph;
    std::vector<StateId> to_parent; // local id -> parent id
};

/// Sub-game induced by a state set: member states with their inside edges
/// only. Every probabilistic member must already be closed in the set.
SubGraph induced_subgraph(const GameGraph& g, std::span<const StateId> states);

/**
 * Maximal expected terminal value in an MDP whose only end components are
 * the pinned absorbing states: value iteration with terminal states held
 * at their given values, run to the residual target.
 */
Valuation quotient_reach_value(const GameGraph& quotient,
                               const std::vector<std::pair<StateId, double>>& terminals,
                               double eps);

struct MdpLongRunResult {
    Valuation lo, hi; // per-state bounds
    LongRunReport report;
};

/**
 * Long-run average bounds for a general MDP: decompose into maximal end
 * components, bound each component's uniform value with mla_longrun, then
 * propagate through the component quotient (components keep their exit
 * edges and may realize their own value, so leaving for a better component
 * is accounted for).
 */
MdpLongRunResult solve_mdp_longrun(const GameGraph& g, const LongRunConfig& cfg);

/// One-line JSON with the long-run report's interface keys.
std::string longrun_report_emit(const LongRunReport& report);

} // namespace mla
