#pragma once

#include <string>

#include "mla/game.hpp"
#include "mla/magnified.hpp"
#include "mla/partition.hpp"

namespace mla {

struct DiscountedConfig {
    double beta = 0.9;
    double eps_abs = 0.01;
    double eps_float = 1e-4;
    int initial_depth = -1; // < 0 picks total_bits/2
    int max_outer_rounds = 256;
    long max_global_sweeps = 1000000;
    long max_mag_sweeps = 1000000;
    // Recompute a region only when its own or a successor region's value
    // changed since its last magnified solve. Reuse is exact, so toggling
    // this never changes any result.
    bool skip_stable_regions = true;
    int threads = 0; // 0: MLA_THREADS env var, else 1

    void check() const;
};

struct MagIterStats {
    long sweeps = 0;
    double final_residual = 0.0;
};

/**
 * Magnified iteration: region-confined discounted value iteration with the
 * rest of the state space frozen at the region values u,
 *     v(s) <- (1-beta) * r(s) + beta * MPrex(v, R, u)(s)   for s in x,
 * starting from v = u(x) and sweeping in place until no entry moves more
 * than eps_float. Returns h over the converged local valuation. Uses one
 * |x|-sized value buffer.
 */
double mag_iter(const GameGraph& g, const PartitionTree& tree, RegionId x,
                const RegionValuation& u, double beta, HMode h, double eps_float,
                long max_mag_sweeps, MagIterStats* stats = nullptr);

struct GlobalValIterResult {
    RegionValuation u;
    long sweeps = 0;     // region sweeps
    long mag_sweeps = 0; // magnified sweeps summed over all regions
    double residual = 0.0;
};

/**
 * Sweeps mag_iter over all regions against a snapshot of u (Jacobi at the
 * region level, so processing order cannot matter) until one more sweep
 * changes no region by more than eps_float.
 */
GlobalValIterResult global_val_iter(const GameGraph& g, const PartitionTree& tree,
                                    RegionValuation u, double beta, HMode h, double eps_float,
                                    const DiscountedConfig& cfg);

struct SolveReport {
    std::string engine = "mla";
    std::string status = "ok"; // ok | no_convergence | round_limit
    std::size_t states = 0;
    std::size_t transitions = 0;
    PartitionTree partition;
    RegionValuation lower, upper;
    double bounds_gap_max = 0.0;
    std::size_t regions = 0;
    std::size_t space_metric = 0;
    int rounds = 0;
    long global_sweeps = 0;
    long mag_sweeps = 0;
    double wall_ms = 0.0;
    // True when lower/upper include the constructive convergence slack and
    // therefore bracket the game value outright.
    bool certified = false;
    double slack = 0.0;
    // Concrete value iteration took over after refinement bottomed out.
    bool fallback = false;
    long long peak_live_entries = 0;
    // Largest region the magnified solver worked on across all rounds
    // (refinement shrinks regions, so this is the first tree's largest).
    std::size_t max_region_solved = 0;
    std::string regions_dump; // path of the per-region dump, when written

    double lower_at(StateId s) const { return lower[partition.region_of(s)]; }
    double upper_at(StateId s) const { return upper[partition.region_of(s)]; }
};

/**
 * Abstraction-refinement solver for the discounted objective. Maintains
 * per-region bounds u- <= v* <= u+, re-solving both with global value
 * iteration and splitting every region whose gap exceeds the target until
 * all gaps close below eps_abs. Warm starts: u+ restarts from u- each
 * round, and u- carries over across refinements.
 */
SolveReport mla_discounted(const GameGraph& g, const DiscountedConfig& cfg);

/// Concrete completion for a partition the refinement cannot certify:
/// solves the game exactly and rewrites the bounds as per-region value
/// ranges widened by the certified iteration bound. Returns that bound.
double concrete_fallback_bounds(const GameGraph& g, double beta, long max_sweeps,
                                const PartitionTree& tree, RegionValuation& lower,
                                RegionValuation& upper);

/// One-line JSON with the report's interface keys.
std::string solve_report_emit(const SolveReport& report);

} // namespace mla
