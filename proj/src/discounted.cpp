#include "mla/discounted.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "mla/parallel.hpp"

namespace mla {

void DiscountedConfig::check() const {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("discount factor must lie in (0,1)");
    if (!(eps_abs > 0.0)) throw ConfigError("eps_abs must be positive");
    if (eps_float < 0.0) throw ConfigError("eps_float must be >= 0");
    if (eps_float > 0.0 && eps_abs < 10.0 * eps_float) {
        throw ConfigError("eps_abs must exceed eps_float by at least one order of magnitude");
    }
    if (max_outer_rounds < 1 || max_global_sweeps < 1 || max_mag_sweeps < 1) {
        throw ConfigError("iteration limits must be positive");
    }
}

namespace {

double mag_iter_impl(const ResolvedRegion& rr, RegionId x, const RegionValuation& u, double beta,
                     HMode h, double eps_float, long max_mag_sweeps, MagIterStats* stats) {
    const double target = eps_float > 0.0 ? eps_float : 1e-14;
    RegionLocalValues v({rr.states.data(), rr.states.size()}, u[x]);
    long sweep = 0;
    double residual;
    do {
        ++sweep;
        residual = 0.0;
        for (std::size_t i = 0; i < rr.size(); ++i) {
            const double nv = (1.0 - beta) * rr.rewards[i] + beta * resolved_update(rr, i, v, u);
            residual = std::max(residual, std::abs(nv - v[i]));
            v[i] = nv;
        }
        if (sweep >= max_mag_sweeps && residual > target) {
            throw NoConvergenceError("magnified iteration on region " + std::to_string(x),
                                     residual, sweep);
        }
    } while (residual > target);
    if (stats) {
        stats->sweeps = sweep;
        stats->final_residual = residual;
    }
    double acc = h_identity(h);
    for (std::size_t i = 0; i < rr.size(); ++i) acc = h_fold(h, acc, v[i]);
    return acc;
}

// Deduplicated successor regions per region, for the stable-region skip.
std::vector<std::vector<RegionId>> region_adjacency(const std::vector<ResolvedRegion>& rrs) {
    std::vector<std::vector<RegionId>> adj(rrs.size());
    for (std::size_t x = 0; x < rrs.size(); ++x) {
        auto& out = adj[x];
        for (const auto& e : rrs[x].succs) {
            if (e.local < 0) out.push_back(e.region);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return adj;
}

} // namespace

double mag_iter(const GameGraph& g, const PartitionTree& tree, RegionId x,
                const RegionValuation& u, double beta, HMode h, double eps_float,
                long max_mag_sweeps, MagIterStats* stats) {
    if (u.size() != tree.num_regions()) {
        throw DimensionMismatchError("region valuation does not cover the partition");
    }
    ResolvedRegion rr = resolve_region(g, tree, x);
    return mag_iter_impl(rr, x, u, beta, h, eps_float, max_mag_sweeps, stats);
}

GlobalValIterResult global_val_iter(const GameGraph& g, const PartitionTree& tree,
                                    RegionValuation u, double beta, HMode h, double eps_float,
                                    const DiscountedConfig& cfg) {
    const std::size_t nr = tree.num_regions();
    if (u.size() != nr) {
        throw DimensionMismatchError("region valuation does not cover the partition");
    }
    const double target = eps_float > 0.0 ? eps_float : 1e-14;
    const int threads = cfg.threads > 0 ? cfg.threads : default_threads();

    std::vector<ResolvedRegion> rrs;
    rrs.reserve(nr);
    for (RegionId x = 0; x < nr; ++x) rrs.push_back(resolve_region(g, tree, x));
    const auto adj = region_adjacency(rrs);

    GlobalValIterResult res;
    std::vector<char> dirty(nr, 1), changed(nr, 0);
    std::vector<long> mag_counts(nr, 0);
    RegionValuation snapshot = u;
    for (long sweep = 1; sweep <= cfg.max_global_sweeps; ++sweep) {
        snapshot.values = u.values;
        parallel_for(nr, threads, [&](std::size_t x) {
            mag_counts[x] = 0;
            if (!cfg.skip_stable_regions || dirty[x]) {
                MagIterStats st;
                u.values[x] = mag_iter_impl(rrs[x], static_cast<RegionId>(x), snapshot, beta, h,
                                            eps_float, cfg.max_mag_sweeps, &st);
                mag_counts[x] = st.sweeps;
            } else {
                u.values[x] = snapshot[x];
            }
        });
        double residual = 0.0;
        for (std::size_t x = 0; x < nr; ++x) {
            changed[x] = u.values[x] != snapshot[x] ? 1 : 0;
            residual = std::max(residual, std::abs(u.values[x] - snapshot[x]));
            res.mag_sweeps += mag_counts[x];
        }
        res.sweeps = sweep;
        res.residual = residual;
        if (residual <= target) {
            res.u = std::move(u);
            return res;
        }
        for (std::size_t x = 0; x < nr; ++x) {
            char d = changed[x];
            if (!d) {
                for (RegionId y : adj[x]) {
                    if (changed[y]) {
                        d = 1;
                        break;
                    }
                }
            }
            dirty[x] = d;
        }
    }
    throw NoConvergenceError("global value iteration", res.residual, res.sweeps);
}

double concrete_fallback_bounds(const GameGraph& g, double beta, long max_sweeps,
                                const PartitionTree& tree, RegionValuation& lower,
                                RegionValuation& upper) {
    auto vi = value_iteration_discounted(g, beta, 0.0, max_sweeps);
    const double bound = vi.residual * beta / (1.0 - beta);
    for (RegionId x = 0; x < tree.num_regions(); ++x) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (StateId s : tree.states_of(x)) {
            lo = std::min(lo, vi.values[s]);
            hi = std::max(hi, vi.values[s]);
        }
        lower[x] = lo - bound;
        upper[x] = hi + bound;
    }
    return bound;
}

SolveReport mla_discounted(const GameGraph& g, const DiscountedConfig& cfg) {
    cfg.check();
    {
        ValidationResult v = validate(g);
        if (!v.ok()) throw ValidationError(std::move(v));
    }
    const auto t0 = std::chrono::steady_clock::now();
    instrument::reset_peak();

    PartitionTree tree = PartitionTree::initial_for(g, cfg.initial_depth);
    const double beta = cfg.beta;
    const double inner = cfg.eps_float > 0.0 ? cfg.eps_float : 1e-14;
    // Constructive convergence slack: the magnified solves stop within
    // eps_float * beta/(1-beta) of their frozen-u fixpoints, and the region
    // sweep stops within (eps_float + that)/(1-beta) of the abstract
    // fixpoint, which brackets the value outright.
    const double slack = inner * (1.0 + beta / (1.0 - beta)) / (1.0 - beta);
    const bool certify = slack * 4.0 <= cfg.eps_abs;
    const double target = certify ? cfg.eps_abs - 2.0 * slack : cfg.eps_abs;

    RegionValuation lower =
        RegionValuation::constant(tree.num_regions(), 0.0, BoundRole::Lower);
    RegionValuation upper =
        RegionValuation::constant(tree.num_regions(), 0.0, BoundRole::Upper);

    SolveReport rep;
    rep.states = g.num_states();
    rep.transitions = g.num_transitions();

    int round = 0;
    bool fell_back = false;
    while (true) {
        if (round >= cfg.max_outer_rounds) {
            rep.status = "round_limit";
            break;
        }
        ++round;
        rep.max_region_solved = std::max(rep.max_region_solved, tree.max_region_size());
        upper.values = lower.values; // restart the upper run from below
        try {
            auto up = global_val_iter(g, tree, std::move(upper), beta, HMode::Max, cfg.eps_float,
                                      cfg);
            upper = std::move(up.u);
            rep.global_sweeps += up.sweeps;
            rep.mag_sweeps += up.mag_sweeps;
            auto dn = global_val_iter(g, tree, std::move(lower), beta, HMode::Min, cfg.eps_float,
                                      cfg);
            lower = std::move(dn.u);
            rep.global_sweeps += dn.sweeps;
            rep.mag_sweeps += dn.mag_sweeps;
        } catch (const NoConvergenceError&) {
            rep.status = "no_convergence";
            break;
        }
        if (max_gap(lower, upper) < target) break;
        try {
            auto sr = tree.split_all(lower, upper, target);
            if (sr.splits == 0) break; // gap sits exactly on the threshold
            tree = std::move(sr.tree);
            lower = std::move(sr.lower);
            upper = std::move(sr.upper);
        } catch (const CannotRefineError&) {
            fell_back = true;
            break;
        }
    }

    if (fell_back) {
        // The partition cannot certify eps_abs; finish with the concrete
        // solver and report its exact values per region.
        try {
            rep.slack = concrete_fallback_bounds(g, beta, cfg.max_global_sweeps, tree, lower,
                                                 upper);
            rep.certified = true;
            rep.fallback = true;
        } catch (const NoConvergenceError&) {
            rep.status = "no_convergence";
        }
    } else if (rep.status == "ok" && certify) {
        for (RegionId x = 0; x < tree.num_regions(); ++x) {
            lower[x] -= slack;
            upper[x] += slack;
        }
        rep.certified = true;
        rep.slack = slack;
    }

    rep.bounds_gap_max = max_gap(lower, upper);
    rep.regions = tree.num_regions();
    rep.space_metric = tree.space_metric();
    rep.rounds = round;
    rep.partition = std::move(tree);
    rep.lower = std::move(lower);
    rep.upper = std::move(upper);
    rep.peak_live_entries = instrument::peak();
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

} // namespace mla
