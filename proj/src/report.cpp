#include <chrono>

#include "json.hpp"
#include "mla/bench.hpp"
#include "mla/discounted.hpp"
#include "mla/longrun.hpp"

namespace mla {

using nlohmann::json;

namespace {

json base_report(const std::string& engine, const std::string& status, std::size_t states,
                 std::size_t transitions, double time_ms, std::size_t space_metric,
                 std::size_t regions, long rounds, double gap,
                 const std::string& regions_dump) {
    json j;
    j["engine"] = engine;
    j["status"] = status;
    j["states"] = states;
    j["transitions"] = transitions;
    j["time_ms"] = time_ms;
    j["space_metric"] = space_metric;
    j["regions"] = regions;
    j["rounds"] = rounds;
    j["bounds_gap_max"] = gap;
    if (regions_dump.empty()) {
        j["regions_dump"] = nullptr;
    } else {
        j["regions_dump"] = regions_dump;
    }
    return j;
}

} // namespace

std::string solve_report_emit(const SolveReport& r) {
    json j = base_report(r.engine, r.status, r.states, r.transitions, r.wall_ms, r.space_metric,
                         r.regions, r.rounds, r.bounds_gap_max, r.regions_dump);
    return j.dump();
}

std::string longrun_report_emit(const LongRunReport& r) {
    json j = base_report("mla", r.status, r.states, r.transitions, r.wall_ms, r.space_metric,
                         r.regions, r.refinements, r.c_hi - r.c_lo, r.regions_dump);
    j["c_lo"] = r.c_lo;
    j["c_hi"] = r.c_hi;
    j["probes"] = r.probes;
    json mecs = json::array();
    for (const auto& m : r.mecs) {
        mecs.push_back({{"size", m.states.size()}, {"lo", m.lo}, {"hi", m.hi}});
    }
    j["mecs"] = std::move(mecs);
    return j.dump();
}

std::string vi_report_emit(const GameGraph& g, const ValueIterationResult& vi, double beta,
                           double time_ms, const std::string& status) {
    const double bound = vi.residual * beta / (1.0 - beta);
    json j = base_report("vi", status, g.num_states(), g.num_transitions(), time_ms,
                         g.num_states(), 0, vi.sweeps, 2.0 * bound, "");
    return j.dump();
}

BenchResult bench_compare(const GameGraph& g, const DiscountedConfig& cfg) {
    cfg.check();
    BenchResult out;

    const auto t0 = std::chrono::steady_clock::now();
    out.vi = value_iteration_discounted(g, cfg.beta, cfg.eps_float, cfg.max_global_sweeps);
    out.vi_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.vi_error_bound = out.vi.residual * cfg.beta / (1.0 - cfg.beta);

    out.mla = mla_discounted(g, cfg);

    out.rows.push_back(vi_report_emit(g, out.vi, cfg.beta, out.vi_time_ms));
    out.rows.push_back(solve_report_emit(out.mla));

    // Cross-check: vi's point estimate against the abstraction's bracket.
    const std::size_t n = g.num_states();
    const std::size_t stride = n > 10000 ? n / 10000 + 1 : 1;
    const double tol = cfg.eps_abs / 2.0 + out.mla.slack + out.vi_error_bound +
                       cfg.eps_float * cfg.beta / (1.0 - cfg.beta);
    for (StateId s = 0; s < n; s += static_cast<StateId>(stride)) {
        const double mid = (out.mla.lower_at(s) + out.mla.upper_at(s)) / 2.0;
        out.max_disagreement = std::max(out.max_disagreement, std::abs(out.vi.values[s] - mid));
    }
    if (out.max_disagreement > tol) {
        throw CrossCheckError("engines disagree by " + std::to_string(out.max_disagreement) +
                              " (tolerance " + std::to_string(tol) + ")");
    }
    return out;
}

} // namespace mla
