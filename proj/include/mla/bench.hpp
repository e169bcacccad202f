#pragma once

#include <string>
#include <vector>

#include "mla/discounted.hpp"
#include "mla/game.hpp"

namespace mla {

struct BenchResult {
    std::vector<std::string> rows; // one JSON report line per engine
    SolveReport mla;
    ValueIterationResult vi;
    double vi_error_bound = 0.0;
    double vi_time_ms = 0.0;
    double max_disagreement = 0.0; // |vi - bound midpoint|, over checked states
};

/// Same-model comparison of the concrete and the abstraction engine.
/// Values are cross-checked per state (sampled above 10^4 states); a
/// disagreement beyond eps_abs/2 + slack is a correctness bug and throws
/// CrossCheckError.
BenchResult bench_compare(const GameGraph& g, const DiscountedConfig& cfg);

/// Report row for a plain value-iteration run (space is the |S| live
/// entries the sweep holds; regions not applicable, emitted as 0).
std::string vi_report_emit(const GameGraph& g, const ValueIterationResult& vi, double beta,
                           double time_ms, const std::string& status = "ok");

} // namespace mla
