#pragma once

#include <cstddef>

namespace mla::instrument {

// Tracks how many concrete (state-indexed) valuation entries the magnified
// solvers hold live, so tests can pin the peak against max region size.
// Region-indexed valuations are not counted; they are part of the 2|R| term
// of the space metric.

void add_live(std::ptrdiff_t delta);
long long live();
long long peak();
void reset_peak();

} // namespace mla::instrument
