#pragma once

#include <cmath>
#include <cstdint>

namespace mla {

/// Neumaier-compensated accumulator. Expectations over successor
/// distributions use this so that two code paths computing the same
/// sum agree bit for bit.
class CompensatedSum {
public:
    void add(double term) {
        double t = sum_ + term;
        if (std::abs(sum_) >= std::abs(term)) {
            comp_ += (sum_ - t) + term;
        } else {
            comp_ += (term - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Smallest b with 2^b >= n (n >= 1). ceil_log2(1) == 0.
inline int ceil_log2(std::uint64_t n) {
    int b = 0;
    std::uint64_t v = 1;
    while (v < n) {
        v <<= 1;
        ++b;
    }
    return b;
}

} // namespace mla
