#include "mla/instrument.hpp"

#include <atomic>

namespace mla::instrument {

namespace {
std::atomic<long long> g_live{0};
std::atomic<long long> g_peak{0};
} // namespace

void add_live(std::ptrdiff_t delta) {
    long long now = g_live.fetch_add(delta, std::memory_order_relaxed) + delta;
    long long prev = g_peak.load(std::memory_order_relaxed);
    while (now > prev && !g_peak.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
    }
}

long long live() { return g_live.load(std::memory_order_relaxed); }

long long peak() { return g_peak.load(std::memory_order_relaxed); }

void reset_peak() { g_peak.store(g_live.load(std::memory_order_relaxed)); }

} // namespace mla::instrument
