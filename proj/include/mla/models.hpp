#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mla/game.hpp"

namespace mla {

struct ModelCounts {
    std::uint64_t core_states = 0;
    std::uint64_t total_states = 0;
};

/**
 * Robot on an n x n grid with a dying sink. Mines (seeded placement) define
 * a danger field p(x,y) = clamp(sum over mines within Manhattan radius 3 of
 * 1/(1+d)^2, 0, 0.9). Safe cells are player-1 states moving deterministically
 * to the four neighbours (blocked border moves self-loop); cells inside a
 * mine's influence are probabilistic — the robot scrambles uniformly over
 * the same move targets and dies into the sink with mass p. Sparse charge
 * sites (x and y both multiples of 64) reward +1, other moves are free,
 * the sink absorbs at 0. Exactly n^2 + 1 states.
 */
struct PlanningParams {
    std::uint32_t n = 8;
    std::uint32_t mines = 0;
    std::string p_profile = "inverse_square"; // or "step"
    std::uint64_t seed = 0;
};
GameGraph gen_planning(const PlanningParams& p);
ModelCounts count_planning(const PlanningParams& p);

/**
 * Automobile inventory <n, t>: each month the company manufactures nc cars
 * or skips, then sells a uniform draw from [sold_min, min(sold_max, stock)].
 * Manufacturing cost and sale income live on intermediate choice/sale
 * states (rewards are per state), so the core <n, t> grid is exactly
 * (n_max+1) * (t_max+1) states and the report carries core and total
 * counts separately. t = t_max absorbs.
 */
struct InventoryParams {
    std::uint32_t n_max = 15;
    std::uint32_t t_max = 15;
    std::uint32_t nc = 2;
    std::uint32_t sold_min = 0;
    std::uint32_t sold_max = 2;
    double price = 0.1;
    double cost = 0.05;
};
GameGraph gen_inventory(const InventoryParams& p);
ModelCounts count_inventory(const InventoryParams& p);

/**
 * Machine replacement <w, t> with w in [0, n): keep degrades (stay 0.7,
 * down 0.3, floored at 0) via a probabilistic intent state, replace jumps
 * to w = n-1 at -replace_cost. Earning rate grows linearly in w. t = tm
 * absorbs. Core grid n * (tm+1).
 */
struct MachineParams {
    std::uint32_t n = 8;
    std::uint32_t tm = 8;
    double replace_cost = 0.02;
    double earn_slope = 0.04;
};
GameGraph gen_machine(const MachineParams& p);
ModelCounts count_machine(const MachineParams& p);

/**
 * Shared-channel protocol: n_comp computers each deliver up to M-1 packets.
 * A central scheduler picks idle, one sender, or a colliding pair; lone
 * sends deliver (+1 on the busy frame), collisions waste 1 or 2 frames
 * (uniform backoff via probabilistic states). Busy frames force idling.
 * States generated by reachability from the empty configuration; refuses
 * to materialize more than `cap` states.
 */
struct NetworkParams {
    std::uint32_t n_comp = 2;
    std::uint32_t packets_m = 2; // the M of the packet counters
    std::uint32_t t_max = 8;
    std::uint64_t cap = std::uint64_t{1} << 24;
};
GameGraph gen_network(const NetworkParams& p);

/// CLI entry: builds a model by name from string parameters
/// (unknown names or keys raise ParamError).
GameGraph generate_model(const std::string& name,
                         const std::map<std::string, std::string>& params,
                         std::uint64_t seed);

} // namespace mla
