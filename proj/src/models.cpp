#include "mla/models.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace mla {

using nlohmann::json;

namespace {

// Bounded draw independent of standard-library distribution internals, so
// fixed seeds reproduce bit-identical models everywhere.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

json locality_entry(std::initializer_list<std::pair<const char*, std::uint64_t>> bounds) {
    json j = json::object();
    for (auto& [name, b] : bounds) j[name] = b;
    return j;
}

} // namespace

// ---------------------------------------------------------------------------
// Planning

ModelCounts count_planning(const PlanningParams& p) {
    const std::uint64_t core = std::uint64_t{p.n} * p.n + 1;
    return {core, core};
}

GameGraph gen_planning(const PlanningParams& p) {
    if (p.n < 2) throw ParamError("planning: n must be >= 2");
    if (p.mines >= std::uint64_t{p.n} * p.n) throw ParamError("planning: too many mines");
    if (p.p_profile != "inverse_square" && p.p_profile != "step") {
        throw ParamError("planning: unknown p_profile '" + p.p_profile + "'");
    }
    const std::uint32_t n = p.n;
    const double p_max = 0.9;
    const int radius = p.p_profile == "step" ? 1 : 3;

    // Seeded distinct mine cells.
    std::mt19937_64 rng(p.seed);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> mines;
    {
        std::vector<char> taken(std::size_t{n} * n, 0);
        while (mines.size() < p.mines) {
            std::uint64_t cell = draw_below(rng, std::uint64_t{n} * n);
            if (taken[cell]) continue;
            taken[cell] = 1;
            mines.emplace_back(static_cast<std::uint32_t>(cell / n),
                               static_cast<std::uint32_t>(cell % n));
        }
        std::sort(mines.begin(), mines.end());
    }

    auto danger = [&](std::uint32_t x, std::uint32_t y) {
        double sum = 0.0;
        for (auto [mx, my] : mines) {
            const std::uint64_t d = (mx > x ? mx - x : x - mx) + (my > y ? my - y : y - my);
            if (d > static_cast<std::uint64_t>(radius)) continue;
            if (p.p_profile == "step") {
                sum += 0.5;
            } else {
                sum += 1.0 / ((1.0 + static_cast<double>(d)) * (1.0 + static_cast<double>(d)));
            }
        }
        return std::min(sum, p_max);
    };

    GameGraph::Builder b;
    b.reserve(std::size_t{n} * n + 1, std::size_t{n} * n * 4 + 1);
    b.set_schema(VariableSchema({{"sink", 2}, {"x", n}, {"y", n}}));
    const StateId sink = static_cast<StateId>(std::uint64_t{n} * n);
    auto cell_id = [&](std::uint32_t x, std::uint32_t y) {
        return static_cast<StateId>(std::uint64_t{x} * n + y);
    };
    for (std::uint32_t x = 0; x < n; ++x) {
        for (std::uint32_t y = 0; y < n; ++y) {
            const double pd = danger(x, y);
            // Sparse charge sites and free movement keep the value field
            // flat away from the charges (wandering and dying both settle
            // at zero), which is what lets value-based regions stay coarse.
            const bool chargeable = x % 64 == 0 && y % 64 == 0;
            const double reward = chargeable ? 0.25 : 0.0;
            const StateId s =
                b.add_state(pd > 0.0 ? StateKind::Probabilistic : StateKind::Player1, reward);
            b.set_assignment(s, {0, x, y});
            // Move targets; blocked border moves self-loop and merge.
            StateId t[4] = {x + 1 < n ? cell_id(x + 1, y) : s, x > 0 ? cell_id(x - 1, y) : s,
                            y + 1 < n ? cell_id(x, y + 1) : s, y > 0 ? cell_id(x, y - 1) : s};
            std::vector<std::pair<StateId, int>> targets; // target, direction count
            for (StateId ti : t) {
                auto it = std::find_if(targets.begin(), targets.end(),
                                       [&](auto& e) { return e.first == ti; });
                if (it == targets.end()) {
                    targets.emplace_back(ti, 1);
                } else {
                    ++it->second;
                }
            }
            if (pd > 0.0) {
                for (auto [ti, cnt] : targets) b.add_edge(s, ti, (1.0 - pd) * cnt / 4.0);
                b.add_edge(s, sink, pd);
            } else {
                for (auto [ti, cnt] : targets) b.add_edge(s, ti);
            }
        }
    }
    {
        const StateId s = b.add_state(StateKind::Player1, 0.0);
        b.set_assignment(s, {1, 0, 0});
        b.add_edge(s, s);
    }
    json meta;
    meta["generator"] = {
        {"model", "planning"},
        {"params", {{"n", p.n}, {"m", p.mines}, {"p_profile", p.p_profile}}},
        {"seed", p.seed},
        {"core_states", count_planning(p).core_states},
        {"total_states", count_planning(p).total_states},
        {"locality", locality_entry({{"sink", 1}, {"x", 1}, {"y", 1}})},
    };
    b.set_meta(meta.dump());
    return b.build();
}

// ---------------------------------------------------------------------------
// Inventory

namespace {
// Feasible sale range out of a post-decision stock.
std::pair<std::uint32_t, std::uint32_t> sale_range(const InventoryParams& p, std::uint32_t stock) {
    return {std::min(p.sold_min, stock), std::min(p.sold_max, stock)};
}
} // namespace

ModelCounts count_inventory(const InventoryParams& p) {
    if (p.sold_min > p.sold_max) throw ParamError("inventory: sold_min must be <= sold_max");
    if (p.sold_max > p.n_max) throw ParamError("inventory: sold_max must be <= n_max");
    const std::uint64_t stocks = std::uint64_t{p.n_max} + 1;
    const std::uint64_t core = stocks * (std::uint64_t{p.t_max} + 1);
    const std::uint64_t skip_choices = stocks * p.t_max;
    const std::uint64_t manu_choices =
        p.nc == 0 ? 0
                  : (std::uint64_t{p.n_max} - std::min(p.nc, p.n_max) + 1) * p.t_max;
    std::uint64_t sales_per_month = 0;
    for (std::uint32_t stock = 0; stock <= p.n_max; ++stock) {
        auto [lo, hi] = sale_range(p, stock);
        sales_per_month += hi - lo + 1;
    }
    return {core, core + skip_choices + manu_choices + sales_per_month * p.t_max};
}

GameGraph gen_inventory(const InventoryParams& p) {
    ModelCounts counts = count_inventory(p); // validates ranges
    const std::uint32_t nm = p.n_max, tm = p.t_max;

    GameGraph::Builder b;
    // Split-order layout: decision, production, and sale states separate
    // first (a region whose minimum is a committed sale state would feed
    // the next region's minimum through the same kind, telescoping a
    // worst-demand path), then the sale size, then months before stock
    // because values decay toward the horizon.
    b.set_schema(VariableSchema({{"phase", 4},
                                 {"sold", std::uint64_t{p.sold_max} + 1},
                                 {"t", std::uint64_t{tm} + 1},
                                 {"n", std::uint64_t{nm} + 1}}));
    auto core_id = [&](std::uint32_t stock_n, std::uint32_t t) {
        return static_cast<StateId>(std::uint64_t{stock_n} * (tm + 1) + t);
    };
    for (std::uint32_t stock_n = 0; stock_n <= nm; ++stock_n) {
        for (std::uint32_t t = 0; t <= tm; ++t) {
            StateId s = b.add_state(StateKind::Player1, 0.0);
            b.set_assignment(s, {0, 0, t, stock_n});
        }
    }
    // Choice states keyed by post-decision stock; shared across cores.
    std::map<std::tuple<std::uint32_t, std::uint32_t, bool>, StateId> choices;
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, StateId> sales;
    auto sale_state = [&](std::uint32_t sold, std::uint32_t left, std::uint32_t t1) {
        auto key = std::make_tuple(sold, left, t1);
        auto it = sales.find(key);
        if (it != sales.end()) return it->second;
        StateId s = b.add_state(StateKind::Player1, p.price * sold);
        b.set_assignment(s, {3, sold, t1, left});
        b.add_edge(s, core_id(left, t1));
        sales.emplace(key, s);
        return s;
    };
    auto choice_state = [&](std::uint32_t stock, std::uint32_t t, bool manufacture) {
        auto key = std::make_tuple(stock, t, manufacture);
        auto it = choices.find(key);
        if (it != choices.end()) return it->second;
        StateId s = b.add_state(StateKind::Probabilistic,
                                manufacture ? -p.cost * static_cast<double>(p.nc) : 0.0);
        b.set_assignment(s, {manufacture ? std::uint64_t{2} : std::uint64_t{1}, 0, t, stock});
        auto [lo, hi] = sale_range(p, stock);
        const double u = 1.0 / (hi - lo + 1);
        for (std::uint32_t sold = lo; sold <= hi; ++sold) {
            b.add_edge(s, sale_state(sold, stock - sold, t + 1), u);
        }
        choices.emplace(key, s);
        return s;
    };
    for (std::uint32_t stock_n = 0; stock_n <= nm; ++stock_n) {
        for (std::uint32_t t = 0; t <= tm; ++t) {
            const StateId s = core_id(stock_n, t);
            if (t == tm) {
                b.add_edge(s, s);
                continue;
            }
            b.add_edge(s, choice_state(stock_n, t, false));
            if (p.nc > 0) {
                const std::uint32_t after = std::min(stock_n + p.nc, nm);
                b.add_edge(s, choice_state(after, t, true));
            }
        }
    }
    json meta;
    meta["generator"] = {
        {"model", "inventory"},
        {"params",
         {{"n_max", nm},
          {"t_max", tm},
          {"nc", p.nc},
          {"sold_min", p.sold_min},
          {"sold_max", p.sold_max},
          {"price", p.price},
          {"cost", p.cost}}},
        {"seed", 0},
        {"core_states", counts.core_states},
        {"total_states", counts.total_states},
        {"locality", locality_entry({{"phase", 3},
                                     {"sold", p.sold_max},
                                     {"t", 1},
                                     {"n", std::max(p.sold_max, p.nc)}})},
    };
    b.set_meta(meta.dump());
    GameGraph g = b.build();
    if (g.num_states() != counts.total_states) {
        throw Error("inventory generator count mismatch"); // formula bug guard
    }
    return g;
}

// ---------------------------------------------------------------------------
// Machine replacement

ModelCounts count_machine(const MachineParams& p) {
    if (p.n < 2) throw ParamError("machine: n must be >= 2");
    if (p.tm < 1) throw ParamError("machine: tm must be >= 1");
    const std::uint64_t core = std::uint64_t{p.n} * (std::uint64_t{p.tm} + 1);
    const std::uint64_t keep_intents = std::uint64_t{p.n} * p.tm;
    const std::uint64_t replace_intents = p.tm;
    return {core, core + keep_intents + replace_intents};
}

GameGraph gen_machine(const MachineParams& p) {
    ModelCounts counts = count_machine(p);
    const std::uint32_t n = p.n, tm = p.tm;

    GameGraph::Builder b;
    // Encoding layout: the leading bit isolates the replace intents (their
    // values sit a cost-step off every working state, so they must be
    // separable immediately); the trailing bit distinguishes cores from
    // keep intents, which carry matching values and stay in one region so
    // the monthly keep loop iterates inside the magnified region.
    // Split-order layout. The leading bits isolate the replace intents and
    // separate decision states from committed keep draws: a region whose
    // minimum is a keep state would feed the next region's minimum through
    // its own kind again, telescoping an always-keep path that never sees
    // the replace option. With the kinds apart, reads land on decision
    // states and the bounds track the real dynamics. Months go before the
    // fine condition bits because values decay toward the horizon.
    const std::uint64_t wc_domain = (std::uint64_t{n} + 7) / 8;
    b.set_schema(VariableSchema({{"replacing", 2},
                                 {"stage", 2},
                                 {"wc", wc_domain},
                                 {"t", std::uint64_t{tm} + 1},
                                 {"wf", 8}}));
    auto core_id = [&](std::uint32_t w, std::uint32_t t) {
        return static_cast<StateId>(std::uint64_t{w} * (tm + 1) + t);
    };
    for (std::uint32_t w = 0; w < n; ++w) {
        for (std::uint32_t t = 0; t <= tm; ++t) {
            // Earning stops when the machine's lifetime ends at t = tm.
            const double earn = t == tm ? 0.0 : p.earn_slope * static_cast<double>(w) / (n - 1);
            StateId s = b.add_state(StateKind::Player1, earn);
            b.set_assignment(s, {0, 0, w / 8, t, w % 8});
        }
    }
    std::vector<StateId> replace_intent(tm);
    for (std::uint32_t t = 0; t < tm; ++t) {
        StateId s = b.add_state(StateKind::Player1, -p.replace_cost);
        b.set_assignment(s, {1, 0, 0, t, 0});
        b.add_edge(s, core_id(n - 1, t + 1));
        replace_intent[t] = s;
    }
    for (std::uint32_t w = 0; w < n; ++w) {
        for (std::uint32_t t = 0; t <= tm; ++t) {
            const StateId s = core_id(w, t);
            if (t == tm) {
                b.add_edge(s, s);
                continue;
            }
            // The machine keeps earning through the degradation draw, so
            // intent values track their cores and regions can hold both.
            StateId keep = b.add_state(StateKind::Probabilistic,
                                       p.earn_slope * static_cast<double>(w) / (n - 1));
            b.set_assignment(keep, {0, 1, w / 8, t, w % 8});
            if (w == 0) {
                b.add_edge(keep, core_id(0, t + 1), 1.0);
            } else {
                b.add_edge(keep, core_id(w, t + 1), 0.7);
                b.add_edge(keep, core_id(w - 1, t + 1), 0.3);
            }
            b.add_edge(s, keep);
            b.add_edge(s, replace_intent[t]);
        }
    }
    json meta;
    meta["generator"] = {
        {"model", "machine"},
        {"params",
         {{"n", n}, {"tm", tm}, {"replace_cost", p.replace_cost}, {"earn_slope", p.earn_slope}}},
        {"seed", 0},
        {"core_states", counts.core_states},
        {"total_states", counts.total_states},
        {"locality",
         locality_entry({{"replacing", 1},
                         {"stage", 1},
                         {"wc", (std::uint64_t{n} - 1) / 8},
                         {"t", 1},
                         {"wf", 7}})},
    };
    b.set_meta(meta.dump());
    GameGraph g = b.build();
    if (g.num_states() != counts.total_states) {
        throw Error("machine generator count mismatch");
    }
    return g;
}

// ---------------------------------------------------------------------------
// Network protocol

GameGraph gen_network(const NetworkParams& p) {
    if (p.n_comp < 1) throw ParamError("network: n_comp must be >= 1");
    if (p.packets_m < 1) throw ParamError("network: M must be >= 1");
    const std::uint32_t nc = p.n_comp, m = p.packets_m, tmax = p.t_max;
    {
        // Upper bound before materializing anything.
        double est = 2.0 * 2.0 * (static_cast<double>(tmax) + 1.0);
        for (std::uint32_t i = 0; i < nc; ++i) est *= static_cast<double>(m) + 1.0;
        if (est > static_cast<double>(p.cap)) {
            throw StateSpaceTooLargeError("network model would exceed the state cap");
        }
    }

    struct Key {
        std::vector<std::uint32_t> pk;
        std::uint32_t busy, t, phase;
        bool operator<(const Key& o) const {
            return std::tie(pk, busy, t, phase) < std::tie(o.pk, o.busy, o.t, o.phase);
        }
    };

    GameGraph::Builder b;
    std::vector<VariableSchema::Variable> vars;
    vars.push_back({"phase", 2});
    vars.push_back({"busy", 2});
    for (std::uint32_t i = 0; i < nc; ++i) {
        vars.push_back({"pk" + std::to_string(i + 1), std::uint64_t{m} + 1});
    }
    vars.push_back({"t", std::uint64_t{tmax} + 1});
    b.set_schema(VariableSchema(std::move(vars)));

    std::map<Key, StateId> ids;
    std::deque<Key> frontier;
    auto intern = [&](const Key& k) {
        auto it = ids.find(k);
        if (it != ids.end()) return it->second;
        // Busy frames are the delivery acknowledgements: reward one packet.
        const double reward = k.phase == 0 && k.busy == 1 ? 1.0 : 0.0;
        StateId s = b.add_state(k.phase == 1 ? StateKind::Probabilistic : StateKind::Player1,
                                reward);
        std::vector<std::uint64_t> assign;
        assign.push_back(k.phase);
        assign.push_back(k.busy);
        for (std::uint32_t v : k.pk) assign.push_back(v);
        assign.push_back(k.t);
        b.set_assignment(s, std::move(assign));
        ids.emplace(k, s);
        frontier.push_back(k);
        if (ids.size() > p.cap) {
            throw StateSpaceTooLargeError("network model exceeded the state cap");
        }
        return s;
    };

    Key init{std::vector<std::uint32_t>(nc, 0), 0, 0, 0};
    intern(init);
    while (!frontier.empty()) {
        Key k = std::move(frontier.front());
        frontier.pop_front();
        const StateId s = ids.at(k);
        if (k.phase == 1) {
            // Collision backoff: one or two wasted frames, equally likely.
            Key one{k.pk, 0, std::min(k.t + 1, tmax), 0};
            Key two{k.pk, 0, std::min(k.t + 2, tmax), 0};
            if (one.t == two.t) {
                b.add_edge(s, intern(one), 1.0);
            } else {
                b.add_edge(s, intern(one), 0.5);
                b.add_edge(s, intern(two), 0.5);
            }
            continue;
        }
        if (k.t == tmax) {
            b.add_edge(s, s);
            continue;
        }
        const std::uint32_t t1 = k.t + 1;
        b.add_edge(s, intern(Key{k.pk, 0, t1, 0})); // idle
        if (k.busy == 0) {
            std::vector<std::uint32_t> ready;
            for (std::uint32_t i = 0; i < nc; ++i) {
                if (k.pk[i] + 1 < m) ready.push_back(i); // M-1 packets each
            }
            for (std::uint32_t i : ready) {
                Key succ{k.pk, t1 == tmax ? 0u : 1u, t1, 0};
                succ.pk[i] += 1;
                b.add_edge(s, intern(succ));
            }
            // All colliding pairs lose their packets alike, so a single
            // collide choice into the shared backoff state covers them.
            if (ready.size() >= 2) {
                b.add_edge(s, intern(Key{k.pk, 0, k.t, 1}));
            }
        }
    }
    json meta;
    json loc = json::object();
    for (std::uint32_t i = 0; i < nc; ++i) loc["pk" + std::to_string(i + 1)] = 1;
    loc["busy"] = 1;
    loc["t"] = 2;
    loc["phase"] = 1;
    meta["generator"] = {
        {"model", "network"},
        {"params", {{"n_comp", nc}, {"M", m}, {"t_max", tmax}}},
        {"seed", 0},
        {"core_states", ids.size()},
        {"total_states", ids.size()},
        {"locality", loc},
    };
    b.set_meta(meta.dump());
    return b.build();
}

// ---------------------------------------------------------------------------
// CLI dispatch

namespace {

template <typename T>
T param_as(const std::map<std::string, std::string>& params, const std::string& key, T fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
        if constexpr (std::is_same_v<T, double>) {
            return std::stod(it->second);
        } else if constexpr (std::is_same_v<T, std::string>) {
            return it->second;
        } else {
            return static_cast<T>(std::stoull(it->second));
        }
    } catch (const std::exception&) {
        throw ParamError("malformed value for parameter '" + key + "'");
    }
}

void reject_unknown(const std::map<std::string, std::string>& params,
                    std::initializer_list<const char*> known) {
    for (const auto& [k, v] : params) {
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* s) { return k == s; }) == known.end()) {
            throw ParamError("unknown parameter '" + k + "'");
        }
    }
}

} // namespace

GameGraph generate_model(const std::string& name,
                         const std::map<std::string, std::string>& params, std::uint64_t seed) {
    if (name == "planning") {
        reject_unknown(params, {"n", "m", "p_profile"});
        PlanningParams p;
        p.n = param_as<std::uint32_t>(params, "n", p.n);
        p.mines = param_as<std::uint32_t>(params, "m", p.mines);
        p.p_profile = param_as<std::string>(params, "p_profile", p.p_profile);
        p.seed = seed;
        return gen_planning(p);
    }
    if (name == "inventory") {
        reject_unknown(params, {"n_max", "t_max", "nc", "sold_min", "sold_max", "price", "cost"});
        InventoryParams p;
        p.n_max = param_as<std::uint32_t>(params, "n_max", p.n_max);
        p.t_max = param_as<std::uint32_t>(params, "t_max", p.t_max);
        p.nc = param_as<std::uint32_t>(params, "nc", p.nc);
        p.sold_min = param_as<std::uint32_t>(params, "sold_min", p.sold_min);
        p.sold_max = param_as<std::uint32_t>(params, "sold_max", p.sold_max);
        p.price = param_as<double>(params, "price", p.price);
        p.cost = param_as<double>(params, "cost", p.cost);
        return gen_inventory(p);
    }
    if (name == "machine") {
        reject_unknown(params, {"n", "tm", "replace_cost", "earn_slope"});
        MachineParams p;
        p.n = param_as<std::uint32_t>(params, "n", p.n);
        p.tm = param_as<std::uint32_t>(params, "tm", p.tm);
        p.replace_cost = param_as<double>(params, "replace_cost", p.replace_cost);
        p.earn_slope = param_as<double>(params, "earn_slope", p.earn_slope);
        return gen_machine(p);
    }
    if (name == "network") {
        reject_unknown(params, {"n_comp", "M", "t_max"});
        NetworkParams p;
        p.n_comp = param_as<std::uint32_t>(params, "n_comp", p.n_comp);
        p.packets_m = param_as<std::uint32_t>(params, "M", p.packets_m);
        p.t_max = param_as<std::uint32_t>(params, "t_max", p.t_max);
        return gen_network(p);
    }
    throw ParamError("unknown model '" + name + "'");
}

} // namespace mla
