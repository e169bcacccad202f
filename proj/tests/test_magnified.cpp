#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mla/magnified.hpp"
#include "oracles.hpp"

using namespace mla;

namespace {

PartitionTree index_partition(const GameGraph& g, int depth) {
    return PartitionTree::initial_for(g, depth);
}

PartitionTree random_partition(std::mt19937_64& rng, const GameGraph& g) {
    auto sc = g.state_codes();
    PartitionTree t = PartitionTree::initial(
        sc.codes, sc.total_bits,
        static_cast<int>(oracles::below(rng, static_cast<std::uint64_t>(sc.total_bits) + 1)));
    if (t.max_region_size() > 1 && oracles::uniform01(rng) < 0.5) {
        auto lower = RegionValuation::constant(t.num_regions(), 0.0, BoundRole::Lower);
        auto upper = RegionValuation::constant(t.num_regions(), 0.0, BoundRole::Upper);
        for (RegionId x = 0; x < t.num_regions(); ++x) {
            upper[x] = oracles::uniform01(rng);
        }
        t = t.split_ratio(lower, upper, 0.01, oracles::uniform01(rng));
    }
    return t;
}

RegionValuation region_summary(const PartitionTree& t, const Valuation& v, HMode h) {
    RegionValuation u = RegionValuation::constant(
        t.num_regions(), h_identity(h), h == HMode::Max ? BoundRole::Upper : BoundRole::Lower);
    for (StateId s = 0; s < v.size(); ++s) {
        RegionId x = t.region_of(s);
        u[x] = h_fold(h, u[x], v[s]);
    }
    return u;
}

RegionLocalValues restrict_to(const PartitionTree& t, RegionId x, const Valuation& v) {
    RegionLocalValues out(t.states_of(x), 0.0);
    auto xs = t.states_of(x);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = v[xs[i]];
    return out;
}

} // namespace

TEST_CASE("the lens reads local values inside and summaries outside") {
    GameGraph::Builder b;
    for (int i = 0; i < 4; ++i) b.add_state(StateKind::Player1, 0.0);
    for (int i = 0; i < 4; ++i) b.add_edge(i, (i + 1) % 4);
    GameGraph g = b.build();
    // Two regions {0,1} and {2,3}.
    PartitionTree t = index_partition(g, 1);
    REQUIRE(t.num_regions() == 2);
    Valuation v = {0.0, 1.0, 5.0, 2.0};

    CHECK(g_aux(g, 0, HMode::Max, t, v, 1) == 1.0); // same region: direct read
    CHECK(g_aux(g, 0, HMode::Max, t, v, 2) == 5.0); // foreign region: max
    CHECK(g_aux(g, 0, HMode::Min, t, v, 2) == 2.0); // foreign region: min

    // Singleton partition: the lens is the identity regardless of h.
    PartitionTree fine = index_partition(g, 2);
    for (StateId s = 0; s < 4; ++s) {
        for (StateId q = 0; q < 4; ++q) {
            CHECK(g_aux(g, s, HMode::Max, fine, v, q) == v[q]);
            CHECK(g_aux(g, s, HMode::Min, fine, v, q) == v[q]);
        }
    }
}

TEST_CASE("mpre equals pre under the singleton partition") {
    std::mt19937_64 rng(21);
    oracles::RandomGameOptions opt;
    opt.w_p2 = 0.7;
    for (int it = 0; it < 50; ++it) {
        GameGraph g = oracles::random_game(rng, opt);
        auto sc = g.state_codes();
        PartitionTree t = PartitionTree::initial(sc.codes, sc.total_bits, sc.total_bits);
        Valuation v = oracles::random_valuation(rng, g.num_states(), -3.0, 3.0);
        Valuation p = pre(g, v);
        for (HMode h : {HMode::Max, HMode::Min}) {
            Valuation m = mpre(g, h, v, t);
            for (StateId s = 0; s < g.num_states(); ++s) {
                CHECK(m[s] == doctest::Approx(p[s]).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("mpre brackets pre pointwise") {
    std::mt19937_64 rng(22);
    oracles::RandomGameOptions opt;
    opt.w_p2 = 0.7;
    for (int it = 0; it < 1000; ++it) {
        GameGraph g = oracles::random_game(rng, opt);
        PartitionTree t = random_partition(rng, g);
        Valuation v = oracles::random_valuation(rng, g.num_states(), -4.0, 4.0);
        Valuation p = pre(g, v);
        Valuation hi = mpre(g, HMode::Max, v, t);
        Valuation lo = mpre(g, HMode::Min, v, t);
        for (StateId s = 0; s < g.num_states(); ++s) {
            CHECK(lo[s] <= p[s] + 1e-12);
            CHECK(p[s] <= hi[s] + 1e-12);
        }
    }
}

TEST_CASE("mpre is monotone and bound preserving") {
    std::mt19937_64 rng(23);
    oracles::RandomGameOptions opt;
    opt.w_p2 = 0.5;
    const double q = 4.0;
    for (int it = 0; it < 1000; ++it) {
        GameGraph g = oracles::random_game(rng, opt);
        PartitionTree t = random_partition(rng, g);
        Valuation v = oracles::random_valuation(rng, g.num_states(), -q, q);
        Valuation w = v;
        for (auto& x : w) x = std::min(x + oracles::uniform01(rng), q);
        for (HMode h : {HMode::Max, HMode::Min}) {
            Valuation mv = mpre(g, h, v, t);
            Valuation mw = mpre(g, h, w, t);
            for (StateId s = 0; s < g.num_states(); ++s) {
                CHECK(mv[s] <= mw[s] + 1e-12);
                CHECK(std::abs(mv[s]) <= q + 1e-12);
            }
        }
    }
}

TEST_CASE("refinement tightens summaries where region relations persist") {
    // Unrestricted pointwise tightening is false: splitting the home region
    // of s can turn a direct in-region read into a foreign summary, which
    // may grow the Max operator. Where every successor keeps its same- or
    // foreign-region relation to s, the h-sets only shrink and the
    // operators tighten.
    std::mt19937_64 rng(24);
    oracles::RandomGameOptions opt;
    opt.w_p2 = 0.4;
    int states_checked = 0;
    for (int it = 0; it < 200; ++it) {
        GameGraph g = oracles::random_game(rng, opt);
        auto sc = g.state_codes();
        PartitionTree coarse = PartitionTree::initial(sc.codes, sc.total_bits, 1);
        if (coarse.max_region_size() < 2) continue;
        auto lower = RegionValuation::constant(coarse.num_regions(), 0.0, BoundRole::Lower);
        auto upper = RegionValuation::constant(coarse.num_regions(), 1.0, BoundRole::Upper);
        PartitionTree finer = coarse.split_ratio(lower, upper, 0.1, 0.5);
        Valuation v = oracles::random_valuation(rng, g.num_states(), -4.0, 4.0);
        Valuation hc = mpre(g, HMode::Max, v, coarse);
        Valuation hf = mpre(g, HMode::Max, v, finer);
        Valuation lc = mpre(g, HMode::Min, v, coarse);
        Valuation lf = mpre(g, HMode::Min, v, finer);
        for (StateId s = 0; s < g.num_states(); ++s) {
            bool relations_persist = true;
            for (StateId t : g.successors(s)) {
                const bool same_coarse = coarse.region_of(t) == coarse.region_of(s);
                const bool same_fine = finer.region_of(t) == finer.region_of(s);
                if (same_coarse != same_fine) relations_persist = false;
            }
            if (!relations_persist) continue;
            ++states_checked;
            CHECK(hf[s] <= hc[s] + 1e-12);
            CHECK(lf[s] >= lc[s] - 1e-12);
        }
    }
    CHECK(states_checked > 500);
}

TEST_CASE("splitting the home region can grow the Max operator") {
    // The counterexample that rules out unrestricted tightening: state 0's
    // only successor sits in its own region and carries a low value; after
    // the split the successor lands beside a high-value state and is read
    // through that sibling region's max.
    GameGraph::Builder b;
    b.add_state(StateKind::Player1, 0.0); // code 0
    b.add_state(StateKind::Player1, 0.0); // code 2
    b.add_state(StateKind::Player1, 0.0); // code 3
    b.add_edge(0, 1);
    b.add_edge(1, 0);
    b.add_edge(2, 0);
    b.set_schema(VariableSchema({{"v", 4}}));
    b.set_assignment(0, {0});
    b.set_assignment(1, {2});
    b.set_assignment(2, {3});
    GameGraph g = b.build();
    auto sc = g.state_codes();
    PartitionTree coarse = PartitionTree::initial(sc.codes, sc.total_bits, 0);
    auto lower = RegionValuation::constant(1, 0.0, BoundRole::Lower);
    auto upper = RegionValuation::constant(1, 1.0, BoundRole::Upper);
    PartitionTree finer = coarse.split_all(lower, upper, 0.5).tree;
    REQUIRE(finer.num_regions() == 2);
    REQUIRE(finer.region_of(0) != finer.region_of(1));
    REQUIRE(finer.region_of(1) == finer.region_of(2));

    Valuation v = {0.0, -5.0, 7.0};
    CHECK(mpre(g, HMode::Max, v, coarse)[0] == -5.0); // direct in-region read
    CHECK(mpre(g, HMode::Max, v, finer)[0] == 7.0);   // sibling-region summary
}

TEST_CASE("the region lens matches the full lens given matching summaries") {
    std::mt19937_64 rng(25);
    oracles::RandomGameOptions opt;
    opt.w_p2 = 0.5;
    for (int it = 0; it < 300; ++it) {
        GameGraph g = oracles::random_game(rng, opt);
        PartitionTree t = random_partition(rng, g);
        Valuation v = oracles::random_valuation(rng, g.num_states(), -4.0, 4.0);
        for (HMode h : {HMode::Max, HMode::Min}) {
            RegionValuation u = region_summary(t, v, h);
            for (RegionId x = 0; x < t.num_regions(); ++x) {
                RegionLocalValues vx = restrict_to(t, x, v);
                StateId s = t.states_of(x)[0];
                for (StateId q = 0; q < g.num_states(); ++q) {
                    CHECK(ghat_aux(s, t, vx, u, q) ==
                          doctest::Approx(g_aux(g, s, h, t, v, q)).epsilon(1e-14));
                }
            }
        }
    }
}

TEST_CASE("mprex agrees with mpre on the region restriction") {
    std::mt19937_64 rng(26);
    oracles::RandomGameOptions opt;
    opt.w_p2 = 0.5;
    for (int it = 0; it < 1000; ++it) {
        GameGraph g = oracles::random_game(rng, opt);
        PartitionTree t = random_partition(rng, g);
        Valuation v = oracles::random_valuation(rng, g.num_states(), -4.0, 4.0);
        for (HMode h : {HMode::Max, HMode::Min}) {
            RegionValuation u = region_summary(t, v, h);
            Valuation full = mpre(g, h, v, t);
            for (RegionId x = 0; x < t.num_regions(); ++x) {
                RegionLocalValues vx = restrict_to(t, x, v);
                RegionLocalValues out = mprex(g, x, vx, t, u);
                auto xs = t.states_of(x);
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    CHECK(std::abs(out[i] - full[xs[i]]) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("a region without external edges ignores the region valuation") {
    GameGraph::Builder b;
    // Region {0,1} is a closed cycle; region {2,3} is separate.
    b.add_state(StateKind::Player1, 0.0);
    b.add_state(StateKind::Probabilistic, 0.0);
    b.add_state(StateKind::Player1, 0.0);
    b.add_state(StateKind::Player1, 0.0);
    b.add_edge(0, 1);
    b.add_edge(1, 0, 0.5);
    b.add_edge(1, 1, 0.5);
    b.add_edge(2, 3);
    b.add_edge(3, 2);
    GameGraph g = b.build();
    PartitionTree t = index_partition(g, 1);
    REQUIRE(t.num_regions() == 2);

    RegionLocalValues vx(t.states_of(0), 0.0);
    vx[0] = 2.0;
    vx[1] = 3.0;
    RegionValuation u1 = RegionValuation::constant(2, -100.0, BoundRole::Lower);
    RegionValuation u2 = RegionValuation::constant(2, 100.0, BoundRole::Lower);
    RegionLocalValues a = mprex(g, 0, vx, t, u1);
    RegionLocalValues bb = mprex(g, 0, vx, t, u2);
    CHECK(a[0] == bb[0]);
    CHECK(a[1] == bb[1]);
    CHECK(a[0] == 3.0);                 // player max over in-region successor
    CHECK(a[1] == 0.5 * 2.0 + 0.5 * 3.0);
}

TEST_CASE("a singleton region with external successors reads only the region values") {
    GameGraph::Builder b;
    b.add_state(StateKind::Player1, 0.0);
    b.add_state(StateKind::Player1, 0.0);
    b.add_state(StateKind::Player1, 0.0);
    b.add_edge(0, 1);
    b.add_edge(0, 2);
    b.add_edge(1, 0);
    b.add_edge(2, 0);
    GameGraph g = b.build();
    PartitionTree t = index_partition(g, 2);
    REQUIRE(t.num_regions() == 3);
    RegionId x0 = t.region_of(0);
    RegionLocalValues vx(t.states_of(x0), 7.0);
    RegionValuation u = RegionValuation::constant(3, 0.0, BoundRole::Upper);
    u[t.region_of(1)] = 4.0;
    u[t.region_of(2)] = 9.0;
    RegionLocalValues out = mprex(g, x0, vx, t, u);
    CHECK(out[0] == 9.0);
}

TEST_CASE("mprex checks the local valuation's coverage") {
    GameGraph::Builder b;
    b.add_state(StateKind::Player1, 0.0);
    b.add_state(StateKind::Player1, 0.0);
    b.add_edge(0, 1);
    b.add_edge(1, 0);
    GameGraph g = b.build();
    PartitionTree coarse = index_partition(g, 0);
    PartitionTree fine = index_partition(g, 1);
    RegionLocalValues wrong(fine.states_of(0), 0.0); // singleton local values
    RegionValuation u = RegionValuation::constant(1, 0.0, BoundRole::Lower);
    CHECK_THROWS_AS(mprex(g, 0, wrong, coarse, u), DimensionMismatchError);
    // ghat on a state the local valuation does not cover:
    CHECK_THROWS_AS(ghat_aux(0, coarse, wrong, u, 1), ForeignStateError);
}

TEST_CASE("resolved regions compute exactly what mprex computes") {
    std::mt19937_64 rng(27);
    oracles::RandomGameOptions opt;
    opt.w_p2 = 0.5;
    for (int it = 0; it < 200; ++it) {
        GameGraph g = oracles::random_game(rng, opt);
        PartitionTree t = random_partition(rng, g);
        Valuation v = oracles::random_valuation(rng, g.num_states(), -4.0, 4.0);
        RegionValuation u = region_summary(t, v, HMode::Max);
        for (RegionId x = 0; x < t.num_regions(); ++x) {
            ResolvedRegion rr = resolve_region(g, t, x);
            RegionLocalValues vx = restrict_to(t, x, v);
            for (std::size_t i = 0; i < rr.size(); ++i) {
                CHECK(resolved_update(rr, i, vx, u) ==
                      mprex_state(g, t, vx, u, rr.states[i]));
            }
        }
    }
}

TEST_CASE("region-local buffers are instrumented") {
    GameGraph::Builder b;
    b.add_state(StateKind::Player1, 0.0);
    b.add_state(StateKind::Player1, 0.0);
    b.add_edge(0, 1);
    b.add_edge(1, 0);
    GameGraph g = b.build();
    PartitionTree t = index_partition(g, 0);
    instrument::reset_peak();
    const long long before = instrument::live();
    {
        RegionLocalValues v(t.states_of(0), 0.0);
        CHECK(instrument::live() == before + 2);
    }
    CHECK(instrument::live() == before);
    CHECK(instrument::peak() >= before + 2);
}
