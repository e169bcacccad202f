#pragma once

// Independent reference computations for the test suites: dense linear
// solves, pure-memoryless strategy enumeration, Markov-chain gain analysis,
// subset end-component enumeration, and seeded random model generators.
// Everything here is deliberately brute force and shares no code with the
// solvers it checks.

#include <functional>
#include <random>
#include <vector>

#include "mla/game.hpp"
#include "mla/longrun.hpp"

namespace oracles {

using mla::GameGraph;
using mla::Player;
using mla::StateId;
using mla::StateKind;
using mla::Valuation;

/// Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b);

/// Markov chain induced by fixing one successor per controlled state.
struct Chain {
    std::vector<std::vector<std::pair<StateId, double>>> rows;
    std::vector<double> rewards;
};
Chain induce_chain(const GameGraph& g, const std::vector<StateId>& choice);

/// Discounted chain value by solving (I - beta P) v = (1-beta) r.
Valuation chain_discounted(const Chain& chain, double beta);

/// Long-run average reward per start state: stationary gain of each
/// recurrent class, absorption-weighted for transient states.
Valuation chain_gain(const Chain& chain);

/// Visits every pure memoryless choice of the given owners. `choice` maps
/// every state to a successor index in the graph's edge order (only
/// controlled states matter).
void for_each_profile(const GameGraph& g, const std::vector<StateId>& controlled,
                      std::vector<StateId>& choice,
                      const std::function<void(const std::vector<StateId>&)>& fn);

std::vector<StateId> states_of_kind(const GameGraph& g, StateKind kind);

/// Discounted values by strategy enumeration (max over player 1, min over
/// player 2); small graphs only.
Valuation brute_discounted(const GameGraph& g, double beta);

/// Long-run average values by strategy enumeration.
Valuation brute_gain(const GameGraph& g);

/// Positive-probability reachability of t under [exists own strategy,
/// for all opponent strategies], by enumerating both sides.
std::vector<StateId> brute_positive_reach(const GameGraph& g, Player player, StateId t);

/// Maximal end components by subset enumeration (MDPs, <= ~15 states).
std::vector<std::vector<StateId>> brute_mecs(const GameGraph& g);

// --- seeded random models -------------------------------------------------

double uniform01(std::mt19937_64& rng);
std::uint64_t below(std::mt19937_64& rng, std::uint64_t bound);

struct RandomGameOptions {
    std::size_t min_states = 5;
    std::size_t max_states = 10;
    int max_out_degree = 3;
    // kind weights; players absent from a model get weight 0
    double w_p1 = 1.0, w_p2 = 0.0, w_prob = 1.0;
    double reward_lo = 0.0, reward_hi = 10.0;
    bool strongly_connected = false;
    bool allow_self_loops = true;
};

GameGraph random_game(std::mt19937_64& rng, const RandomGameOptions& opt);

Valuation random_valuation(std::mt19937_64& rng, std::size_t n, double lo, double hi);

/// MDP with several end components by construction: small strongly
/// connected blocks reached through an acyclic transient layer.
GameGraph multi_mec_mdp(std::mt19937_64& rng);

/// Strongly connected game with forced player moves and free probabilistic
/// branching; every strategy induces one strongly connected chain, so the
/// uniform-value certificate holds.
GameGraph forced_move_game(std::mt19937_64& rng, std::size_t min_states,
                           std::size_t max_states);

} // namespace oracles
