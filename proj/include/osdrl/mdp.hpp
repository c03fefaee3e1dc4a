#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

namespace osdrl {

using StateId = std::size_t;
using ActionId = std::size_t;

/// Random stream owned by a single run. std::mt19937_64 is fully specified by
/// the standard, so seeded runs are reproducible.
using Rng = std::mt19937_64;

/// Finite discounted MDP (X, A, P, r, gamma). Kernel and reward are stored
/// row-major over (x, a, x'). Immutable after construction.
class TabularMdp {
public:
    TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> kernel,
               std::vector<double> reward, double discount);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t n_pairs() const noexcept { return n_states_ * n_actions_; }
    double discount() const noexcept { return discount_; }

    double prob(StateId x, ActionId a, StateId next) const;
    double reward(StateId x, ActionId a, StateId next) const;

    /// P(. | x, a) and r(x, a, .) as contiguous rows of length n_states().
    std::span<const double> kernel_row(StateId x, ActionId a) const;
    std::span<const double> reward_row(StateId x, ActionId a) const;

    /// Same transitions and rewards with another discount factor.
    TabularMdp with_discount(double discount) const;

    nlohmann::json to_json() const;
    static TabularMdp from_json(const nlohmann::json& doc);

private:
    std::size_t index(StateId x, ActionId a, StateId next) const;

    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> kernel_;
    std::vector<double> reward_;
    double discount_;
};

/// Stochastic policy pi(a | x).
class Policy {
public:
    Policy(std::size_t n_states, std::size_t n_actions, std::vector<double> probs);

    static Policy uniform(std::size_t n_states, std::size_t n_actions);
    static Policy deterministic(std::size_t n_actions, const std::vector<ActionId>& choice);
    /// Each row drawn from Dirichlet(1, ..., 1).
    static Policy random(std::size_t n_states, std::size_t n_actions, Rng& rng);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    double prob(StateId x, ActionId a) const;
    std::span<const double> row(StateId x) const;

    ActionId sample(StateId x, Rng& rng) const;

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> probs_;
};

struct Transition {
    StateId state = 0;
    ActionId action = 0;
    double reward = 0.0;
    StateId next_state = 0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Episodic view of an MDP. Terminal states are absorbing with zero reward in
/// `mdp`, so operators can treat episodic and continuing tasks alike.
struct EpisodicEnv {
    TabularMdp mdp;
    std::vector<bool> terminal;
    StateId initial_state = 0;

    bool is_terminal(StateId x) const { return terminal.at(x); }
};

Transition sample_step(const TabularMdp& mdp, StateId state, ActionId action, Rng& rng);
Transition sample_step(const EpisodicEnv& env, StateId state, ActionId action, Rng& rng);

/// Rewards of action a2 in the toy MDP: going to the absorbing state x2 or
/// staying in x1. Every policy stays optimal as long as they sum to 3.
struct ToyRewards {
    double to_absorbing = 0.0;
    double to_self = 3.0;
};

/// Two states {x1, x2}, two actions {a1, a2}, gamma = 1/2. x2 absorbing with
/// zero reward. From x1: a1 -> x2 with reward 2; a2 -> x2 (reward 0) or x1
/// (reward 3) with probability 1/2 each. Q*(x1, .) = 2, so all policies are
/// optimal.
TabularMdp make_toy_mdp(const ToyRewards& rewards = {});

/// Toy MDP with x2 terminal and episodes starting in x1.
EpisodicEnv make_toy_env(const ToyRewards& rewards = {});

enum class LakeAction : ActionId { left = 0, down = 1, right = 2, up = 3 };

/// 4x4 Frozen Lake, map "SFFF/FHFH/FFFH/HFFG". Slippery moves go in the
/// intended or either perpendicular direction with probability 1/3 each.
/// Holes and goal are terminal; goal_reward is paid on entering the goal.
EpisodicEnv make_frozen_lake(bool slippery = true, double goal_reward = 20.0,
                             double discount = 0.95);

/// Random MDP for property suites: Dirichlet(1, ..., 1) kernel rows and
/// rewards uniform on [-1, 1].
TabularMdp random_mdp(Rng& rng, std::size_t n_states, std::size_t n_actions, double discount);
/// As above with gamma drawn from {0.5, 0.9}.
TabularMdp random_mdp(Rng& rng, std::size_t n_states, std::size_t n_actions);

/// Point on the probability simplex drawn from Dirichlet(1, ..., 1).
std::vector<double> random_simplex(Rng& rng, std::size_t n);

}  // namespace osdrl
