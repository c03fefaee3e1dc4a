#include "osdrl/mdp.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace osdrl {

namespace {

constexpr double kRowTolerance = 1e-12;

void check_distribution_row(std::span<const double> row, const std::string& what) {
    double total = 0.0;
    for (double p : row) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw std::invalid_argument(what + ": entry outside [0, 1]");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kRowTolerance) {
        throw std::invalid_argument(what + ": row does not sum to 1 (sum = " +
                                    std::to_string(total) + ")");
    }
}

}  // namespace

TabularMdp::TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> kernel,
                       std::vector<double> reward, double discount)
    : n_states_(n_states),
      n_actions_(n_actions),
      kernel_(std::move(kernel)),
      reward_(std::move(reward)),
      discount_(discount) {
    if (n_states_ == 0 || n_actions_ == 0) {
        throw std::invalid_argument("TabularMdp: n_states and n_actions must be positive");
    }
    if (!(discount_ >= 0.0 && discount_ < 1.0)) {
        throw std::invalid_argument("TabularMdp: discount must lie in [0, 1), got " +
                                    std::to_string(discount_));
    }
    const std::size_t expected = n_states_ * n_actions_ * n_states_;
    if (kernel_.size() != expected || reward_.size() != expected) {
        throw std::invalid_argument("TabularMdp: kernel and reward need n_states*n_actions*n_states entries");
    }
    for (double r : reward_) {
        if (!std::isfinite(r)) throw std::invalid_argument("TabularMdp: non-finite reward");
    }
    for (StateId x = 0; x < n_states_; ++x) {
        for (ActionId a = 0; a < n_actions_; ++a) {
            check_distribution_row(kernel_row(x, a), "TabularMdp kernel (" + std::to_string(x) +
                                                         ", " + std::to_string(a) + ")");
        }
    }
}

std::size_t TabularMdp::index(StateId x, ActionId a, StateId next) const {
    if (x >= n_states_ || next >= n_states_) throw std::out_of_range("TabularMdp: state id out of range");
    if (a >= n_actions_) throw std::out_of_range("TabularMdp: action id out of range");
    return (x * n_actions_ + a) * n_states_ + next;
}

double TabularMdp::prob(StateId x, ActionId a, StateId next) const { return kernel_[index(x, a, next)]; }

double TabularMdp::reward(StateId x, ActionId a, StateId next) const { return reward_[index(x, a, next)]; }

std::span<const double> TabularMdp::kernel_row(StateId x, ActionId a) const {
    return {kernel_.data() + index(x, a, 0), n_states_};
}

std::span<const double> TabularMdp::reward_row(StateId x, ActionId a) const {
    return {reward_.data() + index(x, a, 0), n_states_};
}

TabularMdp TabularMdp::with_discount(double discount) const {
    return TabularMdp(n_states_, n_actions_, kernel_, reward_, discount);
}

nlohmann::json TabularMdp::to_json() const {
    nlohmann::json kernel = nlohmann::json::array();
    nlohmann::json reward = nlohmann::json::array();
    for (StateId x = 0; x < n_states_; ++x) {
        nlohmann::json krow = nlohmann::json::array();
        nlohmann::json rrow = nlohmann::json::array();
        for (ActionId a = 0; a < n_actions_; ++a) {
            auto k = kernel_row(x, a);
            auto r = reward_row(x, a);
            krow.push_back(std::vector<double>(k.begin(), k.end()));
            rrow.push_back(std::vector<double>(r.begin(), r.end()));
        }
        kernel.push_back(std::move(krow));
        reward.push_back(std::move(rrow));
    }
    return {{"n_states", n_states_},
            {"n_actions", n_actions_},
            {"discount", discount_},
            {"kernel", std::move(kernel)},
            {"reward", std::move(reward)}};
}

TabularMdp TabularMdp::from_json(const nlohmann::json& doc) {
    const auto n_states = doc.at("n_states").get<std::size_t>();
    const auto n_actions = doc.at("n_actions").get<std::size_t>();
    const auto discount = doc.at("discount").get<double>();
    std::vector<double> kernel;
    std::vector<double> reward;
    kernel.reserve(n_states * n_actions * n_states);
    reward.reserve(n_states * n_actions * n_states);
    auto flatten = [&](const nlohmann::json& cube, std::vector<double>& out, const char* name) {
        if (!cube.is_array() || cube.size() != n_states) {
            throw std::invalid_argument(std::string("TabularMdp JSON: '") + name + "' has wrong shape");
        }
        for (const auto& plane : cube) {
            if (!plane.is_array() || plane.size() != n_actions) {
                throw std::invalid_argument(std::string("TabularMdp JSON: '") + name + "' has wrong shape");
            }
            for (const auto& row : plane) {
                if (!row.is_array() || row.size() != n_states) {
                    throw std::invalid_argument(std::string("TabularMdp JSON: '") + name + "' has wrong shape");
                }
                for (const auto& v : row) out.push_back(v.get<double>());
            }
        }
    };
    flatten(doc.at("kernel"), kernel, "kernel");
    flatten(doc.at("reward"), reward, "reward");
    return TabularMdp(n_states, n_actions, std::move(kernel), std::move(reward), discount);
}

Policy::Policy(std::size_t n_states, std::size_t n_actions, std::vector<double> probs)
    : n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
    if (n_states_ == 0 || n_actions_ == 0) throw std::invalid_argument("Policy: empty shape");
    if (probs_.size() != n_states_ * n_actions_) throw std::invalid_argument("Policy: wrong number of entries");
    for (StateId x = 0; x < n_states_; ++x) check_distribution_row(row(x), "Policy row " + std::to_string(x));
}

Policy Policy::uniform(std::size_t n_states, std::size_t n_actions) {
    return Policy(n_states, n_actions,
                  std::vector<double>(n_states * n_actions, 1.0 / static_cast<double>(n_actions)));
}

Policy Policy::deterministic(std::size_t n_actions, const std::vector<ActionId>& choice) {
    std::vector<double> probs(choice.size() * n_actions, 0.0);
    for (std::size_t x = 0; x < choice.size(); ++x) {
        if (choice[x] >= n_actions) throw std::out_of_range("Policy: action id out of range");
        probs[x * n_actions + choice[x]] = 1.0;
    }
    return Policy(choice.size(), n_actions, std::move(probs));
}

Policy Policy::random(std::size_t n_states, std::size_t n_actions, Rng& rng) {
    std::vector<double> probs;
    probs.reserve(n_states * n_actions);
    for (StateId x = 0; x < n_states; ++x) {
        auto row = random_simplex(rng, n_actions);
        probs.insert(probs.end(), row.begin(), row.end());
    }
    return Policy(n_states, n_actions, std::move(probs));
}

double Policy::prob(StateId x, ActionId a) const {
    if (x >= n_states_ || a >= n_actions_) throw std::out_of_range("Policy: id out of range");
    return probs_[x * n_actions_ + a];
}

std::span<const double> Policy::row(StateId x) const {
    if (x >= n_states_) throw std::out_of_range("Policy: state id out of range");
    return {probs_.data() + x * n_actions_, n_actions_};
}

namespace {

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last_positive = i;
        if (u < acc) return i;
    }
    return last_positive;
}

}  // namespace

ActionId Policy::sample(StateId x, Rng& rng) const { return sample_index(row(x), rng); }

Transition sample_step(const TabularMdp& mdp, StateId state, ActionId action, Rng& rng) {
    if (state >= mdp.n_states()) throw std::out_of_range("sample_step: state id out of range");
    if (action >= mdp.n_actions()) throw std::out_of_range("sample_step: action id out of range");
    const StateId next = sample_index(mdp.kernel_row(state, action), rng);
    return {state, action, mdp.reward(state, action, next), next};
}

Transition sample_step(const EpisodicEnv& env, StateId state, ActionId action, Rng& rng) {
    return sample_step(env.mdp, state, action, rng);
}

TabularMdp make_toy_mdp(const ToyRewards& rewards) {
    constexpr std::size_t n = 2;
    std::vector<double> kernel(n * 2 * n, 0.0);
    std::vector<double> reward(n * 2 * n, 0.0);
    auto at = [](StateId x, ActionId a, StateId y) { return (x * 2 + a) * n + y; };
    // x1 = 0, x2 = 1, a1 = 0, a2 = 1.
    kernel[at(0, 0, 1)] = 1.0;
    reward[at(0, 0, 1)] = 2.0;
    kernel[at(0, 1, 1)] = 0.5;
    reward[at(0, 1, 1)] = rewards.to_absorbing;
    kernel[at(0, 1, 0)] = 0.5;
    reward[at(0, 1, 0)] = rewards.to_self;
    kernel[at(1, 0, 1)] = 1.0;
    kernel[at(1, 1, 1)] = 1.0;
    return TabularMdp(n, 2, std::move(kernel), std::move(reward), 0.5);
}

EpisodicEnv make_toy_env(const ToyRewards& rewards) {
    return EpisodicEnv{make_toy_mdp(rewards), {false, true}, 0};
}

EpisodicEnv make_frozen_lake(bool slippery, double goal_reward, double discount) {
    if (!(goal_reward > 0.0)) throw std::invalid_argument("make_frozen_lake: goal_reward must be positive");
    static constexpr std::array<const char*, 4> kMap = {"SFFF", "FHFH", "FFFH", "HFFG"};
    constexpr std::size_t side = 4;
    constexpr std::size_t n = side * side;
    constexpr std::size_t n_actions = 4;

    auto cell = [](std::size_t s) { return kMap[s / side][s % side]; };
    auto move = [](std::size_t s, std::size_t dir) {
        std::size_t row = s / side;
        std::size_t col = s % side;
        switch (static_cast<LakeAction>(dir)) {
            case LakeAction::left: col = col > 0 ? col - 1 : col; break;
            case LakeAction::down: row = row + 1 < side ? row + 1 : row; break;
            case LakeAction::right: col = col + 1 < side ? col + 1 : col; break;
            case LakeAction::up: row = row > 0 ? row - 1 : row; break;
        }
        return row * side + col;
    };

    std::vector<double> kernel(n * n_actions * n, 0.0);
    std::vector<double> reward(n * n_actions * n, 0.0);
    std::vector<bool> terminal(n, false);
    for (std::size_t s = 0; s < n; ++s) terminal[s] = cell(s) == 'H' || cell(s) == 'G';

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            const std::size_t base = (s * n_actions + a) * n;
            if (terminal[s]) {
                kernel[base + s] = 1.0;
                continue;
            }
            std::vector<std::size_t> dirs;
            if (slippery) {
                dirs = {(a + 3) % 4, a, (a + 1) % 4};
            } else {
                dirs = {a};
            }
            const double p = 1.0 / static_cast<double>(dirs.size());
            for (std::size_t d : dirs) {
                const std::size_t next = move(s, d);
                kernel[base + next] += p;
                if (cell(next) == 'G') reward[base + next] = goal_reward;
            }
        }
    }
    return EpisodicEnv{TabularMdp(n, n_actions, std::move(kernel), std::move(reward), discount),
                       std::move(terminal), 0};
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> out(n);
    double total = 0.0;
    for (auto& v : out) {
        v = expo(rng);
        total += v;
    }
    for (auto& v : out) v /= total;
    return out;
}

TabularMdp random_mdp(Rng& rng, std::size_t n_states, std::size_t n_actions, double discount) {
    std::uniform_real_distribution<double> reward_dist(-1.0, 1.0);
    std::vector<double> kernel;
    std::vector<double> reward;
    kernel.reserve(n_states * n_actions * n_states);
    reward.reserve(n_states * n_actions * n_states);
    for (std::size_t row = 0; row < n_states * n_actions; ++row) {
        auto probs = random_simplex(rng, n_states);
        kernel.insert(kernel.end(), probs.begin(), probs.end());
        for (std::size_t y = 0; y < n_states; ++y) reward.push_back(reward_dist(rng));
    }
    return TabularMdp(n_states, n_actions, std::move(kernel), std::move(reward), discount);
}

TabularMdp random_mdp(Rng& rng, std::size_t n_states, std::size_t n_actions) {
    std::bernoulli_distribution coin(0.5);
    const double discount = coin(rng) ? 0.5 : 0.9;
    return random_mdp(rng, n_states, n_actions, discount);
}

}  // namespace osdrl
