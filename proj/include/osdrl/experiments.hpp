#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "osdrl/dp.hpp"
#include "osdrl/learning.hpp"
#include "osdrl/verify.hpp"

namespace osdrl {

/// Exit codes shared by every command.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitInconclusive = 3,
};

/// Invalid configuration; names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Command-line overrides; they take precedence over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed{};
    std::optional<std::uint64_t> steps{};
    std::optional<std::filesystem::path> out{};
};

// ---------------------------------------------------------------- instability

struct InstabilityConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out = "results";
    std::vector<double> grid{0.0, 1.9, 2.1, 10.0};
    ToyRewards rewards{};
    std::size_t iterations = 200;  ///< --steps
    std::size_t burn_in = 100;
    std::size_t one_step_horizon = 60;
    double one_step_tolerance = 1e-8;
    TieBreak tie_break = TieBreak::lowest_index;
    std::size_t search_budget = 1000;
    /// r_A is drawn from `search_lattice + 1` evenly spaced points of this
    /// range; r_B = r_A(default) + r_B(default) - r_A.
    std::pair<double, double> search_range{-1.0, 4.0};
    std::size_t search_lattice = 100;

    static InstabilityConfig from_json(const nlohmann::json& j, const Overrides& overrides = {});
};

struct SearchAttempt {
    std::size_t attempt = 0;  ///< 0 is the configured MDP
    ToyRewards rewards;
    OscillationReport report;
};

struct InstabilityResult {
    bool one_step_converged = false;
    double one_step_residual = 0.0;              ///< sup W_1 to Pi_C(nu_*) at the horizon
    std::optional<std::size_t> one_step_hit;     ///< first iteration within tolerance
    std::vector<double> one_step_x1a1;           ///< limit probabilities at (x1, a1)
    OscillationReport one_step_report;
    std::vector<SearchAttempt> attempts;         ///< default first, then the search
    std::optional<SearchAttempt> trigger;        ///< first non-convergent instance
    int exit_code = kExitOk;
};

InstabilityResult cmd_instability(const InstabilityConfig& config, std::ostream& log);

// ----------------------------------------------------------------- histograms

struct HistogramsConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out = "results";
    ToyRewards rewards{};
    std::vector<std::size_t> iterations{0, 2, 4};  ///< --steps N gives {0, N/2, N}
    std::size_t bins = 30;
    std::size_t atom_cap = kDefaultAtomCap;

    static HistogramsConfig from_json(const nlohmann::json& j, const Overrides& overrides = {});
};

struct AtomCounts {
    std::size_t j = 0;
    std::size_t full_total = 0;
    std::size_t full_max = 0;
    std::size_t one_step_total = 0;
    std::size_t one_step_max = 0;
};

struct HistogramsResult {
    std::vector<AtomCounts> counts;  ///< every j from 0 to the largest requested
    bool one_step_bounded = false;   ///< at most two atoms per entry throughout
    bool full_non_decreasing = false;
    std::optional<std::size_t> cap_exceeded_at;
    int exit_code = kExitOk;
};

HistogramsResult cmd_histograms(const HistogramsConfig& config, std::ostream& log);

// ----------------------------------------------------------------- frozenlake

struct FrozenLakeConfig {
    std::uint64_t seed = 0;  ///< seeds are seed, seed + 1, ...
    std::filesystem::path out = "results";
    bool slippery = true;
    double goal_reward = 20.0;
    double discount = 0.95;
    std::vector<double> grid{0.0, 10.0, 20.0};
    double alpha = 0.6;
    ExplorationSchedule exploration = ExplorationSchedule::reaching(1.0, 0.25, 0.01, 50'000.0);
    std::size_t seeds = 100;
    std::uint64_t steps = 100'000;  ///< --steps
    std::uint64_t stride = 100;
    std::size_t smoothing_window = 1000;  ///< in steps
    std::uint64_t early_step = 1000;
    std::vector<std::pair<StateId, ActionId>> tracked{{4, 2}, {10, 0}};

    static FrozenLakeConfig from_json(const nlohmann::json& j, const Overrides& overrides = {});
};

struct FrozenLakeResult {
    std::vector<std::uint64_t> steps;     ///< logged steps
    std::vector<double> mean_q_error;     ///< seed-averaged ||Q_t - Q*||_2^2
    std::vector<double> smoothed_q_error;
    std::vector<double> mean_q_distance;  ///< ||mean over seeds of Q_t - Q*||_2^2
    double early_q_error = 0.0;           ///< at config.early_step
    double final_q_error = 0.0;
    double early_mean_q_distance = 0.0;
    double final_mean_q_distance = 0.0;
    bool trend_ok = false;                ///< smoothed curve does not rise over the last 10%
    double max_normalization_error = 0.0; ///< over every logged probability vector
    std::size_t rows_per_pair = 0;
    int exit_code = kExitOk;
};

FrozenLakeResult cmd_frozenlake(const FrozenLakeConfig& config, std::ostream& log);

// --------------------------------------------------------------------- verify

struct VerifyConfig {
    std::filesystem::path out = "results";
    VerifyOptions options;

    static VerifyConfig from_json(const nlohmann::json& j, const Overrides& overrides = {});
};

struct VerifyResult {
    std::vector<PropertyResult> properties;
    int exit_code = kExitOk;
};

VerifyResult cmd_verify(const VerifyConfig& config, std::ostream& log);

/// Parses the config for `experiment` and runs it. Config errors are reported
/// on `log` and mapped to kExitConfig.
int run_experiment(const std::string& experiment, const nlohmann::json& config, const Overrides& overrides,
                   std::ostream& log);

}  // namespace osdrl
