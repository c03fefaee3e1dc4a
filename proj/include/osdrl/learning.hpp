#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "osdrl/distributions.hpp"
#include "osdrl/dp.hpp"
#include "osdrl/mdp.hpp"
#include "osdrl/operators.hpp"

namespace osdrl {

/// Step sizes alpha_t(x, a), either constant or c / (1 + visits(x, a))^omega.
/// The polynomial form with omega in (1/2, 1] satisfies the Robbins-Monro
/// conditions for every pair visited infinitely often.
class StepSizeSchedule {
public:
    static StepSizeSchedule constant(double alpha);
    static StepSizeSchedule polynomial(double c, double omega);

    /// Step size for an update of a pair that has been updated `visits` times
    /// before. Clipped to 1.
    double alpha(std::uint64_t visits) const;

    bool is_constant() const noexcept { return constant_; }
    double scale() const noexcept { return scale_; }
    double exponent() const noexcept { return exponent_; }

private:
    StepSizeSchedule(bool constant, double scale, double exponent)
        : constant_(constant), scale_(scale), exponent_(exponent) {}

    bool constant_;
    double scale_;
    double exponent_;
};

/// epsilon(t) = end + (start - end) exp(-rate t).
struct ExplorationSchedule {
    double start = 1.0;
    double end = 0.25;
    double rate = 0.0;

    /// Rate such that epsilon reaches `end + margin` at step `at_step`.
    static ExplorationSchedule reaching(double start, double end, double margin, double at_step);

    double epsilon(std::uint64_t t) const;
    void validate() const;
};

/// Learner target rule.
enum class Algorithm {
    one_step,  ///< projected Dirac at r + gamma * (mean continuation)
    cdrl,      ///< projected shifted atoms of the next-state distribution
};

const char* to_string(Algorithm algorithm);

struct LearnerState {
    CategoricalCollection eta;
    std::vector<std::uint64_t> visits;  ///< per (x, a)
    std::uint64_t step = 0;
    std::uint64_t range_violations = 0;

    /// All entries start at delta_{z_1}.
    static LearnerState initial(const Grid& grid, std::size_t n_states, std::size_t n_actions);
};

/// Continuation value used by the one-step target: sum_a pi(a|x') Q(x', a)
/// in evaluation, max_a Q(x', a) in control, zero when x' is terminal.
double continuation_value(const CategoricalCollection& eta, StateId next, const Mode& mode, bool terminal_next);

/// Sparse one-step target Pi_C(delta_{r + gamma V}); never touches more than
/// two cells, whatever the grid size.
ProjectedDirac os_cdrl_target(const CategoricalCollection& eta, const Transition& tr, double discount,
                              const Mode& mode, bool terminal_next);

/// Dense CDRL target Pi_C(sum_k p_k(x', a*) delta_{r + gamma z_k}), or the
/// pi-weighted mixture over a' in evaluation. Each shifted atom is placed by
/// binary search. Returns the number of shifted atoms that fell outside the
/// grid through `clamped`.
std::vector<double> cdrl_target(const CategoricalCollection& eta, const Transition& tr, double discount,
                                const Mode& mode, bool terminal_next, TieBreak rule = TieBreak::lowest_index,
                                Rng* rng = nullptr, std::size_t* clamped = nullptr);

/// One update of the one-step learner: eta(x_t, a_t) <- (1 - alpha) eta + alpha target.
/// Other entries are untouched; the pair's visit counter is incremented.
void os_cdrl_step(LearnerState& state, const Transition& tr, double discount, const Mode& mode, double alpha,
                  bool terminal_next = false);

/// One update of tabular CDRL with the same mixture rule.
void cdrl_step(LearnerState& state, const Transition& tr, double discount, const Mode& mode, double alpha,
               bool terminal_next = false, TieBreak rule = TieBreak::lowest_index, Rng* rng = nullptr);

/// Ties a learner state to an environment's discount and a schedule.
class Learner {
public:
    Learner(Grid grid, const TabularMdp& mdp, Algorithm algorithm, Mode mode, StepSizeSchedule schedule,
            TieBreak rule = TieBreak::lowest_index);

    /// Applies one update; returns the step size used.
    double update(const Transition& tr, bool terminal_next, Rng& rng);

    const LearnerState& state() const noexcept { return state_; }
    const Mode& mode() const noexcept { return mode_; }
    QFunction q_values() const { return means(state_.eta); }

private:
    LearnerState state_;
    double discount_;
    Algorithm algorithm_;
    Mode mode_;
    StepSizeSchedule schedule_;
    TieBreak rule_;
};

struct LearningConfig {
    Grid grid;
    Mode mode = Mode::control();
    Algorithm algorithm = Algorithm::one_step;
    StepSizeSchedule schedule = StepSizeSchedule::polynomial(1.0, 0.7);
    ExplorationSchedule exploration{};
    std::uint64_t n_steps = 100'000;
    std::uint64_t seed = 0;
    /// Record every `stride` steps (and after the final step).
    std::uint64_t stride = 1;
    TieBreak tie_break = TieBreak::lowest_index;
    std::optional<CategoricalCollection> reference{};  ///< eta_* or eta_pi
    std::optional<QFunction> q_reference{};            ///< Q* or Q^pi
    std::vector<std::pair<StateId, ActionId>> tracked{};  ///< pairs whose probabilities are logged
    bool record_q = false;                                 ///< keep the full mean-Q table in every row
};

struct LearningRow {
    std::uint64_t step = 0;
    double w1_to_reference = 0.0;  ///< NaN without a reference
    double q_error_sup = 0.0;      ///< NaN without a Q reference
    double q_error_sq = 0.0;       ///< squared L2 error, NaN without a Q reference
    std::uint64_t range_violations = 0;
    double epsilon = 0.0;
    double mean_alpha = 0.0;  ///< mean step size since the previous row
    std::vector<std::vector<double>> tracked_probs;  ///< one probability vector per tracked pair
    std::vector<double> q_values;                    ///< row-major mean Q, only with record_q
};

struct LearningRecord {
    std::uint64_t seed = 0;
    std::vector<LearningRow> rows;
    LearnerState final_state;
};

/// Runs the learner against the environment. Control follows epsilon-greedy
/// over mean-Q (lowest-index ties); evaluation follows the policy. Episodes
/// restart at the initial state once a terminal state is entered.
/// Deterministic in `config.seed`.
LearningRecord run_learning(const EpisodicEnv& env, const LearningConfig& config);

/// Runs one learner per seed in parallel; results are ordered by seed.
std::vector<LearningRecord> run_learning_seeds(const EpisodicEnv& env, const LearningConfig& config,
                                               const std::vector<std::uint64_t>& seeds);

struct TargetBenchmarkRow {
    std::size_t k = 0;
    double cdrl_median_ns = 0.0;
    double one_step_median_ns = 0.0;
    double ratio = 0.0;
    std::size_t one_step_max_cells = 0;  ///< most nonzero cells written by any one-step target
};

/// Wall time of CDRL vs one-step target construction on random inputs, per
/// grid size. K values must be increasing and >= 2.
std::vector<TargetBenchmarkRow> target_microbenchmark(const std::vector<std::size_t>& k_values, std::size_t n_reps,
                                                      std::uint64_t seed = 0);

}  // namespace osdrl
