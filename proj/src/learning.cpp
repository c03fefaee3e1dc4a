#include "osdrl/learning.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <optional>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace osdrl {

StepSizeSchedule StepSizeSchedule::constant(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("StepSizeSchedule: constant alpha must lie in (0, 1]");
    return StepSizeSchedule(true, alpha, 0.0);
}

StepSizeSchedule StepSizeSchedule::polynomial(double c, double omega) {
    if (!(c > 0.0)) throw std::invalid_argument("StepSizeSchedule: c must be positive");
    if (!(omega > 0.5 && omega <= 1.0)) throw std::invalid_argument("StepSizeSchedule: omega must lie in (0.5, 1]");
    return StepSizeSchedule(false, c, omega);
}

double StepSizeSchedule::alpha(std::uint64_t visits) const {
    if (constant_) return scale_;
    return std::min(1.0, scale_ / std::pow(1.0 + static_cast<double>(visits), exponent_));
}

ExplorationSchedule ExplorationSchedule::reaching(double start, double end, double margin, double at_step) {
    if (!(margin > 0.0) || !(at_step > 0.0) || !(start > end + margin)) {
        throw std::invalid_argument("ExplorationSchedule::reaching: need start > end + margin > end and at_step > 0");
    }
    ExplorationSchedule s{start, end, std::log((start - end) / margin) / at_step};
    s.validate();
    return s;
}

double ExplorationSchedule::epsilon(std::uint64_t t) const {
    return end + (start - end) * std::exp(-rate * static_cast<double>(t));
}

void ExplorationSchedule::validate() const {
    if (!(start >= 0.0 && start <= 1.0 && end >= 0.0 && end <= 1.0)) {
        throw std::invalid_argument("ExplorationSchedule: epsilon bounds must lie in [0, 1]");
    }
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::invalid_argument("ExplorationSchedule: rate must be >= 0");
}

const char* to_string(Algorithm algorithm) {
    return algorithm == Algorithm::one_step ? "os-cdrl" : "cdrl";
}

LearnerState LearnerState::initial(const Grid& grid, std::size_t n_states, std::size_t n_actions) {
    return {CategoricalCollection::filled(n_states, n_actions, CategoricalDistribution::unit(grid, 0)),
            std::vector<std::uint64_t>(n_states * n_actions, 0), 0, 0};
}

double continuation_value(const CategoricalCollection& eta, StateId next, const Mode& mode, bool terminal_next) {
    if (terminal_next) return 0.0;
    if (mode.is_control()) {
        double best = -std::numeric_limits<double>::infinity();
        for (ActionId a = 0; a < eta.n_actions(); ++a) best = std::max(best, eta.at(next, a).mean());
        return best;
    }
    double v = 0.0;
    for (ActionId a = 0; a < eta.n_actions(); ++a) v += mode.policy().prob(next, a) * eta.at(next, a).mean();
    return v;
}

ProjectedDirac os_cdrl_target(const CategoricalCollection& eta, const Transition& tr, double discount,
                              const Mode& mode, bool terminal_next) {
    const double v = continuation_value(eta, tr.next_state, mode, terminal_next);
    return project_dirac(tr.reward + discount * v, eta[0].grid());
}

namespace {

void add_shifted(std::span<const double> probs, double weight, double reward, double discount, const Grid& grid,
                 std::vector<double>& out, std::size_t& clamped) {
    for (std::size_t k = 0; k < probs.size(); ++k) {
        const double p = probs[k] * weight;
        if (p == 0.0) continue;
        const auto cell = project_dirac(reward + discount * grid[k], grid);
        if (cell.clamped) ++clamped;
        out[cell.lower] += p * cell.lower_weight;
        out[cell.upper] += p * cell.upper_weight;
    }
}

std::size_t cells_written(const ProjectedDirac& cell) {
    std::size_t n = cell.lower_weight > 0.0 ? 1 : 0;
    if (cell.upper_weight > 0.0 && cell.upper != cell.lower) ++n;
    return n;
}

}  // namespace

std::vector<double> cdrl_target(const CategoricalCollection& eta, const Transition& tr, double discount,
                                const Mode& mode, bool terminal_next, TieBreak rule, Rng* rng,
                                std::size_t* clamped) {
    const Grid& grid = eta[0].grid();
    std::vector<double> out(grid.size(), 0.0);
    std::size_t n_clamped = 0;
    if (terminal_next) {
        const auto cell = project_dirac(tr.reward, grid);
        n_clamped += cell.clamped ? 1 : 0;
        out[cell.lower] += cell.lower_weight;
        out[cell.upper] += cell.upper_weight;
    } else if (mode.is_control()) {
        std::vector<double> q(eta.n_actions());
        for (ActionId a = 0; a < eta.n_actions(); ++a) q[a] = eta.at(tr.next_state, a).mean();
        const ActionId best = greedy_action(q, rule, rng);
        if (rule == TieBreak::uniform_mix) {
            const double top = q[best];
            const auto n_ties = static_cast<double>(std::count(q.begin(), q.end(), top));
            for (ActionId a = 0; a < eta.n_actions(); ++a) {
                if (q[a] == top) add_shifted(eta.at(tr.next_state, a).probs(), 1.0 / n_ties, tr.reward, discount, grid, out, n_clamped);
            }
        } else {
            add_shifted(eta.at(tr.next_state, best).probs(), 1.0, tr.reward, discount, grid, out, n_clamped);
        }
    } else {
        for (ActionId a = 0; a < eta.n_actions(); ++a) {
            const double w = mode.policy().prob(tr.next_state, a);
            if (w > 0.0) add_shifted(eta.at(tr.next_state, a).probs(), w, tr.reward, discount, grid, out, n_clamped);
        }
    }
    if (clamped != nullptr) *clamped = n_clamped;
    return out;
}

namespace {

void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("learner step: alpha must lie in [0, 1]");
}

std::size_t pair_index(const LearnerState& state, const Transition& tr) {
    if (tr.state >= state.eta.n_states() || tr.next_state >= state.eta.n_states() ||
        tr.action >= state.eta.n_actions()) {
        throw std::out_of_range("learner step: transition ids out of range");
    }
    return tr.state * state.eta.n_actions() + tr.action;
}

}  // namespace

void os_cdrl_step(LearnerState& state, const Transition& tr, double discount, const Mode& mode, double alpha,
                  bool terminal_next) {
    check_alpha(alpha);
    const std::size_t idx = pair_index(state, tr);
    const auto target = os_cdrl_target(state.eta, tr, discount, mode, terminal_next);
    if (target.clamped) ++state.range_violations;
    auto probs = state.eta[idx].mutable_probs();
    for (double& p : probs) p *= 1.0 - alpha;
    probs[target.lower] += alpha * target.lower_weight;
    probs[target.upper] += alpha * target.upper_weight;
    ++state.visits[idx];
    ++state.step;
}

void cdrl_step(LearnerState& state, const Transition& tr, double discount, const Mode& mode, double alpha,
               bool terminal_next, TieBreak rule, Rng* rng) {
    check_alpha(alpha);
    const std::size_t idx = pair_index(state, tr);
    std::size_t clamped = 0;
    const auto target = cdrl_target(state.eta, tr, discount, mode, terminal_next, rule, rng, &clamped);
    if (clamped > 0) ++state.range_violations;
    auto probs = state.eta[idx].mutable_probs();
    for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = (1.0 - alpha) * probs[k] + alpha * target[k];
    ++state.visits[idx];
    ++state.step;
}

Learner::Learner(Grid grid, const TabularMdp& mdp, Algorithm algorithm, Mode mode, StepSizeSchedule schedule,
                 TieBreak rule)
    : state_(LearnerState::initial(grid, mdp.n_states(), mdp.n_actions())),
      discount_(mdp.discount()),
      algorithm_(algorithm),
      mode_(std::move(mode)),
      schedule_(schedule),
      rule_(rule) {}

double Learner::update(const Transition& tr, bool terminal_next, Rng& rng) {
    const double alpha = schedule_.alpha(state_.visits.at(tr.state * state_.eta.n_actions() + tr.action));
    if (algorithm_ == Algorithm::one_step) {
        os_cdrl_step(state_, tr, discount_, mode_, alpha, terminal_next);
    } else {
        cdrl_step(state_, tr, discount_, mode_, alpha, terminal_next, rule_, &rng);
    }
    return alpha;
}

namespace {

ActionId behaviour_action(const LearnerState& state, StateId x, const Mode& mode, double epsilon, Rng& rng) {
    if (!mode.is_control()) return mode.policy().sample(x, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n_actions = state.eta.n_actions();
    if (unit(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, n_actions - 1);
        return pick(rng);
    }
    std::vector<double> q(n_actions);
    for (ActionId a = 0; a < n_actions; ++a) q[a] = state.eta.at(x, a).mean();
    return greedy_action(q, TieBreak::lowest_index);
}

LearningRow make_row(const LearningConfig& config, const LearnerState& state, std::uint64_t step, double epsilon,
                     double mean_alpha) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    LearningRow row;
    row.step = step;
    row.range_violations = state.range_violations;
    row.epsilon = epsilon;
    row.mean_alpha = mean_alpha;
    row.w1_to_reference = config.reference ? sup_wasserstein(state.eta, *config.reference, 1.0) : nan;
    if (config.q_reference) {
        const QFunction q = means(state.eta);
        row.q_error_sup = sup_norm_distance(q, *config.q_reference);
        row.q_error_sq = squared_l2_distance(q, *config.q_reference);
    } else {
        row.q_error_sup = nan;
        row.q_error_sq = nan;
    }
    for (const auto& [x, a] : config.tracked) {
        const auto p = state.eta.at(x, a).probs();
        row.tracked_probs.emplace_back(p.begin(), p.end());
    }
    if (config.record_q) {
        const QFunction q = means(state.eta);
        row.q_values.assign(q.values().begin(), q.values().end());
    }
    return row;
}

}  // namespace

LearningRecord run_learning(const EpisodicEnv& env, const LearningConfig& config) {
    if (config.n_steps < 1) throw std::invalid_argument("run_learning: n_steps must be >= 1");
    if (config.stride < 1) throw std::invalid_argument("run_learning: stride must be >= 1");
    config.exploration.validate();
    if (!config.mode.is_control() && (config.mode.policy().n_states() != env.mdp.n_states() ||
                                      config.mode.policy().n_actions() != env.mdp.n_actions())) {
        throw std::invalid_argument("run_learning: policy shape does not match the environment");
    }

    Rng rng(config.seed);
    Learner learner(config.grid, env.mdp, config.algorithm, config.mode, config.schedule, config.tie_break);
    std::vector<LearningRow> rows;
    rows.push_back(make_row(config, learner.state(), 0, config.exploration.epsilon(0), 0.0));

    StateId x = env.initial_state;
    double alpha_sum = 0.0;
    std::uint64_t alpha_count = 0;
    for (std::uint64_t t = 0; t < config.n_steps; ++t) {
        const double eps = config.exploration.epsilon(t);
        const ActionId a = behaviour_action(learner.state(), x, config.mode, eps, rng);
        const Transition tr = sample_step(env, x, a, rng);
        const bool terminal_next = env.is_terminal(tr.next_state);
        alpha_sum += learner.update(tr, terminal_next, rng);
        ++alpha_count;
        x = terminal_next ? env.initial_state : tr.next_state;

        const std::uint64_t done = t + 1;
        if (done % config.stride == 0 || done == config.n_steps) {
            rows.push_back(make_row(config, learner.state(), done, eps, alpha_sum / static_cast<double>(alpha_count)));
            alpha_sum = 0.0;
            alpha_count = 0;
        }
    }
    return {config.seed, std::move(rows), learner.state()};
}

std::vector<LearningRecord> run_learning_seeds(const EpisodicEnv& env, const LearningConfig& config,
                                               const std::vector<std::uint64_t>& seeds) {
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::optional<LearningRecord>> slots(sorted.size());
    std::vector<std::exception_ptr> errors(sorted.size());
    std::atomic<std::size_t> next{0};
    const std::size_t n_workers =
        std::max<std::size_t>(1, std::min<std::size_t>(sorted.size(), std::thread::hardware_concurrency()));
    auto worker = [&] {
        for (std::size_t i = next++; i < sorted.size(); i = next++) {
            try {
                LearningConfig local = config;
                local.seed = sorted[i];
                slots[i] = run_learning(env, local);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    pool.clear();
    std::vector<LearningRecord> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::vector<TargetBenchmarkRow> target_microbenchmark(const std::vector<std::size_t>& k_values, std::size_t n_reps,
                                                      std::uint64_t seed) {
    if (n_reps == 0) throw std::invalid_argument("target_microbenchmark: n_reps must be positive");
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        if (k_values[i] < 2) throw std::invalid_argument("target_microbenchmark: K must be >= 2");
        if (i > 0 && k_values[i] <= k_values[i - 1]) throw std::invalid_argument("target_microbenchmark: K values must increase");
    }
    using clock = std::chrono::steady_clock;
    constexpr double kDiscount = 0.9;
    constexpr std::size_t kInputs = 64;
    Rng rng(seed);
    std::uniform_real_distribution<double> reward_dist(-1.0, 1.0);
    std::vector<TargetBenchmarkRow> rows;

    for (const std::size_t k : k_values) {
        std::vector<double> points(k);
        for (std::size_t i = 0; i < k; ++i) points[i] = -10.0 + 20.0 * static_cast<double>(i) / static_cast<double>(k - 1);
        const Grid grid(points);

        // One next-state collection per input: a single state, a single action.
        std::vector<CategoricalCollection> inputs;
        std::vector<Transition> transitions;
        for (std::size_t i = 0; i < kInputs; ++i) {
            inputs.push_back(CategoricalCollection(1, 1, {CategoricalDistribution(grid, random_simplex(rng, k))}));
            transitions.push_back({0, 0, reward_dist(rng), 0});
        }
        const Mode mode = Mode::control();
        // The one-step target is measured from the continuation value, as the
        // CDRL target is measured from the next-state probabilities.
        std::vector<double> values;
        for (const auto& eta : inputs) values.push_back(continuation_value(eta, 0, mode, false));

        const std::size_t os_batch = 1 << 14;
        const std::size_t cdrl_batch = std::max<std::size_t>(1, (1 << 16) / k);
        std::vector<double> cdrl_ns;
        std::vector<double> os_ns;
        double sink = 0.0;
        std::size_t max_cells = 0;
        for (std::size_t rep = 0; rep < n_reps; ++rep) {
            auto t0 = clock::now();
            for (std::size_t b = 0; b < cdrl_batch; ++b) {
                const std::size_t i = b % kInputs;
                sink += cdrl_target(inputs[i], transitions[i], kDiscount, mode, false)[b % k];
            }
            auto t1 = clock::now();
            cdrl_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(cdrl_batch));

            t0 = clock::now();
            for (std::size_t b = 0; b < os_batch; ++b) {
                const std::size_t i = b % kInputs;
                const auto cell = project_dirac(transitions[i].reward + kDiscount * values[i], grid);
                sink += cell.upper_weight + static_cast<double>(cell.lower);
            }
            t1 = clock::now();
            os_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(os_batch));
        }
        for (std::size_t i = 0; i < kInputs; ++i) {
            max_cells = std::max(max_cells, cells_written(os_cdrl_target(inputs[i], transitions[i], kDiscount, mode, false)));
        }
        volatile double keep = sink;
        (void)keep;

        TargetBenchmarkRow row;
        row.k = k;
        row.cdrl_median_ns = median(cdrl_ns);
        row.one_step_median_ns = median(os_ns);
        row.ratio = row.cdrl_median_ns / row.one_step_median_ns;
        row.one_step_max_cells = max_cells;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace osdrl
