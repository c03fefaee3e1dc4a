#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "osdrl/distributions.hpp"
#include "osdrl/operators.hpp"

namespace osdrl {

/// Evaluation of a fixed policy or control.
class Mode {
public:
    static Mode control() { return Mode(std::nullopt); }
    static Mode evaluation(Policy pi) { return Mode(std::move(pi)); }

    bool is_control() const noexcept { return !policy_.has_value(); }
    const Policy& policy() const { return policy_.value(); }

private:
    explicit Mode(std::optional<Policy> pi) : policy_(std::move(pi)) {}
    std::optional<Policy> policy_;
};

/// Iterates T^pi from zero until the step is below tol (1 - gamma) / gamma,
/// which bounds the distance to Q^pi by tol.
QFunction solve_q_pi(const TabularMdp& mdp, const Policy& pi, double tol);
QFunction solve_q_star(const TabularMdp& mdp, double tol);
QFunction solve_q(const TabularMdp& mdp, const Mode& mode, double tol);

/// Continuation values V(x) used by the one-step fixed point of `mode`.
std::vector<double> state_values(const QFunction& q, const Mode& mode);

/// nu_pi(x, a) = sum_x' P(x'|x, a) delta_{r(x, a, x') + gamma V^pi(x')}.
AtomicCollection one_step_fixed_point_eval(const TabularMdp& mdp, const Policy& pi, double tol);
/// Same with V*.
AtomicCollection one_step_fixed_point_opt(const TabularMdp& mdp, double tol);
AtomicCollection one_step_fixed_point(const TabularMdp& mdp, const Mode& mode, double tol);

struct RangeViolation {
    StateId state;
    ActionId action;
    StateId next_state;
    double target;
};

/// Some one-step target r(x, a, x') + gamma V(x') falls outside [z_1, z_K].
class RangeConditionError : public std::domain_error {
public:
    explicit RangeConditionError(std::vector<RangeViolation> violations);
    const std::vector<RangeViolation>& violations() const noexcept { return violations_; }

private:
    std::vector<RangeViolation> violations_;
};

/// Targets outside [z_1, z_K] for reachable (x, a, x') triplets.
std::vector<RangeViolation> range_violations(const TabularMdp& mdp, std::span<const double> state_values,
                                             const Grid& grid);

struct ProjectedFixedPoint {
    CategoricalCollection closed_form;  ///< Pi_C(nu)
    CategoricalCollection iterated;     ///< projected one-step iteration from delta_{z_1}
    std::size_t iterations = 0;
    double distance = 0.0;  ///< sup W_1 between the two
};

/// Closed form Pi_C(nu_pi) / Pi_C(nu_*), cross-checked by iterating the
/// projected one-step operator from the all-delta_{z_1} collection until it
/// is within tol. Throws RangeConditionError when the range condition fails
/// and std::runtime_error when the iteration does not reach tol within the
/// contraction bound.
ProjectedFixedPoint projected_fixed_points(const TabularMdp& mdp, const Grid& grid, double tol, const Mode& mode);

/// Steps needed by a gamma-contraction to shrink distance `initial` below tol.
std::size_t contraction_steps(double gamma, double initial, double tol);

/// Iterates of an operator with W_1 diagnostics. dist_to_next[n] is
/// sup W_1(mu_{n+1}, mu_n); dist_to_reference[n] is sup W_1(mu_n, ref).
template <class Dist>
struct IterationTrace {
    std::vector<Collection<Dist>> iterates;
    std::vector<double> dist_to_next;
    std::vector<double> dist_to_reference;
};

class AtomCapExceeded : public std::length_error {
public:
    AtomCapExceeded(std::size_t iteration, std::size_t atoms);
    std::size_t iteration() const noexcept { return iteration_; }
    std::size_t atoms() const noexcept { return atoms_; }

private:
    std::size_t iteration_;
    std::size_t atoms_;
};

inline constexpr std::size_t kDefaultAtomCap = 1'000'000;

inline std::size_t atom_count(const AtomicCollection& mu) { return total_atoms(mu); }
inline std::size_t atom_count(const CategoricalCollection& eta) {
    std::size_t n = 0;
    for (const auto& e : eta) n += e.size();
    return n;
}

template <class Dist>
IterationTrace<Dist> iterate(const std::function<Collection<Dist>(const Collection<Dist>&)>& op,
                             Collection<Dist> mu0, std::size_t n_steps,
                             const std::optional<Collection<Dist>>& reference = std::nullopt,
                             std::size_t atom_cap = kDefaultAtomCap) {
    IterationTrace<Dist> trace;
    trace.iterates.reserve(n_steps + 1);
    trace.iterates.push_back(std::move(mu0));
    if (reference) trace.dist_to_reference.push_back(sup_wasserstein(trace.iterates.back(), *reference, 1.0));
    for (std::size_t n = 0; n < n_steps; ++n) {
        auto next = op(trace.iterates.back());
        const std::size_t atoms = atom_count(next);
        if (atoms > atom_cap) throw AtomCapExceeded(n + 1, atoms);
        trace.dist_to_next.push_back(sup_wasserstein(next, trace.iterates.back(), 1.0));
        if (reference) trace.dist_to_reference.push_back(sup_wasserstein(next, *reference, 1.0));
        trace.iterates.push_back(std::move(next));
    }
    return trace;
}

struct OscillationReport {
    bool converged = false;       ///< period-1 recurrence in the tail
    bool non_convergent = false;  ///< instability signature
    std::size_t period = 0;       ///< 2..max_period when periodic, 0 otherwise
    double tail_step = 0.0;       ///< max_{n > burn_in} sup W_1(mu_{n+1}, mu_n)
    std::vector<double> tail_lag_distance;  ///< index q-1: max_{n > burn_in} sup W_1(mu_{n+q}, mu_n)
};

inline constexpr double kOscillationThreshold = 1e-6;
inline constexpr std::size_t kMaxOscillationPeriod = 4;

/// Classifies the tail of a trace. Converged when consecutive iterates agree
/// within the threshold; otherwise non-convergent, with the smallest lag
/// q <= max_period at which the tail recurs reported as the period.
template <class Dist>
OscillationReport detect_oscillation(const IterationTrace<Dist>& trace, std::size_t burn_in,
                                     double threshold = kOscillationThreshold,
                                     std::size_t max_period = kMaxOscillationPeriod) {
    const auto& it = trace.iterates;
    if (it.size() < burn_in + max_period + 2) {
        throw std::invalid_argument("detect_oscillation: trace too short for burn-in and period cap");
    }
    OscillationReport report;
    for (std::size_t q = 1; q <= max_period; ++q) {
        double worst = 0.0;
        for (std::size_t n = burn_in + 1; n + q < it.size(); ++n) {
            worst = std::max(worst, sup_wasserstein(it[n + q], it[n], 1.0));
        }
        report.tail_lag_distance.push_back(worst);
    }
    report.tail_step = report.tail_lag_distance.front();
    report.converged = report.tail_step <= threshold;
    report.non_convergent = !report.converged;
    if (report.non_convergent) {
        for (std::size_t q = 2; q <= max_period; ++q) {
            if (report.tail_lag_distance[q - 1] < threshold) {
                report.period = q;
                break;
            }
        }
    }
    return report;
}

}  // namespace osdrl
