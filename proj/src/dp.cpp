#include "osdrl/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace osdrl {

namespace {

template <class Backup>
QFunction solve_fixed_point(const TabularMdp& mdp, double tol, Backup backup) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
    const double gamma = mdp.discount();
    QFunction q = QFunction::zeros(mdp.n_states(), mdp.n_actions());
    if (gamma == 0.0) return backup(q);
    const double step_tol = tol * (1.0 - gamma) / gamma;
    while (true) {
        QFunction next = backup(q);
        const double step = sup_norm_distance(next, q);
        q = std::move(next);
        if (step < step_tol) return q;
    }
}

std::string describe(const std::vector<RangeViolation>& violations) {
    std::ostringstream out;
    out << "range condition violated for " << violations.size() << " triplet(s):";
    for (const auto& v : violations) {
        out << " (x=" << v.state << ", a=" << v.action << ", x'=" << v.next_state << ", target=" << v.target << ")";
    }
    return out.str();
}

}  // namespace

QFunction solve_q_pi(const TabularMdp& mdp, const Policy& pi, double tol) {
    return solve_fixed_point(mdp, tol, [&](const QFunction& q) { return bellman_eval(q, mdp, pi); });
}

QFunction solve_q_star(const TabularMdp& mdp, double tol) {
    return solve_fixed_point(mdp, tol, [&](const QFunction& q) { return bellman_opt(q, mdp); });
}

QFunction solve_q(const TabularMdp& mdp, const Mode& mode, double tol) {
    return mode.is_control() ? solve_q_star(mdp, tol) : solve_q_pi(mdp, mode.policy(), tol);
}

std::vector<double> state_values(const QFunction& q, const Mode& mode) {
    std::vector<double> v(q.n_states());
    for (StateId x = 0; x < q.n_states(); ++x) {
        v[x] = mode.is_control() ? q.max_over_actions(x) : q.expected_under(x, mode.policy());
    }
    return v;
}

AtomicCollection one_step_fixed_point_eval(const TabularMdp& mdp, const Policy& pi, double tol) {
    return one_step_fixed_point(mdp, Mode::evaluation(pi), tol);
}

AtomicCollection one_step_fixed_point_opt(const TabularMdp& mdp, double tol) {
    return one_step_fixed_point(mdp, Mode::control(), tol);
}

AtomicCollection one_step_fixed_point(const TabularMdp& mdp, const Mode& mode, double tol) {
    return one_step_from_values(mdp, state_values(solve_q(mdp, mode, tol), mode));
}

RangeConditionError::RangeConditionError(std::vector<RangeViolation> violations)
    : std::domain_error(describe(violations)), violations_(std::move(violations)) {}

std::vector<RangeViolation> range_violations(const TabularMdp& mdp, std::span<const double> state_values,
                                             const Grid& grid) {
    std::vector<RangeViolation> out;
    for (StateId x = 0; x < mdp.n_states(); ++x) {
        for (ActionId a = 0; a < mdp.n_actions(); ++a) {
            for (StateId y = 0; y < mdp.n_states(); ++y) {
                if (mdp.prob(x, a, y) == 0.0) continue;
                const double target = mdp.reward(x, a, y) + mdp.discount() * state_values[y];
                if (target < grid.front() || target > grid.back()) out.push_back({x, a, y, target});
            }
        }
    }
    return out;
}

std::size_t contraction_steps(double gamma, double initial, double tol) {
    if (initial <= tol) return 0;
    if (gamma == 0.0) return 1;
    return static_cast<std::size_t>(std::ceil(std::log(tol / initial) / std::log(gamma)));
}

ProjectedFixedPoint projected_fixed_points(const TabularMdp& mdp, const Grid& grid, double tol, const Mode& mode) {
    // The scalar solve is run well below tol so that the closed form is not
    // the limiting error in the cross-check.
    const double solve_tol = std::max(tol * 1e-3, 1e-14);
    const auto v = state_values(solve_q(mdp, mode, solve_tol), mode);
    if (auto bad = range_violations(mdp, v, grid); !bad.empty()) throw RangeConditionError(std::move(bad));

    auto closed_form = cramer_project(one_step_from_values(mdp, v), grid);

    const Policy pi = mode.is_control() ? Policy::uniform(mdp.n_states(), mdp.n_actions()) : mode.policy();
    const auto kind = mode.is_control() ? OperatorKind::one_step_opt : OperatorKind::one_step_eval;
    const auto op = projected(make_operator(kind, mdp, pi), grid);

    auto eta = CategoricalCollection::filled(mdp.n_states(), mdp.n_actions(), CategoricalDistribution::unit(grid, 0));
    const double initial = sup_wasserstein(eta, closed_form, 1.0);
    // Rounding in the means can cost a few extra steps near machine precision.
    const std::size_t budget = contraction_steps(mdp.discount(), initial, tol) + 8;
    std::size_t steps = 0;
    double distance = initial;
    while (distance >= tol && steps < budget) {
        eta = op(eta);
        ++steps;
        distance = sup_wasserstein(eta, closed_form, 1.0);
    }
    if (distance >= tol) {
        std::ostringstream msg;
        msg << "projected_fixed_points: iteration stalled at distance " << distance << " after " << steps << " steps";
        throw std::runtime_error(msg.str());
    }
    return {std::move(closed_form), std::move(eta), steps, distance};
}

AtomCapExceeded::AtomCapExceeded(std::size_t iteration, std::size_t atoms)
    : std::length_error("atom cap exceeded at iteration " + std::to_string(iteration) + ": " +
                        std::to_string(atoms) + " atoms"),
      iteration_(iteration),
      atoms_(atoms) {}

}  // namespace osdrl
