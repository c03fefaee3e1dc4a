#pragma once

#include <functional>
#include <vector>

#include "osdrl/distributions.hpp"
#include "osdrl/mdp.hpp"

namespace osdrl {

/// Real value per (state, action), row-major.
class QFunction {
public:
    QFunction(std::size_t n_states, std::size_t n_actions, std::vector<double> values);
    static QFunction zeros(std::size_t n_states, std::size_t n_actions);

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    double at(StateId x, ActionId a) const;
    double& at(StateId x, ActionId a);
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> row(StateId x) const;

    double max_over_actions(StateId x) const;
    double expected_under(StateId x, const Policy& pi) const;

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> values_;
};

double sup_norm_distance(const QFunction& lhs, const QFunction& rhs);
double squared_l2_distance(const QFunction& lhs, const QFunction& rhs);

/// Entrywise means of a collection.
template <class Dist>
QFunction means(const Collection<Dist>& mu) {
    std::vector<double> values;
    values.reserve(mu.size());
    for (const auto& e : mu) values.push_back(e.mean());
    return QFunction(mu.n_states(), mu.n_actions(), std::move(values));
}

/// Which greedy action(s) to use when several actions share the maximal mean.
enum class TieBreak {
    lowest_index,  ///< first maximiser
    uniform_mix,   ///< uniform mixture over all maximisers
    random,        ///< one maximiser drawn from a caller-supplied stream
};

const char* to_string(TieBreak rule);
TieBreak tie_break_from_string(const std::string& name);

/// Greedy policy w.r.t. Q. Maximisers are the actions whose value compares
/// equal to the row maximum. `rng` is required for TieBreak::random.
Policy greedy_policy(const QFunction& q, TieBreak rule, Rng* rng = nullptr);
ActionId greedy_action(std::span<const double> row, TieBreak rule, Rng* rng = nullptr);

QFunction bellman_eval(const QFunction& q, const TabularMdp& mdp, const Policy& pi);
QFunction bellman_opt(const QFunction& q, const TabularMdp& mdp);

/// Full distributional evaluation operator: mixture over (x', a') of
/// pushforwards of mu(x', a') through z -> r(x, a, x') + gamma z.
AtomicCollection distr_bellman_eval(const AtomicCollection& mu, const TabularMdp& mdp, const Policy& pi);

/// Full distributional control operator: evaluation under the greedy policy
/// of the current means.
AtomicCollection distr_bellman_opt(const AtomicCollection& mu, const TabularMdp& mdp,
                                   TieBreak rule = TieBreak::lowest_index, Rng* rng = nullptr);

/// One-step operators only read the continuation values, so they accept any
/// collection with entrywise means.
AtomicCollection one_step_from_values(const TabularMdp& mdp, std::span<const double> state_values);

template <class Dist>
AtomicCollection os_distr_eval(const Collection<Dist>& mu, const TabularMdp& mdp, const Policy& pi) {
    const QFunction q = means(mu);
    std::vector<double> v(mdp.n_states());
    for (StateId x = 0; x < mdp.n_states(); ++x) v[x] = q.expected_under(x, pi);
    return one_step_from_values(mdp, v);
}

template <class Dist>
AtomicCollection os_distr_opt(const Collection<Dist>& mu, const TabularMdp& mdp) {
    const QFunction q = means(mu);
    std::vector<double> v(mdp.n_states());
    for (StateId x = 0; x < mdp.n_states(); ++x) v[x] = q.max_over_actions(x);
    return one_step_from_values(mdp, v);
}

using AtomicOperator = std::function<AtomicCollection(const AtomicCollection&)>;
using CategoricalOperator = std::function<CategoricalCollection(const CategoricalCollection&)>;

/// Pi_C o op, applied entrywise.
CategoricalOperator projected(AtomicOperator op, Grid grid);

/// Named distributional operators bound to an MDP.
enum class OperatorKind { full_eval, full_opt, one_step_eval, one_step_opt };

const char* to_string(OperatorKind kind);

/// Binds an operator to (mdp, policy). The policy is ignored by the control
/// operators. `rng` must outlive the returned functor when rule is random.
AtomicOperator make_operator(OperatorKind kind, const TabularMdp& mdp, const Policy& pi,
                             TieBreak rule = TieBreak::lowest_index, Rng* rng = nullptr);

}  // namespace osdrl
