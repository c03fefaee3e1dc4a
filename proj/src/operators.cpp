#include "osdrl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace osdrl {

QFunction::QFunction(std::size_t n_states, std::size_t n_actions, std::vector<double> values)
    : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)) {
    if (values_.size() != n_states_ * n_actions_) throw std::invalid_argument("QFunction: wrong number of entries");
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("QFunction: non-finite entry");
    }
}

QFunction QFunction::zeros(std::size_t n_states, std::size_t n_actions) {
    return QFunction(n_states, n_actions, std::vector<double>(n_states * n_actions, 0.0));
}

double QFunction::at(StateId x, ActionId a) const {
    if (x >= n_states_ || a >= n_actions_) throw std::out_of_range("QFunction: id out of range");
    return values_[x * n_actions_ + a];
}

double& QFunction::at(StateId x, ActionId a) {
    if (x >= n_states_ || a >= n_actions_) throw std::out_of_range("QFunction: id out of range");
    return values_[x * n_actions_ + a];
}

std::span<const double> QFunction::row(StateId x) const {
    if (x >= n_states_) throw std::out_of_range("QFunction: state id out of range");
    return {values_.data() + x * n_actions_, n_actions_};
}

double QFunction::max_over_actions(StateId x) const {
    const auto r = row(x);
    return *std::max_element(r.begin(), r.end());
}

double QFunction::expected_under(StateId x, const Policy& pi) const {
    const auto r = row(x);
    const auto p = pi.row(x);
    double v = 0.0;
    for (std::size_t a = 0; a < r.size(); ++a) v += p[a] * r[a];
    return v;
}

double sup_norm_distance(const QFunction& lhs, const QFunction& rhs) {
    if (lhs.values().size() != rhs.values().size()) throw std::invalid_argument("sup_norm_distance: shape mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < lhs.values().size(); ++i) d = std::max(d, std::abs(lhs.values()[i] - rhs.values()[i]));
    return d;
}

double squared_l2_distance(const QFunction& lhs, const QFunction& rhs) {
    if (lhs.values().size() != rhs.values().size()) throw std::invalid_argument("squared_l2_distance: shape mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < lhs.values().size(); ++i) {
        const double e = lhs.values()[i] - rhs.values()[i];
        d += e * e;
    }
    return d;
}

const char* to_string(TieBreak rule) {
    switch (rule) {
        case TieBreak::lowest_index: return "lowest-index";
        case TieBreak::uniform_mix: return "uniform-mix";
        case TieBreak::random: return "rng";
    }
    return "?";
}

TieBreak tie_break_from_string(const std::string& name) {
    if (name == "lowest-index") return TieBreak::lowest_index;
    if (name == "uniform-mix") return TieBreak::uniform_mix;
    if (name == "rng") return TieBreak::random;
    throw std::invalid_argument("unknown tie-break rule '" + name + "'");
}

ActionId greedy_action(std::span<const double> row, TieBreak rule, Rng* rng) {
    const double best = *std::max_element(row.begin(), row.end());
    if (rule != TieBreak::random) {
        return static_cast<ActionId>(std::find(row.begin(), row.end(), best) - row.begin());
    }
    if (rng == nullptr) throw std::invalid_argument("greedy_action: random tie-break needs a random stream");
    std::vector<ActionId> ties;
    for (ActionId a = 0; a < row.size(); ++a) {
        if (row[a] == best) ties.push_back(a);
    }
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    return ties[pick(*rng)];
}

Policy greedy_policy(const QFunction& q, TieBreak rule, Rng* rng) {
    std::vector<double> probs(q.n_states() * q.n_actions(), 0.0);
    for (StateId x = 0; x < q.n_states(); ++x) {
        const auto row = q.row(x);
        double* out = probs.data() + x * q.n_actions();
        if (rule == TieBreak::uniform_mix) {
            const double best = *std::max_element(row.begin(), row.end());
            const auto n_ties = static_cast<double>(std::count(row.begin(), row.end(), best));
            for (ActionId a = 0; a < row.size(); ++a) out[a] = row[a] == best ? 1.0 / n_ties : 0.0;
        } else {
            out[greedy_action(row, rule, rng)] = 1.0;
        }
    }
    return Policy(q.n_states(), q.n_actions(), std::move(probs));
}

namespace {

void check_shapes(std::size_t n_states, std::size_t n_actions, const TabularMdp& mdp) {
    if (n_states != mdp.n_states() || n_actions != mdp.n_actions()) {
        throw std::invalid_argument("operator: collection shape does not match the MDP");
    }
}

template <class ValueOf>
QFunction scalar_backup(const QFunction& q, const TabularMdp& mdp, ValueOf value_of) {
    check_shapes(q.n_states(), q.n_actions(), mdp);
    std::vector<double> v(mdp.n_states());
    for (StateId x = 0; x < mdp.n_states(); ++x) v[x] = value_of(x);
    std::vector<double> out(mdp.n_pairs());
    for (StateId x = 0; x < mdp.n_states(); ++x) {
        for (ActionId a = 0; a < mdp.n_actions(); ++a) {
            const auto p = mdp.kernel_row(x, a);
            const auto r = mdp.reward_row(x, a);
            double acc = 0.0;
            for (StateId y = 0; y < mdp.n_states(); ++y) acc += p[y] * (r[y] + mdp.discount() * v[y]);
            out[x * mdp.n_actions() + a] = acc;
        }
    }
    return QFunction(mdp.n_states(), mdp.n_actions(), std::move(out));
}

}  // namespace

QFunction bellman_eval(const QFunction& q, const TabularMdp& mdp, const Policy& pi) {
    return scalar_backup(q, mdp, [&](StateId x) { return q.expected_under(x, pi); });
}

QFunction bellman_opt(const QFunction& q, const TabularMdp& mdp) {
    return scalar_backup(q, mdp, [&](StateId x) { return q.max_over_actions(x); });
}

AtomicCollection distr_bellman_eval(const AtomicCollection& mu, const TabularMdp& mdp, const Policy& pi) {
    check_shapes(mu.n_states(), mu.n_actions(), mdp);
    std::vector<AtomicDistribution> entries;
    entries.reserve(mdp.n_pairs());
    std::vector<std::pair<double, double>> pairs;
    for (StateId x = 0; x < mdp.n_states(); ++x) {
        for (ActionId a = 0; a < mdp.n_actions(); ++a) {
            pairs.clear();
            const auto p = mdp.kernel_row(x, a);
            const auto r = mdp.reward_row(x, a);
            for (StateId y = 0; y < mdp.n_states(); ++y) {
                if (p[y] == 0.0) continue;
                for (ActionId b = 0; b < mdp.n_actions(); ++b) {
                    const double w = p[y] * pi.prob(y, b);
                    if (w == 0.0) continue;
                    const auto& next = mu.at(y, b);
                    for (std::size_t i = 0; i < next.size(); ++i) {
                        pairs.emplace_back(r[y] + mdp.discount() * next.atoms()[i], w * next.weights()[i]);
                    }
                }
            }
            entries.push_back(normalized_from_pairs(pairs));
        }
    }
    return AtomicCollection(mdp.n_states(), mdp.n_actions(), std::move(entries));
}

AtomicCollection distr_bellman_opt(const AtomicCollection& mu, const TabularMdp& mdp, TieBreak rule, Rng* rng) {
    return distr_bellman_eval(mu, mdp, greedy_policy(means(mu), rule, rng));
}

AtomicCollection one_step_from_values(const TabularMdp& mdp, std::span<const double> state_values) {
    if (state_values.size() != mdp.n_states()) throw std::invalid_argument("one_step_from_values: wrong length");
    std::vector<AtomicDistribution> entries;
    entries.reserve(mdp.n_pairs());
    std::vector<std::pair<double, double>> pairs;
    for (StateId x = 0; x < mdp.n_states(); ++x) {
        for (ActionId a = 0; a < mdp.n_actions(); ++a) {
            pairs.clear();
            const auto p = mdp.kernel_row(x, a);
            const auto r = mdp.reward_row(x, a);
            for (StateId y = 0; y < mdp.n_states(); ++y) {
                if (p[y] > 0.0) pairs.emplace_back(r[y] + mdp.discount() * state_values[y], p[y]);
            }
            entries.push_back(normalized_from_pairs(pairs));
        }
    }
    return AtomicCollection(mdp.n_states(), mdp.n_actions(), std::move(entries));
}

CategoricalOperator projected(AtomicOperator op, Grid grid) {
    return [op = std::move(op), grid = std::move(grid)](const CategoricalCollection& eta) {
        return cramer_project(op(to_atomic(eta)), grid);
    };
}

const char* to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::full_eval: return "full-eval";
        case OperatorKind::full_opt: return "full-opt";
        case OperatorKind::one_step_eval: return "one-step-eval";
        case OperatorKind::one_step_opt: return "one-step-opt";
    }
    return "?";
}

AtomicOperator make_operator(OperatorKind kind, const TabularMdp& mdp, const Policy& pi, TieBreak rule, Rng* rng) {
    switch (kind) {
        case OperatorKind::full_eval:
            return [mdp, pi](const AtomicCollection& mu) { return distr_bellman_eval(mu, mdp, pi); };
        case OperatorKind::full_opt:
            return [mdp, rule, rng](const AtomicCollection& mu) { return distr_bellman_opt(mu, mdp, rule, rng); };
        case OperatorKind::one_step_eval:
            return [mdp, pi](const AtomicCollection& mu) { return os_distr_eval(mu, mdp, pi); };
        case OperatorKind::one_step_opt:
            return [mdp](const AtomicCollection& mu) { return os_distr_opt(mu, mdp); };
    }
    throw std::invalid_argument("make_operator: unknown kind");
}

}  // namespace osdrl
