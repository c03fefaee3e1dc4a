#include "osdrl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "osdrl/dp.hpp"
#include "osdrl/learning.hpp"
#include "osdrl/operators.hpp"

namespace osdrl {

nlohmann::json to_json(const PropertyResult& r) {
    nlohmann::json j = {{"name", r.name},
                        {"cases", r.cases},
                        {"max_violation", r.max_violation},
                        {"tolerance", r.tolerance},
                        {"passed", r.passed}};
    if (!r.failing_case.is_null()) j["failing_case"] = r.failing_case;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

namespace gen {

Grid grid(Rng& rng, std::size_t min_k, std::size_t max_k, double lo, double hi) {
    std::uniform_int_distribution<std::size_t> size(min_k, max_k);
    std::uniform_real_distribution<double> loc(lo, hi);
    while (true) {
        std::vector<double> points(size(rng));
        for (auto& z : points) z = loc(rng);
        std::sort(points.begin(), points.end());
        bool ok = true;
        for (std::size_t k = 1; k < points.size(); ++k) ok = ok && points[k] - points[k - 1] > 1e-6;
        if (ok) return Grid(std::move(points));
    }
}

AtomicDistribution atomic(Rng& rng, std::size_t max_atoms, double lo, double hi) {
    std::uniform_int_distribution<std::size_t> size(1, max_atoms);
    std::uniform_real_distribution<double> loc(lo, hi);
    const std::size_t n = size(rng);
    std::vector<double> atoms(n);
    for (auto& z : atoms) z = loc(rng);
    return AtomicDistribution(std::move(atoms), random_simplex(rng, n));
}

CategoricalDistribution categorical(Rng& rng, const Grid& grid) {
    return CategoricalDistribution(grid, random_simplex(rng, grid.size()));
}

AtomicCollection atomic_collection(Rng& rng, std::size_t n_states, std::size_t n_actions, std::size_t max_atoms,
                                   double lo, double hi) {
    std::vector<AtomicDistribution> entries;
    for (std::size_t i = 0; i < n_states * n_actions; ++i) entries.push_back(atomic(rng, max_atoms, lo, hi));
    return AtomicCollection(n_states, n_actions, std::move(entries));
}

CategoricalCollection categorical_collection(Rng& rng, std::size_t n_states, std::size_t n_actions, const Grid& grid) {
    std::vector<CategoricalDistribution> entries;
    for (std::size_t i = 0; i < n_states * n_actions; ++i) entries.push_back(categorical(rng, grid));
    return CategoricalCollection(n_states, n_actions, std::move(entries));
}

TabularMdp mdp(Rng& rng, std::size_t max_states, std::size_t max_actions) {
    std::uniform_int_distribution<std::size_t> states(2, max_states);
    std::uniform_int_distribution<std::size_t> actions(2, max_actions);
    const std::size_t n_states = states(rng);
    const std::size_t n_actions = actions(rng);
    return random_mdp(rng, n_states, n_actions);
}

AtomicCollection shifted_up(Rng& rng, const AtomicCollection& mu, double max_shift) {
    std::uniform_real_distribution<double> shift(0.0, max_shift);
    std::vector<AtomicDistribution> entries;
    for (const auto& e : mu) {
        std::vector<double> atoms(e.atoms().begin(), e.atoms().end());
        for (auto& z : atoms) z += shift(rng);
        entries.emplace_back(std::move(atoms), std::vector<double>(e.weights().begin(), e.weights().end()));
    }
    return AtomicCollection(mu.n_states(), mu.n_actions(), std::move(entries));
}

Grid covering_grid(double lo, double hi, std::size_t k, double margin) {
    std::vector<double> points(k);
    const double a = lo - margin;
    const double b = hi + margin;
    for (std::size_t i = 0; i < k; ++i) points[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1);
    return Grid(std::move(points));
}

}  // namespace gen

namespace {

template <class Dist>
nlohmann::json collection_json(const Collection<Dist>& mu) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : mu) out.push_back(e.to_json());
    return out;
}

nlohmann::json grid_json(const Grid& grid) {
    return std::vector<double>(grid.points().begin(), grid.points().end());
}

/// Tracks the worst case seen so far.
class Worst {
public:
    Worst(std::string name, double tolerance) { result_.name = std::move(name), result_.tolerance = tolerance; }

    template <class MakeCase>
    void observe(double violation, MakeCase make_case) {
        ++result_.cases;
        if (first_ || violation > result_.max_violation) {
            result_.max_violation = violation;
            first_ = false;
            if (violation > result_.tolerance) result_.failing_case = make_case();
        }
    }

    PropertyResult finish(std::string note = {}) {
        result_.passed = result_.max_violation <= result_.tolerance;
        if (result_.passed) result_.failing_case = nullptr;
        result_.note = std::move(note);
        return result_;
    }

private:
    PropertyResult result_;
    bool first_ = true;
};

}  // namespace

PropertyResult check_projection_lemma(std::uint64_t seed, std::size_t cases) {
    Rng rng(seed);
    std::uniform_real_distribution<double> loc(-15.0, 15.0);
    Worst worst("projection_lemma_w1", 1e-10);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid grid = gen::grid(rng);
        const double a = loc(rng);
        const double b = loc(rng);
        const double lhs = wasserstein(cramer_project(dirac(a), grid), cramer_project(dirac(b), grid), 1.0);
        worst.observe(lhs - std::abs(a - b), [&] {
            return nlohmann::json{{"grid", grid_json(grid)}, {"a", a}, {"b", b}, {"w1_projected", lhs}};
        });
    }
    return worst.finish();
}

PropertyResult check_mean_preservation(std::uint64_t seed, std::size_t cases) {
    Rng rng(seed);
    Worst worst("mean_preservation", 1e-12);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid grid = gen::grid(rng);
        const auto nu = gen::atomic(rng, 10, grid.front(), grid.back());
        const double gap = std::abs(cramer_project(nu, grid).mean() - nu.mean());
        worst.observe(gap, [&] { return nlohmann::json{{"grid", grid_json(grid)}, {"nu", nu.to_json()}}; });
    }
    return worst.finish();
}

PropertyResult check_projection_monotone(std::uint64_t seed, std::size_t cases) {
    Rng rng(seed);
    Worst worst("projection_monotone", 0.0);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid grid = gen::grid(rng);
        const auto lower = gen::atomic_collection(rng, 1, 1, 6, -12.0, 12.0);
        const auto upper = gen::shifted_up(rng, lower, 3.0);
        const bool ok = stochastically_dominates(cramer_project(upper[0], grid), cramer_project(lower[0], grid));
        worst.observe(ok ? 0.0 : 1.0, [&] {
            return nlohmann::json{{"grid", grid_json(grid)}, {"lower", lower[0].to_json()}, {"upper", upper[0].to_json()}};
        });
    }
    return worst.finish();
}

PropertyResult check_wasserstein_axioms(std::uint64_t seed, std::size_t cases) {
    Rng rng(seed);
    Worst worst("wasserstein_axioms", 1e-10);
    for (std::size_t c = 0; c < cases; ++c) {
        const auto a = gen::atomic(rng, 6, -5.0, 5.0);
        const auto b = gen::atomic(rng, 6, -5.0, 5.0);
        const auto d = gen::atomic(rng, 6, -5.0, 5.0);
        for (double p : {1.0, 2.0, 4.0}) {
            const double ab = wasserstein(a, b, p);
            const double violation = std::max({std::abs(ab - wasserstein(b, a, p)), wasserstein(a, a, p),
                                               wasserstein(a, d, p) - ab - wasserstein(b, d, p)});
            worst.observe(violation, [&] {
                return nlohmann::json{{"p", p}, {"a", a.to_json()}, {"b", b.to_json()}, {"c", d.to_json()}};
            });
        }
    }
    return worst.finish();
}

PropertyResult check_contraction(const std::string& op_name, double p, std::uint64_t seed, std::size_t cases) {
    std::ostringstream name;
    name << "contraction_" << op_name << "_p" << p;
    Worst worst(name.str(), 1e-10);
    Rng rng(seed);
    const bool is_projected = op_name.rfind("projected-", 0) == 0;
    const std::string base = is_projected ? op_name.substr(10) : op_name;
    OperatorKind kind;
    if (base == "one-step-eval") kind = OperatorKind::one_step_eval;
    else if (base == "one-step-opt") kind = OperatorKind::one_step_opt;
    else if (base == "full-eval") kind = OperatorKind::full_eval;
    else throw std::invalid_argument("check_contraction: unsupported operator '" + op_name + "'");
    if (is_projected && p != 1.0) throw std::invalid_argument("check_contraction: projected operators use p = 1");

    for (std::size_t c = 0; c < cases; ++c) {
        const TabularMdp mdp = gen::mdp(rng);
        const Policy pi = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        const auto op = make_operator(kind, mdp, pi);
        double lhs = 0.0;
        double rhs = 0.0;
        nlohmann::json inputs;
        if (is_projected) {
            const Grid grid = gen::grid(rng);
            const auto eta1 = gen::categorical_collection(rng, mdp.n_states(), mdp.n_actions(), grid);
            const auto eta2 = gen::categorical_collection(rng, mdp.n_states(), mdp.n_actions(), grid);
            const auto proj = projected(op, grid);
            lhs = sup_wasserstein(proj(eta1), proj(eta2), 1.0);
            rhs = sup_wasserstein(eta1, eta2, 1.0);
            worst.observe(lhs - mdp.discount() * rhs, [&] {
                return nlohmann::json{{"mdp", mdp.to_json()}, {"policy_seeded", true}, {"grid", grid_json(grid)},
                                      {"eta1", collection_json(eta1)}, {"eta2", collection_json(eta2)},
                                      {"lhs", lhs}, {"rhs", rhs}};
            });
        } else {
            const auto mu1 = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 4, -5.0, 5.0);
            const auto mu2 = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 4, -5.0, 5.0);
            lhs = sup_wasserstein(op(mu1), op(mu2), p);
            rhs = sup_wasserstein(mu1, mu2, p);
            worst.observe(lhs - mdp.discount() * rhs, [&] {
                return nlohmann::json{{"mdp", mdp.to_json()}, {"p", p}, {"mu1", collection_json(mu1)},
                                      {"mu2", collection_json(mu2)}, {"lhs", lhs}, {"rhs", rhs}};
            });
        }
    }
    return worst.finish();
}

PropertyResult record_full_control_expansions(std::uint64_t seed, std::size_t cases) {
    Rng rng(seed);
    PropertyResult result;
    result.name = "full_control_expansions_recorded";
    result.tolerance = 0.0;
    std::size_t expansions = 0;
    double worst_ratio = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        const TabularMdp mdp = gen::mdp(rng);
        const auto mu1 = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -5.0, 5.0);
        const auto mu2 = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -5.0, 5.0);
        const double lhs = sup_wasserstein(distr_bellman_opt(mu1, mdp), distr_bellman_opt(mu2, mdp), 1.0);
        const double rhs = sup_wasserstein(mu1, mu2, 1.0);
        ++result.cases;
        if (lhs > mdp.discount() * rhs + 1e-10) {
            ++expansions;
            const double ratio = lhs / rhs;
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
                result.failing_case = {{"mdp", mdp.to_json()}, {"mu1", collection_json(mu1)},
                                       {"mu2", collection_json(mu2)}, {"ratio", ratio}};
            }
        }
    }
    std::ostringstream note;
    note << expansions << " of " << cases << " pairs exceed gamma in sup W_1";
    if (expansions > 0) note << "; worst ratio " << worst_ratio;
    note << "; recorded only, no contraction claimed";
    result.note = note.str();
    result.max_violation = static_cast<double>(expansions);
    result.tolerance = static_cast<double>(cases);
    result.passed = true;
    return result;
}

PropertyResult check_mean_commutation(std::uint64_t seed, std::size_t cases) {
    Rng rng(seed);
    Worst worst("mean_commutation", 1e-10);
    // Wide grid keeps every target inside [z_1, z_K], where projection preserves means.
    const Grid wide({-100.0, -3.0, -1.0, 0.0, 0.5, 2.0, 100.0});
    for (std::size_t c = 0; c < cases; ++c) {
        const TabularMdp mdp = gen::mdp(rng);
        const Policy pi = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        const auto mu = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -5.0, 5.0);
        const QFunction q = means(mu);
        const QFunction t_pi = bellman_eval(q, mdp, pi);
        const QFunction t_opt = bellman_opt(q, mdp);
        const double violation = std::max({
            sup_norm_distance(means(distr_bellman_eval(mu, mdp, pi)), t_pi),
            sup_norm_distance(means(distr_bellman_opt(mu, mdp)), t_opt),
            sup_norm_distance(means(os_distr_eval(mu, mdp, pi)), t_pi),
            sup_norm_distance(means(os_distr_opt(mu, mdp)), t_opt),
            sup_norm_distance(means(cramer_project(os_distr_eval(mu, mdp, pi), wide)), t_pi),
            sup_norm_distance(means(cramer_project(os_distr_opt(mu, mdp), wide)), t_opt),
        });
        worst.observe(violation, [&] { return nlohmann::json{{"mdp", mdp.to_json()}, {"mu", collection_json(mu)}}; });
    }
    return worst.finish();
}

PropertyResult check_operator_monotonicity(std::uint64_t seed, std::size_t cases) {
    Rng rng(seed);
    Worst worst("one_step_monotonicity", 0.0);
    for (std::size_t c = 0; c < cases; ++c) {
        const TabularMdp mdp = gen::mdp(rng);
        const Policy pi = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        const Grid grid = gen::grid(rng);
        const auto lower = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -5.0, 5.0);
        const auto upper = gen::shifted_up(rng, lower, 2.0);
        const auto lo_opt = os_distr_opt(lower, mdp);
        const auto up_opt = os_distr_opt(upper, mdp);
        const auto lo_eval = os_distr_eval(lower, mdp, pi);
        const auto up_eval = os_distr_eval(upper, mdp, pi);
        const bool ok = dominates_entrywise(up_opt, lo_opt) && dominates_entrywise(up_eval, lo_eval) &&
                        dominates_entrywise(cramer_project(up_opt, grid), cramer_project(lo_opt, grid)) &&
                        dominates_entrywise(cramer_project(up_eval, grid), cramer_project(lo_eval, grid));
        worst.observe(ok ? 0.0 : 1.0, [&] {
            return nlohmann::json{{"mdp", mdp.to_json()}, {"grid", grid_json(grid)},
                                  {"lower", collection_json(lower)}, {"upper", collection_json(upper)}};
        });
    }
    return worst.finish();
}

namespace {

/// Iterates Pi_C o one-step from delta_{z_1} long enough for the contraction
/// bound to guarantee 1e-11, then measures the gap to the closed form.
double fixed_point_gap(const TabularMdp& mdp, const Grid& grid, const Mode& mode) {
    const auto closed = cramer_project(one_step_fixed_point(mdp, mode, 1e-13), grid);
    const Policy pi = mode.is_control() ? Policy::uniform(mdp.n_states(), mdp.n_actions()) : mode.policy();
    const auto op = projected(
        make_operator(mode.is_control() ? OperatorKind::one_step_opt : OperatorKind::one_step_eval, mdp, pi), grid);
    auto eta = CategoricalCollection::filled(mdp.n_states(), mdp.n_actions(), CategoricalDistribution::unit(grid, 0));
    const std::size_t steps = contraction_steps(mdp.discount(), grid.back() - grid.front(), 1e-11) + 2;
    for (std::size_t n = 0; n < steps; ++n) eta = op(eta);
    return sup_wasserstein(eta, closed, 1.0);
}

Grid grid_for(const TabularMdp& mdp, const std::vector<Mode>& modes, std::size_t k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& mode : modes) {
        const auto v = state_values(solve_q(mdp, mode, 1e-12), mode);
        for (StateId x = 0; x < mdp.n_states(); ++x) {
            for (ActionId a = 0; a < mdp.n_actions(); ++a) {
                for (StateId y = 0; y < mdp.n_states(); ++y) {
                    if (mdp.prob(x, a, y) == 0.0) continue;
                    const double t = mdp.reward(x, a, y) + mdp.discount() * v[y];
                    lo = std::min(lo, t);
                    hi = std::max(hi, t);
                }
            }
        }
    }
    return gen::covering_grid(lo, hi, k);
}

}  // namespace

PropertyResult check_fixed_points(std::uint64_t seed, std::size_t n_random, std::size_t n_policies,
                                  const std::vector<TabularMdp>& extra) {
    Rng rng(seed);
    Worst worst("projected_fixed_point_agreement", 1e-8);
    auto check_mdp = [&](const TabularMdp& mdp, std::optional<Grid> fixed_grid) {
        std::vector<Mode> modes{Mode::control()};
        for (std::size_t i = 0; i < n_policies; ++i) {
            modes.push_back(Mode::evaluation(Policy::random(mdp.n_states(), mdp.n_actions(), rng)));
        }
        std::uniform_int_distribution<std::size_t> k_dist(3, 8);
        const Grid grid = fixed_grid ? *fixed_grid : grid_for(mdp, modes, k_dist(rng));
        for (const auto& mode : modes) {
            const double gap = fixed_point_gap(mdp, grid, mode);
            worst.observe(gap, [&] {
                return nlohmann::json{{"mdp", mdp.to_json()}, {"grid", grid_json(grid)}, {"control", mode.is_control()}};
            });
        }
    };
    check_mdp(make_toy_mdp(), Grid({0.0, 1.9, 2.1, 10.0}));
    for (std::size_t i = 0; i < n_random; ++i) check_mdp(gen::mdp(rng), std::nullopt);
    for (const auto& mdp : extra) check_mdp(mdp, std::nullopt);
    return worst.finish();
}

PropertyResult check_mean_tracking(std::uint64_t seed, std::size_t steps) {
    Worst worst("mean_tracking", 1e-9);
    const EpisodicEnv env = make_toy_env();
    const Grid grid({0.0, 1.9, 2.1, 10.0});
    const auto schedule = StepSizeSchedule::polynomial(1.0, 0.7);
    for (const Mode& mode : {Mode::control(), Mode::evaluation(Policy::uniform(2, 2))}) {
        Rng rng(seed);
        Learner learner(grid, env.mdp, Algorithm::one_step, mode, schedule);
        // Scalar learner: Q-learning in control, expected TD(0) in evaluation.
        std::vector<double> q(env.mdp.n_pairs(), grid.front());
        const std::size_t n_actions = env.mdp.n_actions();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        StateId x = env.initial_state;
        double max_gap = 0.0;
        for (std::size_t t = 0; t < steps; ++t) {
            const ActionId a = unit(rng) < 0.5 ? 0 : 1;
            const Transition tr = sample_step(env, x, a, rng);
            const bool terminal = env.is_terminal(tr.next_state);
            const double alpha = learner.update(tr, terminal, rng);
            double v = 0.0;
            if (!terminal) {
                if (mode.is_control()) {
                    v = q[tr.next_state * n_actions];
                    for (ActionId b = 1; b < n_actions; ++b) v = std::max(v, q[tr.next_state * n_actions + b]);
                } else {
                    for (ActionId b = 0; b < n_actions; ++b) v += mode.policy().prob(tr.next_state, b) * q[tr.next_state * n_actions + b];
                }
            }
            double& cell = q[tr.state * n_actions + tr.action];
            cell = (1.0 - alpha) * cell + alpha * (tr.reward + env.mdp.discount() * v);
            const auto m = learner.q_values();
            for (std::size_t i = 0; i < q.size(); ++i) max_gap = std::max(max_gap, std::abs(m.values()[i] - q[i]));
            x = terminal ? env.initial_state : tr.next_state;
        }
        worst.observe(max_gap, [&] { return nlohmann::json{{"seed", seed}, {"control", mode.is_control()}}; });
    }
    auto result = worst.finish("max over every step, control and evaluation");
    result.cases = 2 * steps;
    return result;
}

PropertyResult check_atom_growth() {
    PropertyResult result;
    result.name = "atom_growth_toy";
    const TabularMdp mdp = make_toy_mdp();
    const Policy pi = Policy::uniform(2, 2);
    auto full = AtomicCollection::filled(2, 2, dirac(0.0));
    auto one_step = full;
    std::vector<std::size_t> full_total{total_atoms(full)};
    std::vector<std::size_t> full_max{max_atoms(full)};
    std::size_t os_max = max_atoms(one_step);
    for (int j = 1; j <= 4; ++j) {
        full = distr_bellman_eval(full, mdp, pi);
        one_step = os_distr_eval(one_step, mdp, pi);
        full_total.push_back(total_atoms(full));
        full_max.push_back(max_atoms(full));
        os_max = std::max(os_max, max_atoms(one_step));
    }
    result.cases = 4;
    const bool non_decreasing = std::is_sorted(full_total.begin(), full_total.end());
    result.passed = os_max <= 2 && full_max[2] > 2 && non_decreasing;
    result.max_violation = result.passed ? 0.0 : 1.0;
    std::ostringstream note;
    note << "one-step max atoms " << os_max << "; full max atoms per entry by j:";
    for (auto n : full_max) note << ' ' << n;
    result.note = note.str();
    return result;
}

PropertyResult check_target_complexity(std::size_t reps, std::uint64_t seed) {
    PropertyResult result;
    result.name = "target_complexity";
    const auto rows = target_microbenchmark({8, 64, 512, 4096}, reps, seed);
    bool cells_ok = true;
    bool monotone = true;
    std::ostringstream note;
    nlohmann::json table = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        cells_ok = cells_ok && rows[i].one_step_max_cells <= 2;
        if (i > 0) monotone = monotone && rows[i].ratio > rows[i - 1].ratio;
        note << "K=" << rows[i].k << " ratio=" << rows[i].ratio << "; ";
        table.push_back({{"K", rows[i].k}, {"cdrl_median_ns", rows[i].cdrl_median_ns},
                         {"one_step_median_ns", rows[i].one_step_median_ns}, {"ratio", rows[i].ratio},
                         {"one_step_max_cells", rows[i].one_step_max_cells}});
    }
    result.cases = rows.size();
    result.passed = cells_ok && monotone && rows.back().ratio > rows.front().ratio;
    result.max_violation = result.passed ? 0.0 : 1.0;
    result.note = note.str();
    if (!result.passed) result.failing_case = table;
    return result;
}

std::vector<PropertyResult> run_property_suite(const VerifyOptions& o) {
    std::vector<PropertyResult> out;
    std::uint64_t s = o.seed;
    out.push_back(check_projection_lemma(s + 1, o.lemma_cases));
    out.push_back(check_mean_preservation(s + 2, o.mean_cases));
    out.push_back(check_projection_monotone(s + 3, o.contraction_cases));
    out.push_back(check_wasserstein_axioms(s + 4, o.contraction_cases));
    for (double p : {1.0, 2.0, 4.0}) {
        out.push_back(check_contraction("one-step-eval", p, s + 10, o.contraction_cases));
        out.push_back(check_contraction("one-step-opt", p, s + 11, o.contraction_cases));
        out.push_back(check_contraction("full-eval", p, s + 12, o.contraction_cases));
    }
    out.push_back(check_contraction("projected-one-step-eval", 1.0, s + 13, o.contraction_cases));
    out.push_back(check_contraction("projected-one-step-opt", 1.0, s + 14, o.contraction_cases));
    out.push_back(record_full_control_expansions(s + 15, o.contraction_cases));
    out.push_back(check_mean_commutation(s + 16, o.contraction_cases));
    out.push_back(check_operator_monotonicity(s + 17, o.contraction_cases));
    out.push_back(check_fixed_points(s + 18, o.fixed_point_mdps, o.fixed_point_policies, o.extra_mdps));
    out.push_back(check_mean_tracking(s + 19, o.tracking_steps));
    out.push_back(check_atom_growth());
    if (o.run_benchmark) out.push_back(check_target_complexity(o.bench_reps, s + 20));
    return out;
}

}  // namespace osdrl
