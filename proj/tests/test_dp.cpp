#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "osdrl/dp.hpp"
#include "osdrl/verify.hpp"

using namespace osdrl;

namespace {

const Grid kToyGrid({0.0, 1.9, 2.1, 10.0});

TabularMdp self_loop(double r, double gamma) { return TabularMdp(1, 1, {1.0}, {r}, gamma); }

CategoricalCollection lowest(const Grid& g, std::size_t n_states, std::size_t n_actions) {
    return CategoricalCollection::filled(n_states, n_actions, CategoricalDistribution::unit(g, 0));
}

}  // namespace

TEST_CASE("scalar solvers") {
    const auto loop = self_loop(1.0, 0.5);
    CHECK(std::abs(solve_q_pi(loop, Policy::uniform(1, 1), 1e-9).at(0, 0) - 2.0) < 1e-9);

    const auto toy = make_toy_mdp();
    const double tol = 1e-9;
    const auto q_pi = solve_q_pi(toy, Policy::uniform(2, 2), tol);
    CHECK(std::abs(q_pi.at(0, 0) - 2.0) < tol);
    CHECK(sup_norm_distance(bellman_eval(q_pi, toy, Policy::uniform(2, 2)), q_pi) < tol * (1.0 - 0.5));

    const auto q_star = solve_q_star(toy, tol);
    CHECK(std::abs(q_star.at(0, 1) - 2.0) < tol);
    CHECK(std::abs(q_star.at(1, 0)) < tol);
    CHECK(sup_norm_distance(bellman_opt(q_star, toy), q_star) < tol);

    CHECK(solve_q_star(self_loop(3.0, 0.0), 1e-9).at(0, 0) == 3.0);
    CHECK_THROWS_AS(solve_q_star(toy, 0.0), std::invalid_argument);
}

TEST_CASE("scalar solvers match value iteration on random MDPs") {
    Rng rng(1);
    for (int i = 0; i < 30; ++i) {
        const auto mdp = gen::mdp(rng);
        const auto v = oracle::optimal_values(mdp);
        const auto q = solve_q_star(mdp, 1e-10);
        for (StateId x = 0; x < mdp.n_states(); ++x) CHECK(std::abs(q.max_over_actions(x) - v[x]) < 1e-10);
    }
}

TEST_CASE("one-step fixed points") {
    const auto toy = make_toy_mdp();
    const double tol = 1e-10;
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
        const auto pi = Policy::random(2, 2, rng);
        const auto nu = one_step_fixed_point_eval(toy, pi, tol);
        CHECK(nu.at(0, 0) == dirac(2.0));
        CHECK(sup_wasserstein(os_distr_eval(nu, toy, pi), nu, 1.0) <= 10 * tol);
    }
    const auto nu_star = one_step_fixed_point_opt(toy, tol);
    CHECK(oracle::cdf_gap(oracle::atoms_of(nu_star.at(0, 1)), {{0.0, 0.5}, {4.0, 0.5}}) < 1e-9);

    for (int i = 0; i < 20; ++i) {
        const auto mdp = gen::mdp(rng);
        const auto pi = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        const auto nu = one_step_fixed_point_eval(mdp, pi, tol);
        const auto q_pi = solve_q_pi(mdp, pi, tol);
        CHECK(sup_norm_distance(means(nu), q_pi) <= 10 * tol);
        CHECK(sup_wasserstein(os_distr_eval(nu, mdp, pi), nu, 1.0) <= 10 * tol);
        const auto star = one_step_fixed_point_opt(mdp, tol);
        CHECK(sup_norm_distance(means(star), solve_q_star(mdp, tol)) <= 10 * tol);
        CHECK(sup_wasserstein(os_distr_opt(star, mdp), star, 1.0) <= 10 * tol);
    }
}

TEST_CASE("projected fixed points on the toy MDP") {
    const auto toy = make_toy_mdp();
    const auto fp = projected_fixed_points(toy, kToyGrid, 1e-10, Mode::control());
    const auto probs = fp.closed_form.at(0, 0).probs();
    CHECK(probs[0] == 0.0);
    CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(probs[2] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(probs[3] == 0.0);
    CHECK(fp.distance <= 1e-10);
    CHECK(fp.iterations <= contraction_steps(0.5, 10.0, 1e-10) + 8);

    const auto eval = projected_fixed_points(toy, kToyGrid, 1e-10, Mode::evaluation(Policy::uniform(2, 2)));
    CHECK(eval.distance <= 1e-10);
}

TEST_CASE("range condition violations name the triplet") {
    const auto toy = make_toy_mdp();
    const Grid narrow({0.5, 1.0, 3.0});
    try {
        projected_fixed_points(toy, narrow, 1e-8, Mode::control());
        FAIL("expected a range-condition error");
    } catch (const RangeConditionError& e) {
        REQUIRE_FALSE(e.violations().empty());
        bool found = false;
        for (const auto& v : e.violations()) {
            if (v.state == 0 && v.action == 1 && v.next_state == 0) {
                found = true;
                CHECK(v.target == doctest::Approx(4.0));
            }
        }
        CHECK(found);
        CHECK(std::string(e.what()).find("(x=0, a=1, x'=0, target=") != std::string::npos);
    }
}

TEST_CASE("contraction step bound") {
    CHECK(contraction_steps(0.5, 10.0, 1e-8) == static_cast<std::size_t>(std::ceil(std::log(1e-9) / std::log(0.5))));
    CHECK(contraction_steps(0.5, 1e-9, 1e-8) == 0);
    CHECK(contraction_steps(0.0, 10.0, 1e-8) == 1);
}

TEST_CASE("iterate records traces") {
    const auto toy = make_toy_mdp();
    const auto op = projected(make_operator(OperatorKind::one_step_opt, toy, Policy::uniform(2, 2)), kToyGrid);
    const auto start = lowest(kToyGrid, 2, 2);

    const auto empty = iterate<CategoricalDistribution>(op, start, 0);
    CHECK(empty.iterates.size() == 1);
    CHECK(empty.dist_to_next.empty());

    const auto reference = cramer_project(one_step_fixed_point_opt(toy, 1e-14), kToyGrid);
    const auto trace = iterate<CategoricalDistribution>(op, start, 40, reference);
    CHECK(trace.iterates.size() == 41);
    CHECK(trace.dist_to_next.size() == 40);
    CHECK(trace.dist_to_reference.size() == 41);
    for (std::size_t n = 0; n + 1 < trace.dist_to_reference.size(); ++n) {
        CHECK(trace.dist_to_reference[n + 1] <= 0.5 * trace.dist_to_reference[n] + 1e-12);
    }
    for (std::size_t n = 1; n < trace.dist_to_next.size(); ++n) {
        CHECK(trace.dist_to_next[n] <= 0.5 * trace.dist_to_next[n - 1] + 1e-10);
    }
}

TEST_CASE("Banach residual along random contractive traces") {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto mdp = gen::mdp(rng);
        const auto pi = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        for (auto kind : {OperatorKind::one_step_eval, OperatorKind::one_step_opt}) {
            const auto mu0 = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -5.0, 5.0);
            const auto trace = iterate<AtomicDistribution>(make_operator(kind, mdp, pi), mu0, 15);
            for (std::size_t n = 1; n < trace.dist_to_next.size(); ++n) {
                CHECK(trace.dist_to_next[n] <= mdp.discount() * trace.dist_to_next[n - 1] + 1e-10);
            }
        }
        const auto mu0 = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 2, -5.0, 5.0);
        const auto full = iterate<AtomicDistribution>(make_operator(OperatorKind::full_eval, mdp, pi), mu0, 3);
        for (std::size_t n = 1; n < full.dist_to_next.size(); ++n) {
            CHECK(full.dist_to_next[n] <= mdp.discount() * full.dist_to_next[n - 1] + 1e-10);
        }
    }
}

TEST_CASE("atom growth of the full operator") {
    const auto toy = make_toy_mdp();
    const auto pi = Policy::uniform(2, 2);
    const auto start = AtomicCollection::filled(2, 2, dirac(0.0));
    const auto full = iterate<AtomicDistribution>(make_operator(OperatorKind::full_eval, toy, pi), start, 4);
    const auto one_step = iterate<AtomicDistribution>(make_operator(OperatorKind::one_step_eval, toy, pi), start, 4);
    std::size_t bound = 1;
    for (std::size_t j = 0; j <= 4; ++j) {
        CHECK(max_atoms(full.iterates[j]) <= bound);
        CHECK(max_atoms(one_step.iterates[j]) <= 2);
        if (j > 0) CHECK(total_atoms(full.iterates[j]) >= total_atoms(full.iterates[j - 1]));
        bound *= 4;
    }
    CHECK(max_atoms(full.iterates[2]) > 2);
    CHECK(full.iterates[2].at(0, 0) == dirac(2.0));

    try {
        iterate<AtomicDistribution>(make_operator(OperatorKind::full_eval, toy, pi), start, 4, std::nullopt, 8);
        FAIL("expected the atom cap to trip");
    } catch (const AtomCapExceeded& e) {
        CHECK(e.iteration() >= 2);
        CHECK(e.atoms() > 8);
    }
}

TEST_CASE("oscillation detector on synthetic traces") {
    const Grid g({0.0, 1.0});
    auto entry = [&](double p) { return CategoricalCollection::filled(1, 1, CategoricalDistribution(g, {1.0 - p, p})); };
    auto make_trace = [&](auto value, std::size_t n) {
        IterationTrace<CategoricalDistribution> t;
        for (std::size_t i = 0; i < n; ++i) t.iterates.push_back(entry(value(i)));
        return t;
    };

    const auto constant = make_trace([](std::size_t) { return 0.3; }, 30);
    auto r = detect_oscillation(constant, 10);
    CHECK(r.converged);
    CHECK_FALSE(r.non_convergent);

    const auto flip = make_trace([](std::size_t i) { return i % 2 ? 0.8 : 0.2; }, 30);
    r = detect_oscillation(flip, 10);
    CHECK(r.non_convergent);
    CHECK(r.period == 2);
    CHECK(r.tail_step == doctest::Approx(0.6));

    const auto three = make_trace([](std::size_t i) { return 0.1 + 0.3 * static_cast<double>(i % 3); }, 30);
    CHECK(detect_oscillation(three, 10).period == 3);

    const auto five = make_trace([](std::size_t i) { return 0.1 * static_cast<double>(i % 5); }, 40);
    r = detect_oscillation(five, 10);
    CHECK(r.non_convergent);
    CHECK(r.period == 0);

    const auto decaying = make_trace([](std::size_t i) { return 0.5 + 0.5 * std::pow(0.5, static_cast<double>(i)); }, 60);
    CHECK(detect_oscillation(decaying, 40).converged);

    CHECK_THROWS_AS(detect_oscillation(constant, 25), std::invalid_argument);
}

TEST_CASE("projected one-step control converges on the toy MDP while the detector stays quiet") {
    const auto toy = make_toy_mdp();
    const auto op = projected(make_operator(OperatorKind::one_step_opt, toy, Policy::uniform(2, 2)), kToyGrid);
    const auto trace = iterate<CategoricalDistribution>(op, lowest(kToyGrid, 2, 2), 200);
    CHECK(detect_oscillation(trace, 100).converged);
}
