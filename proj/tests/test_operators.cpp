#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "osdrl/dp.hpp"
#include "osdrl/operators.hpp"
#include "osdrl/verify.hpp"

using namespace osdrl;

namespace {

TabularMdp self_loop(double r, double gamma) { return TabularMdp(1, 1, {1.0}, {r}, gamma); }

/// Full evaluation mixture written out term by term.
oracle::Atoms full_eval_by_hand(const AtomicCollection& mu, const TabularMdp& mdp, const Policy& pi, StateId x, ActionId a) {
    oracle::Atoms out;
    for (StateId y = 0; y < mdp.n_states(); ++y) {
        for (ActionId b = 0; b < mdp.n_actions(); ++b) {
            const auto& entry = mu.at(y, b);
            for (std::size_t k = 0; k < entry.size(); ++k) {
                const double w = mdp.prob(x, a, y) * pi.prob(y, b) * entry.weights()[k];
                if (w > 0.0) out.emplace_back(mdp.reward(x, a, y) + mdp.discount() * entry.atoms()[k], w);
            }
        }
    }
    return out;
}

/// One-step target mixture with Q(x', a') = sum_k p_k z_k evaluated by hand.
oracle::Atoms one_step_by_hand(const CategoricalCollection& eta, const TabularMdp& mdp, const Policy* pi, StateId x,
                       ActionId a) {
    oracle::Atoms out;
    for (StateId y = 0; y < mdp.n_states(); ++y) {
        double v = pi ? 0.0 : -1e300;
        for (ActionId b = 0; b < mdp.n_actions(); ++b) {
            double q = 0.0;
            const auto& e = eta.at(y, b);
            for (std::size_t k = 0; k < e.size(); ++k) q += e.probs()[k] * e.grid()[k];
            v = pi ? v + pi->prob(y, b) * q : std::max(v, q);
        }
        if (mdp.prob(x, a, y) > 0.0) out.emplace_back(mdp.reward(x, a, y) + mdp.discount() * v, mdp.prob(x, a, y));
    }
    return out;
}

}  // namespace

TEST_CASE("scalar Bellman operators") {
    const auto loop = self_loop(1.0, 0.5);
    const auto pi = Policy::uniform(1, 1);
    CHECK(bellman_eval(QFunction::zeros(1, 1), loop, pi).at(0, 0) == 1.0);
    CHECK(solve_q_star(loop, 1e-12).at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

    const auto toy = make_toy_mdp();
    const auto q_star = solve_q_star(toy, 1e-13);
    CHECK(sup_norm_distance(bellman_opt(q_star, toy), q_star) < 1e-12);
    CHECK(q_star.at(0, 0) == doctest::Approx(2.0));
    const auto uniform = Policy::uniform(2, 2);
    const auto q_pi = solve_q_pi(toy, uniform, 1e-13);
    CHECK(sup_norm_distance(bellman_eval(q_pi, toy, uniform), q_pi) < 1e-10);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto mdp = gen::mdp(rng);
        const auto p = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        std::vector<double> v1(mdp.n_pairs());
        std::vector<double> v2(mdp.n_pairs());
        for (auto& v : v1) v = u(rng);
        for (auto& v : v2) v = u(rng);
        const QFunction q1(mdp.n_states(), mdp.n_actions(), v1);
        const QFunction q2(mdp.n_states(), mdp.n_actions(), v2);
        const double d = sup_norm_distance(q1, q2);
        CHECK(sup_norm_distance(bellman_eval(q1, mdp, p), bellman_eval(q2, mdp, p)) <= mdp.discount() * d + 1e-12);
        CHECK(sup_norm_distance(bellman_opt(q1, mdp), bellman_opt(q2, mdp)) <= mdp.discount() * d + 1e-12);
    }
}

TEST_CASE("full evaluation operator on the toy MDP") {
    const auto toy = make_toy_mdp();
    const auto pi = Policy::uniform(2, 2);
    const auto mu = AtomicCollection::filled(2, 2, dirac(0.0));
    const auto out = distr_bellman_eval(mu, toy, pi);
    CHECK(out.at(0, 0) == dirac(2.0));
    CHECK(out.at(0, 1) == AtomicDistribution({0.0, 3.0}, {0.5, 0.5}));
    CHECK(out.at(1, 0) == dirac(0.0));
}

TEST_CASE("full evaluation operator agrees with the term-by-term mixture") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto mdp = gen::mdp(rng);
        const auto pi = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        const auto mu = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -4.0, 4.0);
        const auto out = distr_bellman_eval(mu, mdp, pi);
        std::size_t input_max = max_atoms(mu);
        for (StateId x = 0; x < mdp.n_states(); ++x) {
            for (ActionId a = 0; a < mdp.n_actions(); ++a) {
                CHECK(oracle::cdf_gap(oracle::atoms_of(out.at(x, a)), full_eval_by_hand(mu, mdp, pi, x, a)) < 1e-12);
                CHECK(out.at(x, a).size() <= mdp.n_pairs() * input_max);
            }
        }
    }
}

TEST_CASE("full control operator") {
    Rng rng(7);
    SUBCASE("strictly dominant actions reduce to the argmax policy") {
        for (int i = 0; i < 50; ++i) {
            const auto mdp = gen::mdp(rng);
            const auto mu = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -4.0, 4.0);
            const auto q = means(mu);
            std::vector<ActionId> argmax(mdp.n_states());
            for (StateId x = 0; x < mdp.n_states(); ++x) {
                const auto row = q.row(x);
                argmax[x] = static_cast<ActionId>(std::max_element(row.begin(), row.end()) - row.begin());
            }
            const auto greedy = Policy::deterministic(mdp.n_actions(), argmax);
            CHECK(sup_wasserstein(distr_bellman_opt(mu, mdp), distr_bellman_eval(mu, mdp, greedy), 1.0) < 1e-12);
            CHECK(sup_norm_distance(means(distr_bellman_opt(mu, mdp)), bellman_opt(q, mdp)) < 1e-10);
        }
    }
    SUBCASE("tie-break changes the output on the toy MDP") {
        const auto toy = make_toy_mdp();
        auto mu = AtomicCollection::filled(2, 2, dirac(0.0));
        mu.at(0, 0) = dirac(2.0);
        mu.at(0, 1) = AtomicDistribution({0.0, 4.0}, {0.5, 0.5});
        const auto lowest = distr_bellman_opt(mu, toy, TieBreak::lowest_index);
        const auto mixed = distr_bellman_opt(mu, toy, TieBreak::uniform_mix);
        // (x1, a2) -> x1 w.p. 1/2 with reward 3, then the greedy continuation at x1.
        CHECK(lowest.at(0, 1) == AtomicDistribution({0.0, 4.0}, {0.5, 0.5}));
        CHECK(mixed.at(0, 1) == AtomicDistribution({0.0, 3.0, 4.0, 5.0}, {0.5, 0.125, 0.25, 0.125}));
        CHECK(sup_wasserstein(lowest, mixed, 1.0) > 0.0);
        CHECK(sup_norm_distance(means(lowest), means(mixed)) < 1e-12);
        Rng stream(1);
        CHECK_NOTHROW(distr_bellman_opt(mu, toy, TieBreak::random, &stream));
        CHECK_THROWS(distr_bellman_opt(mu, toy, TieBreak::random, nullptr));
    }
}

TEST_CASE("greedy tie-breaking rules") {
    const std::vector<double> row{1.0, 3.0, 3.0, 2.0};
    CHECK(greedy_action(row, TieBreak::lowest_index) == 1);
    Rng rng(2);
    std::map<ActionId, int> seen;
    for (int i = 0; i < 200; ++i) ++seen[greedy_action(row, TieBreak::random, &rng)];
    CHECK(seen.size() == 2);
    CHECK(seen.count(1) == 1);
    CHECK(seen.count(2) == 1);

    const QFunction q(1, 4, row);
    const auto mixed = greedy_policy(q, TieBreak::uniform_mix);
    CHECK(mixed.prob(0, 1) == 0.5);
    CHECK(mixed.prob(0, 2) == 0.5);
    CHECK(mixed.prob(0, 0) == 0.0);
    CHECK(tie_break_from_string("uniform-mix") == TieBreak::uniform_mix);
    CHECK(std::string(to_string(TieBreak::random)) == "rng");
    CHECK_THROWS_AS(tie_break_from_string("coin"), std::invalid_argument);
}

TEST_CASE("one-step operators") {
    const auto toy = make_toy_mdp();
    const auto pi = Policy::uniform(2, 2);
    const auto zeros = AtomicCollection::filled(2, 2, dirac(0.0));
    const auto out = os_distr_eval(zeros, toy, pi);
    for (StateId x = 0; x < 2; ++x) {
        for (ActionId a = 0; a < 2; ++a) {
            oracle::Atoms expected;
            for (StateId y = 0; y < 2; ++y) {
                if (toy.prob(x, a, y) > 0.0) expected.emplace_back(toy.reward(x, a, y), toy.prob(x, a, y));
            }
            CHECK(oracle::cdf_gap(oracle::atoms_of(out.at(x, a)), expected) == 0.0);
        }
    }

    Rng rng(13);
    for (int i = 0; i < 30; ++i) {
        const auto mu = gen::atomic_collection(rng, 2, 2, 5, -3.0, 12.0);
        CHECK(max_atoms(os_distr_eval(mu, toy, pi)) <= 2);
        CHECK(max_atoms(os_distr_opt(mu, toy)) <= 2);
    }
}

TEST_CASE("one-step operators agree with the hand-built target mixture") {
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        const auto mdp = gen::mdp(rng);
        const auto pi = Policy::random(mdp.n_states(), mdp.n_actions(), rng);
        const Grid g = gen::grid(rng);
        const auto eta = gen::categorical_collection(rng, mdp.n_states(), mdp.n_actions(), g);
        const auto eval = os_distr_eval(eta, mdp, pi);
        const auto opt = os_distr_opt(eta, mdp);
        for (StateId x = 0; x < mdp.n_states(); ++x) {
            for (ActionId a = 0; a < mdp.n_actions(); ++a) {
                CHECK(oracle::cdf_gap(oracle::atoms_of(eval.at(x, a)), one_step_by_hand(eta, mdp, &pi, x, a)) < 1e-12);
                CHECK(oracle::cdf_gap(oracle::atoms_of(opt.at(x, a)), one_step_by_hand(eta, mdp, nullptr, x, a)) < 1e-12);
                CHECK(eval.at(x, a).size() <= mdp.n_states());
            }
        }
    }
}

TEST_CASE("one-step control is invariant to action relabelling") {
    Rng rng(21);
    for (int i = 0; i < 50; ++i) {
        const auto mdp = gen::mdp(rng, 4, 3);
        const auto mu = gen::atomic_collection(rng, mdp.n_states(), mdp.n_actions(), 3, -4.0, 4.0);
        std::vector<AtomicDistribution> swapped;
        for (StateId x = 0; x < mdp.n_states(); ++x) {
            for (ActionId a = 0; a < mdp.n_actions(); ++a) swapped.push_back(mu.at(x, mdp.n_actions() - 1 - a));
        }
        const AtomicCollection relabelled(mdp.n_states(), mdp.n_actions(), swapped);
        CHECK(sup_wasserstein(os_distr_opt(mu, mdp), os_distr_opt(relabelled, mdp), 1.0) == 0.0);
    }
}

TEST_CASE("one-step fixed points on the toy MDP") {
    const auto toy = make_toy_mdp();
    const auto nu_star = one_step_fixed_point_opt(toy, 1e-12);
    CHECK(sup_wasserstein(os_distr_opt(nu_star, toy), nu_star, 1.0) <= 1e-10);
    CHECK(oracle::cdf_gap(oracle::atoms_of(nu_star.at(0, 1)), {{0.0, 0.5}, {4.0, 0.5}}) < 1e-12);
}

TEST_CASE("projected operators") {
    const auto toy = make_toy_mdp();
    const Grid g({0.0, 1.9, 2.1, 10.0});
    const auto op = projected(make_operator(OperatorKind::one_step_opt, toy, Policy::uniform(2, 2)), g);
    const auto out = op(CategoricalCollection::filled(2, 2, CategoricalDistribution::unit(g, 0)));
    for (const auto& e : out) CHECK(std::abs(e.total_mass() - 1.0) <= 1e-12);
    CHECK(out[0].grid() == g);

    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        const auto mdp = gen::mdp(rng);
        const Grid grid = gen::grid(rng);
        const auto proj = projected(make_operator(OperatorKind::one_step_opt, mdp, Policy::uniform(mdp.n_states(), mdp.n_actions())), grid);
        const auto a = gen::categorical_collection(rng, mdp.n_states(), mdp.n_actions(), grid);
        const auto b = gen::categorical_collection(rng, mdp.n_states(), mdp.n_actions(), grid);
        CHECK(sup_wasserstein(proj(a), proj(b), 1.0) <= mdp.discount() * sup_wasserstein(a, b, 1.0) + 1e-10);
    }
}

TEST_CASE("operator names") {
    CHECK(std::string(to_string(OperatorKind::one_step_opt)) == "one-step-opt");
    CHECK(std::string(to_string(OperatorKind::full_eval)) == "full-eval");
}
