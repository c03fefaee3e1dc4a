#include <doctest.h>

#include <algorithm>

#include "osdrl/learning.hpp"
#include "osdrl/verify.hpp"

using namespace osdrl;

namespace {

void require_pass(const PropertyResult& r) {
    INFO(r.name << ": max_violation " << r.max_violation << ", tol " << r.tolerance << ", worst case "
                << r.failing_case.dump());
    CHECK(r.passed);
    CHECK(r.cases > 0);
}

struct Spread {
    double median;
    double fraction_below;  ///< of seeds with final sup W_1 < 0.05
};

Spread final_distances(const EpisodicEnv& env, const Grid& grid, const CategoricalCollection& reference,
                       std::uint64_t n_steps) {
    LearningConfig lc{.grid = grid};
    lc.schedule = StepSizeSchedule::polynomial(1.0, 0.7);
    lc.exploration = ExplorationSchedule::reaching(1.0, 0.25, 0.01, 50'000.0);
    lc.n_steps = n_steps;
    lc.stride = n_steps;
    lc.reference = reference;
    std::vector<std::uint64_t> seeds(20);
    for (std::uint64_t s = 0; s < 20; ++s) seeds[s] = s;
    const auto records = run_learning_seeds(env, lc, seeds);
    std::vector<double> d;
    for (const auto& r : records) d.push_back(r.rows.back().w1_to_reference);
    std::sort(d.begin(), d.end());
    const auto hits = std::count_if(d.begin(), d.end(), [](double x) { return x < 0.05; });
    return {0.5 * (d[9] + d[10]), static_cast<double>(hits) / static_cast<double>(d.size())};
}

}  // namespace

TEST_CASE("projection properties") {
    require_pass(check_projection_lemma(101, 2000));
    require_pass(check_mean_preservation(102, 2000));
    require_pass(check_projection_monotone(103, 300));
    require_pass(check_wasserstein_axioms(104, 300));
}

TEST_CASE("contraction of the one-step operators") {
    for (double p : {1.0, 2.0, 4.0}) {
        require_pass(check_contraction("one-step-eval", p, 201, 200));
        require_pass(check_contraction("one-step-opt", p, 202, 200));
        require_pass(check_contraction("full-eval", p, 203, 100));
    }
    require_pass(check_contraction("projected-one-step-eval", 1.0, 204, 200));
    require_pass(check_contraction("projected-one-step-opt", 1.0, 205, 200));
    CHECK_THROWS_AS(check_contraction("nope", 1.0, 0, 1), std::invalid_argument);
    const auto expansions = record_full_control_expansions(206, 200);
    CHECK(expansions.passed);
    CHECK(expansions.note.find("recorded only") != std::string::npos);
}

TEST_CASE("mean commutation and monotonicity") {
    require_pass(check_mean_commutation(301, 300));
    require_pass(check_operator_monotonicity(302, 300));
}

TEST_CASE("fixed points, mean tracking, atom growth") {
    require_pass(check_fixed_points(401, 4, 2));
    require_pass(check_mean_tracking(402, 2000));
    require_pass(check_atom_growth());
}

// At 1e5 steps the polynomial schedule leaves W_1 noise of a few hundredths,
// so roughly one seed in four lands above 0.05. The median is checked there
// and the 90% fraction at 1e6 steps.
TEST_CASE("convergence of the one-step learner") {
    SUBCASE("toy MDP") {
        const auto env = make_toy_env();
        const Grid grid({0.0, 1.9, 2.1, 10.0});
        const auto reference = cramer_project(one_step_fixed_point_opt(env.mdp, 1e-12), grid);
        CHECK(final_distances(env, grid, reference, 100'000).median < 0.05);
        CHECK(final_distances(env, grid, reference, 1'000'000).fraction_below >= 0.9);
    }
    SUBCASE("5-state random MDP") {
        Rng rng(7);
        const auto mdp = random_mdp(rng, 5, 2, 0.5);
        const EpisodicEnv env{mdp, std::vector<bool>(5, false), 0};
        const Grid grid = gen::covering_grid(-2.0, 2.0, 13);
        const auto reference = cramer_project(one_step_fixed_point_opt(mdp, 1e-12), grid);
        CHECK(final_distances(env, grid, reference, 100'000).median < 0.05);
        CHECK(final_distances(env, grid, reference, 1'000'000).fraction_below >= 0.9);
    }
}
