#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "osdrl/distributions.hpp"
#include "osdrl/mdp.hpp"

namespace osdrl {

/// Outcome of one randomized property check. `max_violation` is the largest
/// amount by which the property's inequality was exceeded (<= 0 when it held
/// with room to spare); `failing_case` holds the worst case for replay.
struct PropertyResult {
    std::string name;
    std::size_t cases = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    nlohmann::json failing_case;
    std::string note;
};

nlohmann::json to_json(const PropertyResult& result);

/// Random inputs used across the property suites.
namespace gen {

Grid grid(Rng& rng, std::size_t min_k = 2, std::size_t max_k = 10, double lo = -10.0, double hi = 10.0);
AtomicDistribution atomic(Rng& rng, std::size_t max_atoms, double lo, double hi);
CategoricalDistribution categorical(Rng& rng, const Grid& grid);
AtomicCollection atomic_collection(Rng& rng, std::size_t n_states, std::size_t n_actions, std::size_t max_atoms,
                                   double lo, double hi);
CategoricalCollection categorical_collection(Rng& rng, std::size_t n_states, std::size_t n_actions, const Grid& grid);
/// Random MDP with 2..max_states states and 2..max_actions actions.
TabularMdp mdp(Rng& rng, std::size_t max_states = 5, std::size_t max_actions = 3);
/// Entrywise upward shift of every atom by a nonnegative amount; the result
/// dominates the input.
AtomicCollection shifted_up(Rng& rng, const AtomicCollection& mu, double max_shift);
/// Evenly spaced grid covering [lo - margin, hi + margin].
Grid covering_grid(double lo, double hi, std::size_t k, double margin = 0.5);

}  // namespace gen

PropertyResult check_projection_lemma(std::uint64_t seed, std::size_t cases);
PropertyResult check_mean_preservation(std::uint64_t seed, std::size_t cases);
PropertyResult check_projection_monotone(std::uint64_t seed, std::size_t cases);
PropertyResult check_wasserstein_axioms(std::uint64_t seed, std::size_t cases);

/// gamma-contraction of one operator in sup W_p over random (MDP, mu1, mu2).
/// Projected operators are checked on categorical inputs in sup W_1.
PropertyResult check_contraction(const std::string& op_name, double p, std::uint64_t seed, std::size_t cases);
/// Counts cases where the greedy full control operator expands; always passes.
PropertyResult record_full_control_expansions(std::uint64_t seed, std::size_t cases);
PropertyResult check_mean_commutation(std::uint64_t seed, std::size_t cases);
PropertyResult check_operator_monotonicity(std::uint64_t seed, std::size_t cases);
/// Projected one-step iteration vs the closed-form projected fixed point on
/// the toy MDP plus `n_random` random MDPs, control and evaluation.
PropertyResult check_fixed_points(std::uint64_t seed, std::size_t n_random, std::size_t n_policies,
                                  const std::vector<TabularMdp>& extra = {});
/// Mean of the one-step learner vs a scalar Q-learning / TD learner fed the
/// same transitions and step sizes.
PropertyResult check_mean_tracking(std::uint64_t seed, std::size_t steps);
PropertyResult check_atom_growth();
PropertyResult check_target_complexity(std::size_t reps, std::uint64_t seed);

struct VerifyOptions {
    std::uint64_t seed = 0;
    std::size_t contraction_cases = 1000;
    std::size_t lemma_cases = 10'000;
    std::size_t mean_cases = 10'000;
    std::size_t tracking_steps = 10'000;
    std::size_t fixed_point_mdps = 10;
    std::size_t fixed_point_policies = 5;
    std::size_t bench_reps = 15;
    bool run_benchmark = true;
    std::vector<TabularMdp> extra_mdps;
};

std::vector<PropertyResult> run_property_suite(const VerifyOptions& options);

}  // namespace osdrl
