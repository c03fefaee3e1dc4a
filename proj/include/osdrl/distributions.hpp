#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "osdrl/mdp.hpp"

namespace osdrl {

/// Locations closer than this are treated as one atom.
inline constexpr double kAtomMergeTolerance = 1e-12;

/// Finitely supported probability measure on the real line. Atoms are kept
/// strictly increasing with strictly positive weights summing to one.
class AtomicDistribution {
public:
    /// Sorts, merges coincident locations, drops zero weights and rescales to
    /// unit mass. Rejects negative or non-finite input and total mass that is
    /// not 1 within 1e-9.
    AtomicDistribution(std::vector<double> atoms, std::vector<double> weights);

    std::span<const double> atoms() const noexcept { return atoms_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    double mean() const;
    /// P(Z <= z).
    double cdf(double z) const;

    nlohmann::json to_json() const;
    static AtomicDistribution from_json(const nlohmann::json& doc);

    friend bool operator==(const AtomicDistribution&, const AtomicDistribution&) = default;

private:
    AtomicDistribution() = default;
    friend AtomicDistribution normalized_from_pairs(std::vector<std::pair<double, double>> pairs);

    std::vector<double> atoms_;
    std::vector<double> weights_;
};

/// Builds a distribution from unsorted (location, weight) pairs.
AtomicDistribution normalized_from_pairs(std::vector<std::pair<double, double>> pairs);

/// Fixed categorical support z_1 < ... < z_K, K >= 2. Cheap to copy.
class Grid {
public:
    explicit Grid(std::vector<double> points);

    std::size_t size() const noexcept { return points_->size(); }
    double operator[](std::size_t k) const noexcept { return (*points_)[k]; }
    std::span<const double> points() const noexcept { return *points_; }
    double front() const noexcept { return points_->front(); }
    double back() const noexcept { return points_->back(); }

    friend bool operator==(const Grid& lhs, const Grid& rhs) {
        return lhs.points_ == rhs.points_ || *lhs.points_ == *rhs.points_;
    }

private:
    std::shared_ptr<const std::vector<double>> points_;
};

/// Probabilities over a Grid.
class CategoricalDistribution {
public:
    CategoricalDistribution(Grid grid, std::vector<double> probs);

    /// Unit mass at grid point k.
    static CategoricalDistribution unit(Grid grid, std::size_t k);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> probs() const noexcept { return probs_; }
    std::span<double> mutable_probs() noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double prob(std::size_t k) const { return probs_.at(k); }

    double mean() const;
    double total_mass() const;

    nlohmann::json to_json() const;
    static CategoricalDistribution from_json(const nlohmann::json& doc);

private:
    Grid grid_;
    std::vector<double> probs_;
};

AtomicDistribution to_atomic(const CategoricalDistribution& eta);
inline const AtomicDistribution& to_atomic(const AtomicDistribution& nu) { return nu; }

AtomicDistribution dirac(double z);

/// (z -> r0 + gamma z)# nu. gamma = 0 collapses to dirac(r0).
AtomicDistribution pushforward_affine(const AtomicDistribution& nu, double r0, double gamma);

struct WeightedComponent {
    double weight;
    const AtomicDistribution* distribution;
};

/// Convex combination. Weights must be nonnegative and sum to 1 within 1e-10.
AtomicDistribution mixture(std::span<const WeightedComponent> components);

inline double mean(const AtomicDistribution& nu) { return nu.mean(); }
inline double mean(const CategoricalDistribution& eta) { return eta.mean(); }

/// Exact W_p from the piecewise-constant quantile functions. p in [1, inf).
double wasserstein(const AtomicDistribution& lhs, const AtomicDistribution& rhs, double p);
double wasserstein(const CategoricalDistribution& lhs, const CategoricalDistribution& rhs, double p);

/// W_1 between two categoricals on the same grid as the area between CDFs.
double wasserstein1_same_grid(const CategoricalDistribution& lhs, const CategoricalDistribution& rhs);

/// Cramer projection of a single Dirac: at most two neighbouring cells.
struct ProjectedDirac {
    std::size_t lower = 0;
    std::size_t upper = 0;
    double lower_weight = 1.0;
    double upper_weight = 0.0;
    bool clamped = false;  ///< location was outside [z_1, z_K]
};

/// Locates the bracket by binary search.
ProjectedDirac project_dirac(double z, const Grid& grid);
CategoricalDistribution cramer_project(const AtomicDistribution& nu, const Grid& grid);

/// True iff `upper` stochastically dominates `lower`, i.e. F_upper <= F_lower
/// at every breakpoint (1e-12 slack).
bool stochastically_dominates(const AtomicDistribution& upper, const AtomicDistribution& lower);
bool stochastically_dominates(const CategoricalDistribution& upper, const CategoricalDistribution& lower);

/// KL(target || model) with 0 ln 0 = 0. Throws std::domain_error if target
/// puts mass where model has none.
double kl_divergence(const CategoricalDistribution& target, const CategoricalDistribution& model);

/// One distribution per (state, action), row-major.
template <class Dist>
class Collection {
public:
    Collection(std::size_t n_states, std::size_t n_actions, std::vector<Dist> entries)
        : n_states_(n_states), n_actions_(n_actions), entries_(std::move(entries)) {
        if (entries_.size() != n_states_ * n_actions_) {
            throw std::invalid_argument("Collection: need one entry per (state, action)");
        }
    }

    static Collection filled(std::size_t n_states, std::size_t n_actions, const Dist& value) {
        return Collection(n_states, n_actions, std::vector<Dist>(n_states * n_actions, value));
    }

    std::size_t n_states() const noexcept { return n_states_; }
    std::size_t n_actions() const noexcept { return n_actions_; }
    std::size_t size() const noexcept { return entries_.size(); }

    const Dist& at(StateId x, ActionId a) const { return entries_.at(offset(x, a)); }
    Dist& at(StateId x, ActionId a) { return entries_.at(offset(x, a)); }
    const Dist& operator[](std::size_t i) const { return entries_[i]; }
    Dist& operator[](std::size_t i) { return entries_[i]; }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    bool same_shape(const Collection& other) const {
        return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
    }

private:
    std::size_t offset(StateId x, ActionId a) const {
        if (x >= n_states_ || a >= n_actions_) throw std::out_of_range("Collection: id out of range");
        return x * n_actions_ + a;
    }

    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<Dist> entries_;
};

using AtomicCollection = Collection<AtomicDistribution>;
using CategoricalCollection = Collection<CategoricalDistribution>;

AtomicCollection to_atomic(const CategoricalCollection& eta);
CategoricalCollection cramer_project(const AtomicCollection& mu, const Grid& grid);
std::size_t total_atoms(const AtomicCollection& mu);
std::size_t max_atoms(const AtomicCollection& mu);

/// max over (x, a) of W_p between corresponding entries.
template <class Dist>
double sup_wasserstein(const Collection<Dist>& lhs, const Collection<Dist>& rhs, double p) {
    if (!lhs.same_shape(rhs)) throw std::invalid_argument("sup_wasserstein: mismatched index sets");
    double best = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double d = wasserstein(lhs[i], rhs[i], p);
        if (d > best) best = d;
    }
    return best;
}

/// Entrywise dominance of every pair.
template <class Dist>
bool dominates_entrywise(const Collection<Dist>& upper, const Collection<Dist>& lower) {
    if (!upper.same_shape(lower)) throw std::invalid_argument("dominates_entrywise: mismatched index sets");
    for (std::size_t i = 0; i < upper.size(); ++i) {
        if (!stochastically_dominates(upper[i], lower[i])) return false;
    }
    return true;
}

}  // namespace osdrl
