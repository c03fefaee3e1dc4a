#include "osdrl/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace osdrl {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr double kMixtureWeightTolerance = 1e-10;
constexpr double kDominanceSlack = 1e-12;

}  // namespace

AtomicDistribution normalized_from_pairs(std::vector<std::pair<double, double>> pairs) {
    double total = 0.0;
    for (const auto& [z, w] : pairs) {
        if (!std::isfinite(z)) throw std::invalid_argument("AtomicDistribution: non-finite atom");
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("AtomicDistribution: negative or non-finite weight");
        total += w;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw std::invalid_argument("AtomicDistribution: weights sum to " + std::to_string(total));
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });

    AtomicDistribution out;
    out.atoms_.reserve(pairs.size());
    out.weights_.reserve(pairs.size());
    double cluster_start = 0.0;
    for (const auto& [z, w] : pairs) {
        if (w == 0.0) continue;
        if (!out.atoms_.empty() && z - cluster_start <= kAtomMergeTolerance) {
            out.weights_.back() += w;
            continue;
        }
        cluster_start = z;
        out.atoms_.push_back(z);
        out.weights_.push_back(w);
    }
    double kept = 0.0;
    for (double w : out.weights_) kept += w;
    for (double& w : out.weights_) w /= kept;
    return out;
}

AtomicDistribution::AtomicDistribution(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.size() != weights.size() || atoms.empty()) {
        throw std::invalid_argument("AtomicDistribution: atoms and weights must be non-empty and of equal length");
    }
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) pairs.emplace_back(atoms[i], weights[i]);
    *this = normalized_from_pairs(std::move(pairs));
}

double AtomicDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) m += weights_[i] * atoms_[i];
    return m;
}

double AtomicDistribution::cdf(double z) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms_.size() && atoms_[i] <= z; ++i) acc += weights_[i];
    return std::min(acc, 1.0);
}

nlohmann::json AtomicDistribution::to_json() const {
    return {{"atoms", atoms_}, {"weights", weights_}};
}

AtomicDistribution AtomicDistribution::from_json(const nlohmann::json& doc) {
    return AtomicDistribution(doc.at("atoms").get<std::vector<double>>(),
                              doc.at("weights").get<std::vector<double>>());
}

Grid::Grid(std::vector<double> points) {
    if (points.size() < 2) throw std::invalid_argument("Grid: need at least two support points");
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!std::isfinite(points[k])) throw std::invalid_argument("Grid: non-finite support point");
        if (k > 0 && !(points[k] > points[k - 1])) {
            throw std::invalid_argument("Grid: support must be strictly increasing");
        }
    }
    points_ = std::make_shared<const std::vector<double>>(std::move(points));
}

CategoricalDistribution::CategoricalDistribution(Grid grid, std::vector<double> probs)
    : grid_(std::move(grid)), probs_(std::move(probs)) {
    if (probs_.size() != grid_.size()) throw std::invalid_argument("CategoricalDistribution: probs/grid size mismatch");
    double total = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("CategoricalDistribution: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw std::invalid_argument("CategoricalDistribution: probabilities sum to " + std::to_string(total));
    }
}

CategoricalDistribution CategoricalDistribution::unit(Grid grid, std::size_t k) {
    std::vector<double> probs(grid.size(), 0.0);
    probs.at(k) = 1.0;
    return CategoricalDistribution(std::move(grid), std::move(probs));
}

double CategoricalDistribution::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) m += probs_[k] * grid_[k];
    return m;
}

double CategoricalDistribution::total_mass() const {
    double total = 0.0;
    for (double p : probs_) total += p;
    return total;
}

nlohmann::json CategoricalDistribution::to_json() const {
    return {{"grid", std::vector<double>(grid_.points().begin(), grid_.points().end())}, {"probs", probs_}};
}

CategoricalDistribution CategoricalDistribution::from_json(const nlohmann::json& doc) {
    return CategoricalDistribution(Grid(doc.at("grid").get<std::vector<double>>()),
                                   doc.at("probs").get<std::vector<double>>());
}

AtomicDistribution to_atomic(const CategoricalDistribution& eta) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) {
        if (eta.probs()[k] > 0.0) pairs.emplace_back(eta.grid()[k], eta.probs()[k]);
    }
    return normalized_from_pairs(std::move(pairs));
}

AtomicDistribution dirac(double z) {
    if (!std::isfinite(z)) throw std::invalid_argument("dirac: location must be finite");
    return AtomicDistribution({z}, {1.0});
}

AtomicDistribution pushforward_affine(const AtomicDistribution& nu, double r0, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("pushforward_affine: gamma must lie in [0, 1)");
    if (gamma == 0.0) return dirac(r0);
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) pairs.emplace_back(r0 + gamma * nu.atoms()[i], nu.weights()[i]);
    return normalized_from_pairs(std::move(pairs));
}

AtomicDistribution mixture(std::span<const WeightedComponent> components) {
    double total = 0.0;
    std::size_t n_atoms = 0;
    for (const auto& c : components) {
        if (!std::isfinite(c.weight) || c.weight < 0.0) throw std::invalid_argument("mixture: negative weight");
        if (c.distribution == nullptr) throw std::invalid_argument("mixture: null component");
        total += c.weight;
        n_atoms += c.distribution->size();
    }
    if (std::abs(total - 1.0) > kMixtureWeightTolerance) {
        throw std::invalid_argument("mixture: weights sum to " + std::to_string(total));
    }
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(n_atoms);
    for (const auto& c : components) {
        if (c.weight == 0.0) continue;
        const auto& d = *c.distribution;
        for (std::size_t i = 0; i < d.size(); ++i) pairs.emplace_back(d.atoms()[i], c.weight * d.weights()[i]);
    }
    return normalized_from_pairs(std::move(pairs));
}

double wasserstein(const AtomicDistribution& lhs, const AtomicDistribution& rhs, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("wasserstein: p must be finite and >= 1");
    const auto la = lhs.atoms();
    const auto lw = lhs.weights();
    const auto ra = rhs.atoms();
    const auto rw = rhs.weights();
    std::size_t i = 0;
    std::size_t j = 0;
    double cum_l = lw[0];
    double cum_r = rw[0];
    double prev = 0.0;
    double integral = 0.0;
    // The quantile functions are constant between consecutive merged breakpoints.
    while (i < la.size() && j < ra.size()) {
        const double tau = std::min(cum_l, cum_r);
        const double gap = std::abs(la[i] - ra[j]);
        const double width = tau - prev;
        if (width > 0.0) integral += (p == 1.0 ? gap : std::pow(gap, p)) * width;
        prev = tau;
        if (cum_l < cum_r) {
            if (++i < la.size()) cum_l += lw[i];
        } else if (cum_r < cum_l) {
            if (++j < ra.size()) cum_r += rw[j];
        } else {
            if (++i < la.size()) cum_l += lw[i];
            if (++j < ra.size()) cum_r += rw[j];
        }
    }
    return p == 1.0 ? integral : std::pow(integral, 1.0 / p);
}

double wasserstein(const CategoricalDistribution& lhs, const CategoricalDistribution& rhs, double p) {
    if (p == 1.0 && lhs.grid() == rhs.grid()) return wasserstein1_same_grid(lhs, rhs);
    return wasserstein(to_atomic(lhs), to_atomic(rhs), p);
}

double wasserstein1_same_grid(const CategoricalDistribution& lhs, const CategoricalDistribution& rhs) {
    if (!(lhs.grid() == rhs.grid())) throw std::invalid_argument("wasserstein1_same_grid: grids differ");
    const auto& grid = lhs.grid();
    double cdf_l = 0.0;
    double cdf_r = 0.0;
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        cdf_l += lhs.probs()[k];
        cdf_r += rhs.probs()[k];
        area += std::abs(cdf_l - cdf_r) * (grid[k + 1] - grid[k]);
    }
    return area;
}

ProjectedDirac project_dirac(double z, const Grid& grid) {
    const std::size_t last = grid.size() - 1;
    if (z <= grid.front()) return {0, 0, 1.0, 0.0, z < grid.front()};
    if (z > grid.back()) return {last, last, 1.0, 0.0, true};
    // First point >= z; z lies in (z_{upper-1}, z_upper].
    const auto points = grid.points();
    const auto it = std::lower_bound(points.begin(), points.end(), z);
    const std::size_t upper = static_cast<std::size_t>(it - points.begin());
    const std::size_t lower = upper - 1;
    const double width = grid[upper] - grid[lower];
    const double upper_weight = (z - grid[lower]) / width;
    return {lower, upper, 1.0 - upper_weight, upper_weight, false};
}

CategoricalDistribution cramer_project(const AtomicDistribution& nu, const Grid& grid) {
    std::vector<double> probs(grid.size(), 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const auto cell = project_dirac(nu.atoms()[i], grid);
        const double w = nu.weights()[i];
        probs[cell.lower] += w * cell.lower_weight;
        probs[cell.upper] += w * cell.upper_weight;
    }
    return CategoricalDistribution(grid, std::move(probs));
}

bool stochastically_dominates(const AtomicDistribution& upper, const AtomicDistribution& lower) {
    const auto ua = upper.atoms();
    const auto uw = upper.weights();
    const auto la = lower.atoms();
    const auto lw = lower.weights();
    std::size_t i = 0;
    std::size_t j = 0;
    double cdf_u = 0.0;
    double cdf_l = 0.0;
    while (i < ua.size() || j < la.size()) {
        const double z = (j >= la.size() || (i < ua.size() && ua[i] <= la[j])) ? ua[i] : la[j];
        while (i < ua.size() && ua[i] <= z) cdf_u += uw[i++];
        while (j < la.size() && la[j] <= z) cdf_l += lw[j++];
        if (cdf_u > cdf_l + kDominanceSlack) return false;
    }
    return true;
}

bool stochastically_dominates(const CategoricalDistribution& upper, const CategoricalDistribution& lower) {
    return stochastically_dominates(to_atomic(upper), to_atomic(lower));
}

double kl_divergence(const CategoricalDistribution& target, const CategoricalDistribution& model) {
    if (!(target.grid() == model.grid())) throw std::invalid_argument("kl_divergence: grids differ");
    double kl = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
        const double t = target.probs()[k];
        if (t == 0.0) continue;
        const double m = model.probs()[k];
        if (m == 0.0) throw std::domain_error("kl_divergence: target not absolutely continuous w.r.t. model");
        kl += t * std::log(t / m);
    }
    return std::max(kl, 0.0);
}

AtomicCollection to_atomic(const CategoricalCollection& eta) {
    std::vector<AtomicDistribution> entries;
    entries.reserve(eta.size());
    for (const auto& e : eta) entries.push_back(to_atomic(e));
    return AtomicCollection(eta.n_states(), eta.n_actions(), std::move(entries));
}

CategoricalCollection cramer_project(const AtomicCollection& mu, const Grid& grid) {
    std::vector<CategoricalDistribution> entries;
    entries.reserve(mu.size());
    for (const auto& e : mu) entries.push_back(cramer_project(e, grid));
    return CategoricalCollection(mu.n_states(), mu.n_actions(), std::move(entries));
}

std::size_t total_atoms(const AtomicCollection& mu) {
    std::size_t n = 0;
    for (const auto& e : mu) n += e.size();
    return n;
}

std::size_t max_atoms(const AtomicCollection& mu) {
    std::size_t n = 0;
    for (const auto& e : mu) n = std::max(n, e.size());
    return n;
}

}  // namespace osdrl
