#pragma once

// Independent reference computations. Nothing here calls into the library
// beyond reading raw atoms, weights and kernel entries.

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>
#include <vector>

#include "osdrl/distributions.hpp"
#include "osdrl/mdp.hpp"

namespace oracle {

using Atoms = std::vector<std::pair<double, double>>;  // (location, weight)

inline Atoms atoms_of(const osdrl::AtomicDistribution& nu) {
    Atoms out;
    for (std::size_t i = 0; i < nu.size(); ++i) out.emplace_back(nu.atoms()[i], nu.weights()[i]);
    return out;
}

inline double cdf(const Atoms& nu, double z) {
    double total = 0.0;
    for (const auto& [loc, w] : nu) {
        if (loc <= z) total += w;
    }
    return total;
}

/// Area between CDFs by a left Riemann sum with step h over [lo, hi).
inline double riemann_w1(const Atoms& a, const Atoms& b, double lo, double hi, double h) {
    double area = 0.0;
    for (double z = lo; z < hi; z += h) area += std::abs(cdf(a, z) - cdf(b, z)) * h;
    return area;
}

/// Largest CDF gap over the union of breakpoints: 0 means same distribution.
inline double cdf_gap(const Atoms& a, const Atoms& b) {
    double gap = 0.0;
    for (const auto* side : {&a, &b}) {
        for (const auto& [loc, w] : *side) gap = std::max(gap, std::abs(cdf(a, loc) - cdf(b, loc)));
    }
    return gap;
}

/// Value iteration on raw kernel entries, run to machine precision.
inline std::vector<double> optimal_values(const osdrl::TabularMdp& mdp) {
    std::vector<double> v(mdp.n_states(), 0.0);
    for (int sweep = 0; sweep < 5000; ++sweep) {
        std::vector<double> next(mdp.n_states(), -1e300);
        for (std::size_t x = 0; x < mdp.n_states(); ++x) {
            for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
                double q = 0.0;
                for (std::size_t y = 0; y < mdp.n_states(); ++y) {
                    q += mdp.prob(x, a, y) * (mdp.reward(x, a, y) + mdp.discount() * v[y]);
                }
                next[x] = std::max(next[x], q);
            }
        }
        v = next;
    }
    return v;
}

/// Shortest number of moves from `start` to `goal` on the 4x4 Frozen Lake map
/// avoiding holes, by breadth-first search over grid moves.
inline int lake_shortest_path(int start, int goal) {
    const char* map = "SFFFFHFHFFFHHFFG";
    std::vector<int> dist(16, -1);
    std::deque<int> queue{start};
    dist[start] = 0;
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        const int r = s / 4;
        const int c = s % 4;
        const int moves[4][2] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
        for (const auto& m : moves) {
            const int nr = r + m[0];
            const int nc = c + m[1];
            if (nr < 0 || nr > 3 || nc < 0 || nc > 3) continue;
            const int n = nr * 4 + nc;
            if (map[n] == 'H' || dist[n] >= 0) continue;
            dist[n] = dist[s] + 1;
            queue.push_back(n);
        }
    }
    return dist[goal];
}

}  // namespace oracle
