#ifndef MFC_SIMPLEX_GRID_HPP
#define MFC_SIMPLEX_GRID_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mfc/measure.hpp"

namespace mfc {

/**
 * Finite quantization of the probability simplex over n_states points.
 *
 * Representatives are the type-m lattice measures (all weights multiples of
 * 1/m), enumerated with the first coordinate descending so the point mass at
 * state 0 is always index 0. Bins are nearest-representative cells in total
 * variation, ties broken toward the lowest index.
 *
 * max_bin_diameter bounds the tv distance between any two points of one bin:
 * twice the lattice covering radius, which is tight for bins away from the
 * simplex boundary and a safe overestimate for the rest, and never exceeds
 * (n_states - 1) / m.
 */
struct SimplexGrid {
  int n_states = 0;
  int resolution = 0;
  std::vector<Measure> reps;
  double max_bin_diameter = 0.0;

  int size() const { return static_cast<int>(reps.size()); }

  /// Index of the nearest representative (lowest index on ties).
  int project(const Measure& mu) const {
    if (mu.size() != n_states)
      throw std::invalid_argument("SimplexGrid::project: support size mismatch");
    int best = 0;
    double best_d = tv_distance(mu, reps[0]);
    for (int i = 1; i < size(); ++i) {
      const double d = tv_distance(mu, reps[static_cast<std::size_t>(i)]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  /// tv distance from mu to its representative.
  double projection_distance(const Measure& mu) const {
    return tv_distance(mu, reps[static_cast<std::size_t>(project(mu))]);
  }
};

namespace detail {

inline void enumerate_compositions(int total, int parts, std::vector<int>& prefix,
                                   std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = total; k >= 0; --k) {
    prefix.push_back(k);
    enumerate_compositions(total - k, parts - 1, prefix, out);
    prefix.pop_back();
  }
}

/// All nonnegative integer vectors of length `parts` summing to `total`,
/// first coordinate descending.
inline std::vector<std::vector<int>> compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> prefix;
  enumerate_compositions(total, parts, prefix, out);
  return out;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace detail

/**
 * Build the resolution-m grid. Throws for m < 1 or n_states < 1.
 * Representative count is C(m + n_states - 1, n_states - 1).
 */
inline SimplexGrid build_grid(int n_states, int m) {
  if (n_states < 1) throw std::invalid_argument("build_grid: n_states must be positive");
  if (m < 1) throw std::invalid_argument("build_grid: resolution must be positive");
  SimplexGrid g;
  g.n_states = n_states;
  g.resolution = m;
  for (const auto& comp : detail::compositions(m, n_states)) {
    std::vector<double> w(static_cast<std::size_t>(n_states));
    for (int i = 0; i < n_states; ++i) w[static_cast<std::size_t>(i)] = static_cast<double>(comp[static_cast<std::size_t>(i)]) / m;
    g.reps.push_back(Measure(std::move(w)));
  }
  if (n_states == 1) {
    g.max_bin_diameter = 0.0;
  } else {
    // Covering radius of the type-m lattice under tv is
    // floor(n/2)*ceil(n/2)/(n*m); a bin fits in a ball of that radius.
    const double half = static_cast<double>(n_states / 2) *
                        static_cast<double>((n_states + 1) / 2) /
                        (static_cast<double>(n_states) * static_cast<double>(m));
    g.max_bin_diameter = std::min(1.0, 2.0 * half);
  }
  return g;
}

/// Nearest-representative index; convenience wrapper over SimplexGrid::project.
inline int project_to_grid(const SimplexGrid& grid, const Measure& mu) {
  return grid.project(mu);
}

}  // namespace mfc

#endif  // MFC_SIMPLEX_GRID_HPP
