#ifndef MFC_BASIS_HPP
#define MFC_BASIS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfc/measure.hpp"
#include "mfc/simplex_grid.hpp"

namespace mfc {

/**
 * Feature family over (x, u, mu). Components are required to be bounded by
 * one in sup norm and linearly independent as functions (see
 * validate_basis); lipschitz_bound, when set, is an upper bound on every
 * component's tv-Lipschitz modulus in mu and gates the smoothness-based
 * uniform-error certificate.
 */
struct BasisFamily {
  std::string name;
  int dimension = 0;
  std::function<std::vector<double>(int x, int u, const Measure& mu)> eval;
  std::optional<double> lipschitz_bound;
};

/**
 * Moment features shared across (x, u): [1, mu(1), ..., mu(n-1)] for
 * degree 1, plus squares of the same coordinates for degree 2. Coordinate 0
 * is dropped because it is affinely determined by the others on the simplex,
 * which would break linear independence. Component Lipschitz modulus: 1 for
 * degree one, 2 for the squares.
 */
inline BasisFamily moment_basis(int n_states, int degree) {
  if (n_states < 2) throw std::invalid_argument("moment_basis: need at least two states");
  if (degree < 1 || degree > 2) throw std::invalid_argument("moment_basis: degree must be 1 or 2");
  BasisFamily b;
  b.name = "moments_deg" + std::to_string(degree);
  b.dimension = 1 + (n_states - 1) * degree;
  b.lipschitz_bound = static_cast<double>(degree);
  b.eval = [n_states, degree](int, int, const Measure& mu) {
    if (mu.size() != n_states)
      throw std::invalid_argument("moment_basis: population support mismatch");
    std::vector<double> phi;
    phi.reserve(static_cast<std::size_t>(1 + (n_states - 1) * degree));
    phi.push_back(1.0);
    for (int y = 1; y < n_states; ++y) phi.push_back(mu[y]);
    if (degree == 2)
      for (int y = 1; y < n_states; ++y) phi.push_back(mu[y] * mu[y]);
    return phi;
  };
  return b;
}

/**
 * Bin indicators of a simplex grid: component i is 1 exactly on bin i.
 * Discontinuous, so no Lipschitz bound; under any population distribution
 * the Gram matrix is diagonal with the bin masses on the diagonal.
 */
inline BasisFamily indicator_basis(const SimplexGrid& grid) {
  if (grid.size() == 0) throw std::invalid_argument("indicator_basis: empty grid");
  BasisFamily b;
  b.name = "indicator_m" + std::to_string(grid.resolution);
  b.dimension = grid.size();
  b.lipschitz_bound = std::nullopt;
  b.eval = [grid](int, int, const Measure& mu) {
    std::vector<double> phi(static_cast<std::size_t>(grid.size()), 0.0);
    phi[static_cast<std::size_t>(grid.project(mu))] = 1.0;
    return phi;
  };
  return b;
}

/**
 * Check the family's standing assumptions on a grid: every component
 * bounded by one in absolute value, and the feature matrix over the grid has
 * full column rank for each (x, u). Throws on violation.
 */
inline void validate_basis(const BasisFamily& basis, const SimplexGrid& grid, int n_states,
                           int n_actions) {
  if (basis.dimension <= 0) throw std::invalid_argument("validate_basis: empty basis");
  for (int x = 0; x < n_states; ++x) {
    for (int u = 0; u < n_actions; ++u) {
      Eigen::MatrixXd design(grid.size(), basis.dimension);
      for (int i = 0; i < grid.size(); ++i) {
        const auto phi = basis.eval(x, u, grid.reps[static_cast<std::size_t>(i)]);
        if (static_cast<int>(phi.size()) != basis.dimension)
          throw std::invalid_argument("validate_basis: eval returned wrong dimension");
        for (int j = 0; j < basis.dimension; ++j) {
          if (std::abs(phi[static_cast<std::size_t>(j)]) > 1.0 + 1e-12)
            throw std::invalid_argument("validate_basis: component " + std::to_string(j) +
                                        " exceeds the unit sup bound");
          design(i, j) = phi[static_cast<std::size_t>(j)];
        }
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
      if (cod.rank() < basis.dimension)
        throw std::invalid_argument("validate_basis: components linearly dependent on the grid (rank " +
                                    std::to_string(cod.rank()) + " < " +
                                    std::to_string(basis.dimension) + ")");
    }
  }
}

}  // namespace mfc

#endif  // MFC_BASIS_HPP
