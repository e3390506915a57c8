#ifndef MFC_LINEAR_MODEL_HPP
#define MFC_LINEAR_MODEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfc/basis.hpp"
#include "mfc/measure.hpp"
#include "mfc/model.hpp"
#include "mfc/simplex_grid.hpp"

namespace mfc {

/**
 * Model that is linear in a feature family: per (x, u),
 *   cost(mu)  = phi(mu) . theta[xu]
 *   kernel(mu) = phi(mu)^T q[xu]   (row of q per feature, column per state),
 * where the kernel output is a signed row until normalized. Flags record
 * which pairs were actually fit and which fits were rank-deficient.
 */
struct LinearModel {
  int n_states = 0;
  int n_actions = 0;
  BasisFamily basis;
  std::vector<Eigen::VectorXd> theta;  ///< [xu], length basis.dimension
  std::vector<Eigen::MatrixXd> q;      ///< [xu], basis.dimension x n_states
  std::vector<std::uint8_t> learned;   ///< zero-filled pairs stay 0
  std::vector<std::uint8_t> rank_deficient;

  int pair_count() const { return n_states * n_actions; }
  int pair_index(int x, int u) const { return x * n_actions + u; }
};

/// Zero-initialized linear model over a basis.
inline LinearModel make_linear_model(int n_states, int n_actions, BasisFamily basis) {
  if (n_states < 1 || n_actions < 1)
    throw std::invalid_argument("make_linear_model: empty state or action set");
  LinearModel lm;
  lm.n_states = n_states;
  lm.n_actions = n_actions;
  lm.basis = std::move(basis);
  const int pairs = n_states * n_actions;
  lm.theta.assign(static_cast<std::size_t>(pairs), Eigen::VectorXd::Zero(lm.basis.dimension));
  lm.q.assign(static_cast<std::size_t>(pairs),
              Eigen::MatrixXd::Zero(lm.basis.dimension, n_states));
  lm.learned.assign(static_cast<std::size_t>(pairs), 0);
  lm.rank_deficient.assign(static_cast<std::size_t>(pairs), 0);
  return lm;
}

inline Eigen::VectorXd eval_features(const LinearModel& lm, int x, int u, const Measure& mu) {
  const auto phi = lm.basis.eval(x, u, mu);
  return Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
}

inline double eval_linear_cost(const LinearModel& lm, int x, int u, const Measure& mu) {
  return eval_features(lm, x, u, mu).dot(lm.theta[static_cast<std::size_t>(lm.pair_index(x, u))]);
}

/// Raw (possibly signed) kernel row in feature space.
inline SignedMeasure eval_linear_kernel(const LinearModel& lm, int x, int u, const Measure& mu) {
  const Eigen::VectorXd phi = eval_features(lm, x, u, mu);
  const Eigen::VectorXd row =
      lm.q[static_cast<std::size_t>(lm.pair_index(x, u))].transpose() * phi;
  return SignedMeasure(std::vector<double>(row.data(), row.data() + row.size()));
}

/// Projection of a signed row onto the simplex with its diagnostics.
struct NormalizedRow {
  Measure measure;
  bool degenerate = false;   ///< total clipped mass below 1e-9, uniform substituted
  double shift_tv = 0.0;     ///< half-l1 distance from the raw row to the result
};

/**
 * Clip negatives to zero and renormalize; rows whose clipped mass is below
 * 1e-9 degenerate to uniform. A final closure pass rewrites the last
 * positive-residual entry as one minus the sum of everything before it, so
 * the weights re-sum to exactly one under left-to-right accumulation and the
 * projection is idempotent bit for bit.
 */
inline NormalizedRow normalize_to_measure(const SignedMeasure& row) {
  std::vector<double> w(row.v);
  for (double& v : w) v = std::max(v, 0.0);
  double sum = 0.0;
  for (double v : w) sum += v;
  bool degenerate = false;
  if (sum < 1e-9) {
    degenerate = true;
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
  } else if (sum != 1.0) {
    for (double& v : w) v /= sum;
  }
  // Closure: walking the pivot down from the end, 1 - prefix is exact for
  // prefix in [1/2, 1] and within half an ulp otherwise, so the rewritten
  // entry always restores an exact unit sum; entries zeroed on the way carry
  // only rounding-scale mass. Rerunning the pass reproduces its own output.
  for (std::size_t pivot = w.size(); pivot-- > 0;) {
    double prefix = 0.0;
    for (std::size_t i = 0; i < pivot; ++i) prefix += w[i];
    const double closing = 1.0 - prefix;
    if (closing > 0.0) {
      w[pivot] = closing;
      break;
    }
    w[pivot] = 0.0;
  }
  NormalizedRow out{Measure(w), degenerate, 0.0};
  double l1 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) l1 += std::abs(row.v[i] - out.measure[static_cast<int>(i)]);
  out.shift_tv = 0.5 * l1;
  return out;
}

/**
 * Wrap a linear model as an executable mean-field model: cost as-is, kernel
 * rows pushed through normalize_to_measure. The wrapped kernel is what every
 * consumer (flows, planners, mismatch measurements) sees, so normalization
 * error is part of the executed model rather than a hidden extra.
 */
inline FiniteMFCModel as_mfc_model(const LinearModel& lm, std::string name = "learned") {
  auto shared = std::make_shared<LinearModel>(lm);
  return make_model(
      lm.n_states, lm.n_actions, std::move(name),
      [shared](int x, int u, const Measure& mu) {
        return normalize_to_measure(eval_linear_kernel(*shared, x, u, mu)).measure;
      },
      [shared](int x, int u, const Measure& mu) { return eval_linear_cost(*shared, x, u, mu); });
}

/// Largest normalization shift over the grid; report alongside mismatch.
inline double max_projection_shift(const LinearModel& lm, const SimplexGrid& grid) {
  double worst = 0.0;
  for (const Measure& mu : grid.reps)
    for (int x = 0; x < lm.n_states; ++x)
      for (int u = 0; u < lm.n_actions; ++u)
        worst = std::max(worst,
                         normalize_to_measure(eval_linear_kernel(lm, x, u, mu)).shift_tv);
  return worst;
}

/// Piecewise-constant fit error bounds from model smoothness: a function
/// with tv-Lipschitz modulus k deviates from its bin average by at most
/// k * L within a bin of diameter at most L.
struct DiscretizationBound {
  double cost_sup_error = 0.0;
  double kernel_sup_error = 0.0;
};

inline DiscretizationBound discretization_error_bound(const ModelConstants& constants,
                                                      const SimplexGrid& grid) {
  return DiscretizationBound{constants.k_c * grid.max_bin_diameter,
                             constants.k_f * grid.max_bin_diameter};
}

/// Per-(x,u) uniform-error certificate from fit residuals and data coverage.
struct PairCertificate {
  double measured_sup_cost_error = 0.0;    ///< max |c - fit| on the fine grid
  double measured_sup_kernel_tv = 0.0;     ///< max tv(kernel row, normalized fit row)
  double bound_cost = 0.0;                 ///< certificate for the cost error
  double bound_kernel_tv = 0.0;            ///< certificate for the kernel tv error
  double eps_cost = 0.0;                   ///< L2 residual of the cost fit on the sample
  double kappa = 0.0;                      ///< min over grid of P(ball of diameter sqrt(eps))/sqrt(eps)
  double k_inst_cost = 0.0;                ///< instantiated Lipschitz-style constant
  int uncovered_points = 0;                ///< fine-grid points with an empty data ball
};

struct UniformErrorCertificate {
  std::vector<PairCertificate> pairs;  ///< indexed x * n_actions + u
  double radius = 0.0;
  std::string constant_note;  ///< provenance of the instantiated constant
};

/**
 * Smoothness-based certificate for a fitted linear model against the true
 * model, evaluated on a fine grid with a training sample playing the data
 * distribution: the sup error at mu is bounded by
 *   K (eps / P(B_r(mu)) + r),
 * with B_r the open ball of diameter r, eps the root-mean-square residual on
 * the sample, and K = lipschitz_bound * (1 + coefficient gap). The gap is
 * the caller's bound on |true coefficients - fitted| (l1); when absent it is
 * bounded from the fit itself via the smallest Gram eigenvalue. Points whose
 * ball holds no sample are uncovered and excluded from the reported sup.
 * Requires the basis to carry a Lipschitz bound.
 */
inline UniformErrorCertificate uniform_error_certificate(
    const LinearModel& lm, const FiniteMFCModel& model, const SimplexGrid& fine_grid,
    const std::vector<Measure>& sample, double radius, double coef_gap_override = -1.0) {
  if (!lm.basis.lipschitz_bound)
    throw std::invalid_argument(
        "uniform_error_certificate: basis carries no Lipschitz bound (indicator-style bases "
        "use the bin-diameter bound instead)");
  if (sample.empty()) throw std::invalid_argument("uniform_error_certificate: empty sample");
  if (radius <= 0.0) throw std::invalid_argument("uniform_error_certificate: radius must be positive");
  const double lip = *lm.basis.lipschitz_bound;
  const double sample_w = 1.0 / static_cast<double>(sample.size());

  UniformErrorCertificate out;
  out.radius = radius;
  out.constant_note =
      "constant = basis lipschitz bound * (1 + coefficient gap); derived from the fit "
      "guarantee, wider than the bare smoothness modulus";
  out.pairs.resize(static_cast<std::size_t>(lm.pair_count()));

  for (int x = 0; x < lm.n_states; ++x) {
    for (int u = 0; u < lm.n_actions; ++u) {
      PairCertificate& cert = out.pairs[static_cast<std::size_t>(lm.pair_index(x, u))];

      // Residuals on the sample.
      double sq_cost = 0.0;
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(lm.basis.dimension, lm.basis.dimension);
      std::vector<double> sq_kernel_coord(static_cast<std::size_t>(lm.n_states), 0.0);
      for (const Measure& mu : sample) {
        const Eigen::VectorXd phi = eval_features(lm, x, u, mu);
        gram += sample_w * phi * phi.transpose();
        const double rc = model.cost(x, u, mu) - eval_linear_cost(lm, x, u, mu);
        sq_cost += sample_w * rc * rc;
        const Measure row = model.kernel(x, u, mu);
        const SignedMeasure fit = eval_linear_kernel(lm, x, u, mu);
        for (int z = 0; z < lm.n_states; ++z) {
          const double rz = row[z] - fit.v[static_cast<std::size_t>(z)];
          sq_kernel_coord[static_cast<std::size_t>(z)] += sample_w * rz * rz;
        }
      }
      cert.eps_cost = std::sqrt(sq_cost);

      // Coefficient gap: caller-supplied, or 2 eps sqrt(d) / sqrt(lambda_min).
      const double lambda_min =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().minCoeff();
      auto gap_for = [&](double eps) {
        if (coef_gap_override >= 0.0) return coef_gap_override;
        if (lambda_min <= 0.0) return std::numeric_limits<double>::infinity();
        return 2.0 * eps * std::sqrt(static_cast<double>(lm.basis.dimension) / lambda_min);
      };
      cert.k_inst_cost = lip * (1.0 + gap_for(cert.eps_cost));

      // Coverage of the fine grid by data balls (open, diameter = radius).
      auto ball_mass = [&](const Measure& mu, double diameter) {
        double mass = 0.0;
        for (const Measure& s : sample)
          if (tv_distance(mu, s) < 0.5 * diameter) mass += sample_w;
        return mass;
      };

      double kappa = std::numeric_limits<double>::infinity();
      const double kappa_diam = std::sqrt(std::max(cert.eps_cost, 1e-300));
      double bound_cost = 0.0;
      std::vector<double> bound_kernel_coord(static_cast<std::size_t>(lm.n_states), 0.0);
      for (const Measure& mu : fine_grid.reps) {
        const double mass = ball_mass(mu, radius);
        if (mass == 0.0) {
          ++cert.uncovered_points;
          continue;
        }
        bound_cost = std::max(bound_cost,
                              cert.k_inst_cost * (cert.eps_cost / mass + radius));
        for (int z = 0; z < lm.n_states; ++z) {
          const double eps_z = std::sqrt(sq_kernel_coord[static_cast<std::size_t>(z)]);
          const double k_z = lip * (1.0 + gap_for(eps_z));
          bound_kernel_coord[static_cast<std::size_t>(z)] =
              std::max(bound_kernel_coord[static_cast<std::size_t>(z)],
                       k_z * (eps_z / mass + radius));
        }
        if (cert.eps_cost > 0.0)
          kappa = std::min(kappa, ball_mass(mu, kappa_diam) / std::sqrt(cert.eps_cost));

        // Measured sup errors at covered points.
        cert.measured_sup_cost_error =
            std::max(cert.measured_sup_cost_error,
                     std::abs(model.cost(x, u, mu) - eval_linear_cost(lm, x, u, mu)));
        const Measure row = model.kernel(x, u, mu);
        const Measure fit = normalize_to_measure(eval_linear_kernel(lm, x, u, mu)).measure;
        cert.measured_sup_kernel_tv = std::max(cert.measured_sup_kernel_tv, tv_distance(row, fit));
      }
      cert.bound_cost = bound_cost;
      double half_sum = 0.0;
      for (double b : bound_kernel_coord) half_sum += b;
      // Normalization can only halve-shift within the same l1 budget: the
      // projected row is no farther from the truth than twice the raw row.
      cert.bound_kernel_tv = 0.5 * half_sum * 2.0;
      cert.kappa = std::isfinite(kappa) ? kappa : 0.0;
    }
  }
  return out;
}

}  // namespace mfc

#endif  // MFC_LINEAR_MODEL_HPP
