#ifndef MFC_GALLERY_HPP
#define MFC_GALLERY_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfc/measure.hpp"
#include "mfc/model.hpp"
#include "mfc/rng.hpp"
#include "mfc/simplex_grid.hpp"

namespace mfc {

/**
 * Stage cost of the form
 *   c(x,u,mu) = base[xu] + sum_y slope[xu][y] mu(y)
 *               + wave_amp * sin(wave_freq * mu(wave_coord)),
 * affine in mu with an optional smooth wave for nonlinearity.
 */
struct CostSpec {
  std::vector<double> base;   // [x*n_actions+u]
  std::vector<double> slope;  // [(x*n_actions+u)*n_states + y]
  double wave_amp = 0.0;
  double wave_freq = 0.0;
  int wave_coord = 0;
};

/**
 * Kernel of the form
 *   T(.|x,u,mu) = (1-blend) anchor[xu] + blend sum_y mu(y) directions[xu][y],
 * a probability measure for every mu since it is a convex combination of
 * rows. blend = 0 gives population-independent kernels (identity, constant);
 * directions[xu][y] = dirac(y) gives the plain mixture-with-mu kernel.
 */
struct KernelSpec {
  double blend = 0.0;
  std::vector<Measure> anchor;      // [x*n_actions+u]
  std::vector<Measure> directions;  // [(x*n_actions+u)*n_states + y]
};

/**
 * A model together with its analytically known regularity constants and,
 * when the cost has no wave term, the exact coefficients of the model in the
 * reduced degree-one moment features [1, mu(1), ..., mu(n-1)].
 *
 * The analytic constants are exact for affine costs and safe upper bounds
 * when the wave term is on (the wave contributes |amp*freq| to k_c and |amp|
 * to c_sup); certificates must consume upper bounds, so both cases are fit
 * for use.
 */
struct GalleryModel {
  FiniteMFCModel model;
  std::optional<ModelConstants> analytic;
  bool has_linear_truth = false;  ///< truth coefficients are in degree-one moment features
  std::vector<std::vector<double>> theta_truth;               // [xu][feature]
  std::vector<std::vector<std::vector<double>>> q_truth;      // [xu][feature][y]
  /// Set when the truth coefficients live in the indicator basis of this
  /// grid instead of the moment features (piecewise-constant models).
  std::optional<SimplexGrid> truth_grid;
};

namespace detail {

inline int xu_index(int x, int u, int n_actions) { return x * n_actions + u; }

inline Measure eval_kernel_spec(const KernelSpec& ks, int n_states, int xu, const Measure& mu) {
  const Measure& a = ks.anchor[static_cast<std::size_t>(xu)];
  std::vector<double> w(static_cast<std::size_t>(n_states), 0.0);
  for (int z = 0; z < n_states; ++z) w[static_cast<std::size_t>(z)] = (1.0 - ks.blend) * a[z];
  for (int y = 0; y < n_states; ++y) {
    const Measure& r = ks.directions[static_cast<std::size_t>(xu * n_states + y)];
    for (int z = 0; z < n_states; ++z) w[static_cast<std::size_t>(z)] += ks.blend * mu[y] * r[z];
  }
  return Measure(std::move(w));
}

inline double eval_cost_spec(const CostSpec& cs, int n_states, int xu, const Measure& mu) {
  double c = cs.base[static_cast<std::size_t>(xu)];
  for (int y = 0; y < n_states; ++y) c += cs.slope[static_cast<std::size_t>(xu * n_states + y)] * mu[y];
  if (cs.wave_amp != 0.0) c += cs.wave_amp * std::sin(cs.wave_freq * mu[cs.wave_coord]);
  return c;
}

}  // namespace detail

/**
 * Assemble a model from KernelSpec + CostSpec and derive its constants.
 * Everything except the wave term is affine in mu, so kernel constants are
 * exact by vertex enumeration and cost constants are exact (affine) or safe
 * upper bounds (wave on).
 */
inline GalleryModel make_affine_gallery_model(int n_states, int n_actions, std::string name,
                                              KernelSpec kernel, CostSpec cost) {
  const std::size_t pairs = static_cast<std::size_t>(n_states * n_actions);
  if (kernel.anchor.size() != pairs ||
      kernel.directions.size() != pairs * static_cast<std::size_t>(n_states))
    throw std::invalid_argument("make_affine_gallery_model: kernel table sizes");
  if (cost.base.size() != pairs ||
      cost.slope.size() != pairs * static_cast<std::size_t>(n_states))
    throw std::invalid_argument("make_affine_gallery_model: cost table sizes");
  if (kernel.blend < 0.0 || kernel.blend > 1.0)
    throw std::invalid_argument("make_affine_gallery_model: blend outside [0,1]");

  GalleryModel g;
  auto ks = std::make_shared<KernelSpec>(std::move(kernel));
  auto cs = std::make_shared<CostSpec>(std::move(cost));
  g.model = make_model(
      n_states, n_actions, std::move(name),
      [ks, n_states, n_actions](int x, int u, const Measure& mu) {
        return detail::eval_kernel_spec(*ks, n_states, detail::xu_index(x, u, n_actions), mu);
      },
      [cs, n_states, n_actions](int x, int u, const Measure& mu) {
        return detail::eval_cost_spec(*cs, n_states, detail::xu_index(x, u, n_actions), mu);
      });

  ModelConstants mc;
  // k_f: mass shifted between vertices y, yh moves the image between the
  // corresponding direction rows, scaled by blend; exact.
  for (std::size_t xu = 0; xu < pairs; ++xu)
    for (int y = 0; y < n_states; ++y)
      for (int yh = y + 1; yh < n_states; ++yh)
        mc.k_f = std::max(mc.k_f, ks->blend * tv_distance(
                                                 ks->directions[xu * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(y)],
                                                 ks->directions[xu * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(yh)]));
  // delta_t: tv between rows of distinct (x,u),(xh,uh) with x != xh is
  // affine in mu, so the max over mu sits at a vertex; exact.
  for (int y = 0; y < n_states; ++y) {
    const Measure vertex = Measure::dirac(n_states, y);
    for (int x = 0; x < n_states; ++x)
      for (int xh = x + 1; xh < n_states; ++xh)
        for (int u = 0; u < n_actions; ++u)
          for (int uh = 0; uh < n_actions; ++uh)
            mc.delta_t = std::max(
                mc.delta_t,
                tv_distance(detail::eval_kernel_spec(*ks, n_states, detail::xu_index(x, u, n_actions), vertex),
                            detail::eval_kernel_spec(*ks, n_states, detail::xu_index(xh, uh, n_actions), vertex)));
  }
  mc.delta_t = std::min(mc.delta_t, 1.0);
  // k_c and c_sup from vertex values of the affine part, plus wave slack.
  for (std::size_t xu = 0; xu < pairs; ++xu) {
    double lo = cs->base[xu] + cs->slope[xu * static_cast<std::size_t>(n_states)];
    double hi = lo;
    for (int y = 0; y < n_states; ++y) {
      const double v = cs->base[xu] + cs->slope[xu * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(y)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    mc.k_c = std::max(mc.k_c, hi - lo);
    mc.c_sup = std::max(mc.c_sup, std::max(std::abs(lo), std::abs(hi)));
  }
  if (cs->wave_amp != 0.0) {
    mc.k_c += std::abs(cs->wave_amp * cs->wave_freq);
    mc.c_sup += std::abs(cs->wave_amp);
  }
  g.analytic = mc;

  // Exact coefficients in the reduced moment features [1, mu(1), .., mu(n-1)]
  // (only without the wave, which is not linear in any moment feature).
  if (cs->wave_amp == 0.0) {
    g.has_linear_truth = true;
    const int d = n_states;
    g.theta_truth.assign(pairs, std::vector<double>(static_cast<std::size_t>(d), 0.0));
    g.q_truth.assign(pairs, std::vector<std::vector<double>>(
                                static_cast<std::size_t>(d),
                                std::vector<double>(static_cast<std::size_t>(n_states), 0.0)));
    for (std::size_t xu = 0; xu < pairs; ++xu) {
      g.theta_truth[xu][0] = cs->base[xu] + cs->slope[xu * static_cast<std::size_t>(n_states)];
      for (int y = 1; y < n_states; ++y)
        g.theta_truth[xu][static_cast<std::size_t>(y)] =
            cs->slope[xu * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(y)] -
            cs->slope[xu * static_cast<std::size_t>(n_states)];
      const Measure& a = ks->anchor[xu];
      const Measure& r0 = ks->directions[xu * static_cast<std::size_t>(n_states)];
      for (int z = 0; z < n_states; ++z)
        g.q_truth[xu][0][static_cast<std::size_t>(z)] = (1.0 - ks->blend) * a[z] + ks->blend * r0[z];
      for (int y = 1; y < n_states; ++y) {
        const Measure& ry = ks->directions[xu * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(y)];
        for (int z = 0; z < n_states; ++z)
          g.q_truth[xu][static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] =
              ks->blend * (ry[z] - r0[z]);
      }
    }
  }
  return g;
}

/// Frozen-state kernel: every agent stays put; only the cost moves.
inline GalleryModel gallery_identity(int n_states, int n_actions, CostSpec cost) {
  KernelSpec ks;
  ks.blend = 0.0;
  for (int x = 0; x < n_states; ++x)
    for (int u = 0; u < n_actions; ++u) ks.anchor.push_back(Measure::dirac(n_states, x));
  for (int i = 0; i < n_states * n_actions * n_states; ++i)
    ks.directions.push_back(Measure::uniform(n_states));  // unused at blend 0
  return make_affine_gallery_model(n_states, n_actions, "identity", std::move(ks), std::move(cost));
}

/// Population-independent kernel with one fixed row everywhere.
inline GalleryModel gallery_constant(int n_states, int n_actions, const Measure& row,
                                     CostSpec cost) {
  KernelSpec ks;
  ks.blend = 0.0;
  for (int i = 0; i < n_states * n_actions; ++i) ks.anchor.push_back(row);
  for (int i = 0; i < n_states * n_actions * n_states; ++i)
    ks.directions.push_back(Measure::uniform(n_states));
  return make_affine_gallery_model(n_states, n_actions, "constant", std::move(ks), std::move(cost));
}

/// T = (1-w) rows[xu] + w mu: kernel Lipschitz modulus exactly w.
inline GalleryModel gallery_mixture(int n_states, int n_actions, double w,
                                    std::vector<Measure> rows, CostSpec cost) {
  KernelSpec ks;
  ks.blend = w;
  ks.anchor = std::move(rows);
  for (int xu = 0; xu < n_states * n_actions; ++xu)
    for (int y = 0; y < n_states; ++y) ks.directions.push_back(Measure::dirac(n_states, y));
  return make_affine_gallery_model(n_states, n_actions, "mixture", std::move(ks), std::move(cost));
}

/**
 * Two-target coordination model: two states, two actions, next state equals
 * the chosen action, and the stage cost is `penalty` unless the population
 * is within eq_tol (tv) of either the 50/50 split or the all-at-zero mass.
 * The cost is discontinuous, so no Lipschitz constants are attached.
 */
inline GalleryModel gallery_two_target(double eq_tol = 0.05, double penalty = 10.0) {
  if (eq_tol < 0.0 || eq_tol >= 0.25)
    throw std::invalid_argument("gallery_two_target: eq_tol must lie in [0, 0.25)");
  GalleryModel g;
  g.model = make_model(
      2, 2, "two_target",
      [](int, int u, const Measure&) { return Measure::dirac(2, u); },
      [eq_tol, penalty](int, int, const Measure& mu) {
        const Measure even = Measure::uniform(2);
        const Measure all_zero = Measure::dirac(2, 0);
        if (tv_distance(mu, even) <= eq_tol || tv_distance(mu, all_zero) <= eq_tol) return 0.0;
        return penalty;
      });
  return g;
}

/**
 * Random affine model with known constants: anchors, directions and cost
 * coefficients drawn from `seed`; kernel_blend sets k_f's scale; smooth_cost
 * switches the wave term off (exact constants) or on (upper bounds).
 */
inline GalleryModel gallery_random(std::uint64_t seed, int n_states, int n_actions,
                                   double kernel_blend, bool smooth_cost = true) {
  RngStream rng(seed, 77);
  auto random_row = [&rng, n_states]() {
    std::vector<double> w(static_cast<std::size_t>(n_states));
    double sum = 0.0;
    for (auto& v : w) {
      v = 0.05 + rng.next_unit();
      sum += v;
    }
    for (auto& v : w) v /= sum;
    return Measure(std::move(w));
  };
  KernelSpec ks;
  ks.blend = kernel_blend;
  for (int i = 0; i < n_states * n_actions; ++i) ks.anchor.push_back(random_row());
  for (int i = 0; i < n_states * n_actions * n_states; ++i) ks.directions.push_back(random_row());
  CostSpec cs;
  for (int i = 0; i < n_states * n_actions; ++i) cs.base.push_back(rng.next_unit());
  for (int i = 0; i < n_states * n_actions * n_states; ++i)
    cs.slope.push_back(rng.next_in(-0.5, 0.5));
  if (!smooth_cost) {
    cs.wave_amp = 0.25;
    cs.wave_freq = 2.0;
    cs.wave_coord = 0;
  }
  return make_affine_gallery_model(n_states, n_actions, "random_affine", std::move(ks),
                                   std::move(cs));
}

/**
 * Piecewise-constant model over the bins of a simplex grid: within a bin
 * both the cost and the kernel row are frozen at random draws, so the model
 * is exactly linear in the indicator basis of the same grid (the truth
 * coefficients are the tables themselves). Discontinuous at bin boundaries,
 * hence no Lipschitz constants.
 */
inline GalleryModel gallery_tabular(std::uint64_t seed, int n_states, int n_actions,
                                    int resolution) {
  SimplexGrid grid = build_grid(n_states, resolution);
  RngStream rng(seed, 78);
  const std::size_t pairs = static_cast<std::size_t>(n_states * n_actions);
  const std::size_t bins = static_cast<std::size_t>(grid.size());
  auto costs = std::make_shared<std::vector<std::vector<double>>>(
      pairs, std::vector<double>(bins, 0.0));
  auto rows = std::make_shared<std::vector<std::vector<Measure>>>(pairs);
  for (std::size_t xu = 0; xu < pairs; ++xu) {
    for (std::size_t b = 0; b < bins; ++b) {
      (*costs)[xu][b] = rng.next_unit();
      std::vector<double> w(static_cast<std::size_t>(n_states));
      double sum = 0.0;
      for (auto& v : w) {
        v = 0.05 + rng.next_unit();
        sum += v;
      }
      for (auto& v : w) v /= sum;
      (*rows)[xu].push_back(Measure(std::move(w)));
    }
  }

  GalleryModel g;
  const int nu = n_actions;
  g.model = make_model(
      n_states, n_actions, "tabular",
      [rows, grid, nu](int x, int u, const Measure& mu) {
        return (*rows)[static_cast<std::size_t>(x * nu + u)]
                      [static_cast<std::size_t>(grid.project(mu))];
      },
      [costs, grid, nu](int x, int u, const Measure& mu) {
        return (*costs)[static_cast<std::size_t>(x * nu + u)]
                       [static_cast<std::size_t>(grid.project(mu))];
      });
  g.theta_truth.resize(pairs);
  g.q_truth.resize(pairs);
  for (std::size_t xu = 0; xu < pairs; ++xu) {
    g.theta_truth[xu] = (*costs)[xu];
    g.q_truth[xu].resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      const Measure& row = (*rows)[xu][b];
      for (int z = 0; z < n_states; ++z) g.q_truth[xu][b].push_back(row[z]);
    }
  }
  g.truth_grid = std::move(grid);
  return g;
}

/// A model and a perturbed sibling for mismatch studies.
struct GalleryPair {
  GalleryModel truth;
  GalleryModel hat;
};

/**
 * Random nonnegative-cost affine model plus a mismatched estimate of it: the
 * hat specs are the (1-eps, eps) convex blend of two independent draws,
 * which is again an affine spec, so both models carry exact constants and a
 * vertex-containing grid computes the exact uniform mismatch. Costs stay
 * positive (base at least 0.8, population terms at least -0.5), which the
 * performance bounds assume, and anchors are pulled halfway to uniform to
 * keep the Dobrushin coefficient small enough for beta K < 1 at beta = 0.9.
 */
inline GalleryPair gallery_perturbed_pair(std::uint64_t seed, int n_states, int n_actions,
                                          double kernel_blend, double eps) {
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("gallery_perturbed_pair: eps outside [0,1]");
  RngStream rng(seed, 7001);
  auto random_row = [&rng, n_states]() {
    std::vector<double> w(static_cast<std::size_t>(n_states));
    double sum = 0.0;
    for (auto& v : w) {
      v = 0.05 + rng.next_unit();
      sum += v;
    }
    for (auto& v : w) v /= sum;
    return Measure(std::move(w));
  };
  auto damped_row = [&random_row, n_states]() {
    const Measure r = random_row();
    std::vector<double> w(static_cast<std::size_t>(n_states));
    for (int i = 0; i < n_states; ++i)
      w[static_cast<std::size_t>(i)] = 0.5 / n_states + 0.5 * r[i];
    return Measure(std::move(w));
  };
  auto draw_specs = [&](KernelSpec& ks, CostSpec& cs) {
    ks.blend = kernel_blend;
    for (int i = 0; i < n_states * n_actions; ++i) ks.anchor.push_back(damped_row());
    for (int i = 0; i < n_states * n_actions * n_states; ++i)
      ks.directions.push_back(random_row());
    for (int i = 0; i < n_states * n_actions; ++i) cs.base.push_back(0.8 + rng.next_unit());
    for (int i = 0; i < n_states * n_actions * n_states; ++i)
      cs.slope.push_back(rng.next_in(-0.5, 0.5));
  };
  KernelSpec k1, k2;
  CostSpec c1, c2;
  draw_specs(k1, c1);
  draw_specs(k2, c2);

  KernelSpec kh;
  CostSpec ch;
  kh.blend = kernel_blend;
  auto blend_rows = [&](const std::vector<Measure>& a, const std::vector<Measure>& b,
                        std::vector<Measure>& out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::vector<double> w(static_cast<std::size_t>(n_states));
      for (int z = 0; z < n_states; ++z)
        w[static_cast<std::size_t>(z)] = (1.0 - eps) * a[i][z] + eps * b[i][z];
      out.push_back(Measure(std::move(w)));
    }
  };
  blend_rows(k1.anchor, k2.anchor, kh.anchor);
  blend_rows(k1.directions, k2.directions, kh.directions);
  for (std::size_t i = 0; i < c1.base.size(); ++i)
    ch.base.push_back((1.0 - eps) * c1.base[i] + eps * c2.base[i]);
  for (std::size_t i = 0; i < c1.slope.size(); ++i)
    ch.slope.push_back((1.0 - eps) * c1.slope[i] + eps * c2.slope[i]);

  GalleryPair out;
  out.truth = make_affine_gallery_model(n_states, n_actions, "perturbed_pair_true",
                                        std::move(k1), std::move(c1));
  out.hat = make_affine_gallery_model(n_states, n_actions, "perturbed_pair_hat", std::move(kh),
                                      std::move(ch));
  return out;
}

/// Flat cost over everything; handy for fixed-point sanity checks.
inline CostSpec constant_cost(int n_states, int n_actions, double level) {
  CostSpec cs;
  cs.base.assign(static_cast<std::size_t>(n_states * n_actions), level);
  cs.slope.assign(static_cast<std::size_t>(n_states * n_actions * n_states), 0.0);
  return cs;
}

}  // namespace mfc

#endif  // MFC_GALLERY_HPP
