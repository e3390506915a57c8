#ifndef MFC_MODEL_HPP
#define MFC_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "mfc/measure.hpp"
#include "mfc/simplex_grid.hpp"

namespace mfc {

/**
 * Regularity constants of a mean-field model, all with respect to the tv
 * metric on the population argument:
 *   k_f      kernel Lipschitz modulus,
 *   k_c      cost Lipschitz modulus,
 *   c_sup    sup-norm of the stage cost,
 *   delta_t  Dobrushin contraction coefficient of the controlled kernel.
 * The performance bounds consume the aggregates C = c_sup + k_c and
 * K = k_f + delta_t.
 */
struct ModelConstants {
  double k_f = 0.0;
  double k_c = 0.0;
  double c_sup = 0.0;
  double delta_t = 0.0;

  double c_const() const { return c_sup + k_c; }
  double k_const() const { return k_f + delta_t; }
};

/// Inverse-CDF draw from a row given one unit-interval variate.
inline int sample_inverse_cdf(const Measure& row, double unit) {
  double acc = 0.0;
  int last_positive = 0;
  for (int i = 0; i < row.size(); ++i) {
    if (row[i] > 0.0) last_positive = i;
    acc += row[i];
    if (unit < acc) return i;
  }
  return last_positive;
}

/**
 * Controlled mean-field model on finite state and action sets.
 *
 * kernel(x, u, mu) is the next-state law of one agent at x applying u when
 * the population distribution is mu; cost(x, u, mu) the per-agent stage
 * cost; sampler(x, u, mu, unit) a functional-noise draw from kernel using a
 * single uniform variate. The default sampler inverts the kernel CDF, which
 * keeps sample paths and the kernel consistent by construction.
 */
struct FiniteMFCModel {
  int n_states = 0;
  int n_actions = 0;
  std::string name;
  std::function<Measure(int, int, const Measure&)> kernel;
  std::function<double(int, int, const Measure&)> cost;
  std::function<int(int, int, const Measure&, double)> sampler;

  void check_arguments(int x, int u, const Measure& mu) const {
    if (x < 0 || x >= n_states) throw std::invalid_argument(name + ": state out of range");
    if (u < 0 || u >= n_actions) throw std::invalid_argument(name + ": action out of range");
    if (mu.size() != n_states) throw std::invalid_argument(name + ": population support mismatch");
  }
};

inline FiniteMFCModel make_model(int n_states, int n_actions, std::string name,
                                 std::function<Measure(int, int, const Measure&)> kernel,
                                 std::function<double(int, int, const Measure&)> cost) {
  if (n_states < 1 || n_actions < 1)
    throw std::invalid_argument("make_model: state and action sets must be nonempty");
  FiniteMFCModel m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.name = std::move(name);
  m.kernel = std::move(kernel);
  m.cost = std::move(cost);
  m.sampler = [kernel = m.kernel](int x, int u, const Measure& mu, double unit) {
    return sample_inverse_cdf(kernel(x, u, mu), unit);
  };
  return m;
}

/**
 * Grid maxima of the Lipschitz difference quotients of kernel and cost over
 * all distinct representative pairs and all (x, u). Lower estimates of the
 * true moduli that converge as the grid refines; certificates that need true
 * upper bounds should use analytically known constants instead.
 * Requires resolution >= 2 so the quotient set is rich enough.
 */
inline std::pair<double, double> estimate_lipschitz_constants(const FiniteMFCModel& model,
                                                              const SimplexGrid& grid) {
  if (grid.n_states != model.n_states)
    throw std::invalid_argument("estimate_lipschitz_constants: grid/model support mismatch");
  if (grid.resolution < 2)
    throw std::invalid_argument("estimate_lipschitz_constants: need grid resolution >= 2");
  double k_f = 0.0, k_c = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    for (int j = i + 1; j < grid.size(); ++j) {
      const Measure& a = grid.reps[static_cast<std::size_t>(i)];
      const Measure& b = grid.reps[static_cast<std::size_t>(j)];
      const double base = tv_distance(a, b);
      if (base <= 0.0) continue;
      for (int x = 0; x < model.n_states; ++x) {
        for (int u = 0; u < model.n_actions; ++u) {
          k_f = std::max(k_f, tv_distance(model.kernel(x, u, a), model.kernel(x, u, b)) / base);
          k_c = std::max(k_c, std::abs(model.cost(x, u, a) - model.cost(x, u, b)) / base);
        }
      }
    }
  }
  return {k_f, k_c};
}

/**
 * Dobrushin coefficient of the policy-mixed kernel, estimated on the grid.
 *
 * The defining supremum ranges over policies, but the mixed row at x under a
 * policy is a convex combination of the deterministic-action rows at x, and
 * tv is convex in each argument, so the supremum is attained at
 * deterministic action pairs. Pairs share one policy, hence rows at the same
 * state coincide and only distinct state pairs contribute; a single-state
 * model has coefficient zero.
 */
inline double estimate_dobrushin(const FiniteMFCModel& model, const SimplexGrid& grid) {
  if (grid.n_states != model.n_states)
    throw std::invalid_argument("estimate_dobrushin: grid/model support mismatch");
  double worst = 0.0;
  for (const Measure& mu : grid.reps) {
    for (int x = 0; x < model.n_states; ++x) {
      for (int xh = x + 1; xh < model.n_states; ++xh) {
        for (int u = 0; u < model.n_actions; ++u) {
          for (int uh = 0; uh < model.n_actions; ++uh) {
            worst = std::max(worst,
                             tv_distance(model.kernel(x, u, mu), model.kernel(xh, uh, mu)));
          }
        }
      }
    }
  }
  return std::min(worst, 1.0);
}

/// Grid maximum of |cost|.
inline double estimate_sup_cost(const FiniteMFCModel& model, const SimplexGrid& grid) {
  if (grid.n_states != model.n_states)
    throw std::invalid_argument("estimate_sup_cost: grid/model support mismatch");
  double worst = 0.0;
  for (const Measure& mu : grid.reps)
    for (int x = 0; x < model.n_states; ++x)
      for (int u = 0; u < model.n_actions; ++u)
        worst = std::max(worst, std::abs(model.cost(x, u, mu)));
  return worst;
}

/// All four constants in one pass-friendly call.
inline ModelConstants estimate_constants(const FiniteMFCModel& model, const SimplexGrid& grid) {
  ModelConstants c;
  const auto lips = estimate_lipschitz_constants(model, grid);
  c.k_f = lips.first;
  c.k_c = lips.second;
  c.c_sup = estimate_sup_cost(model, grid);
  c.delta_t = estimate_dobrushin(model, grid);
  return c;
}

/**
 * Uniform model mismatch on the grid: the max over representatives and
 * (x, u) of the larger of |cost difference| and tv(kernel difference).
 * Models must share state and action sets.
 */
inline double uniform_mismatch(const FiniteMFCModel& a, const FiniteMFCModel& b,
                               const SimplexGrid& grid) {
  if (a.n_states != b.n_states || a.n_actions != b.n_actions)
    throw std::invalid_argument("uniform_mismatch: models on different sets");
  if (grid.n_states != a.n_states)
    throw std::invalid_argument("uniform_mismatch: grid/model support mismatch");
  double worst = 0.0;
  for (const Measure& mu : grid.reps) {
    for (int x = 0; x < a.n_states; ++x) {
      for (int u = 0; u < a.n_actions; ++u) {
        worst = std::max(worst, std::abs(a.cost(x, u, mu) - b.cost(x, u, mu)));
        worst = std::max(worst, tv_distance(a.kernel(x, u, mu), b.kernel(x, u, mu)));
      }
    }
  }
  return worst;
}

}  // namespace mfc

#endif  // MFC_MODEL_HPP
