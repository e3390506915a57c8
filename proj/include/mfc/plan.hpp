#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfc/model.hpp"
#include "mfc/policy.hpp"
#include "mfc/population.hpp"
#include "mfc/simplex_grid.hpp"

namespace mfc {

/**
 * Team-level action set for the lifted deterministic control problem: each
 * candidate assigns every agent state a distribution over actions. The
 * default set holds all deterministic maps; mixture candidates on a 1/q
 * action lattice can be added because optimal team behavior may require
 * genuinely randomized agent policies.
 */
struct PolicyCandidateSet {
  std::vector<StatePolicy> policies;

  int size() const { return static_cast<int>(policies.size()); }
};

/// Value per grid representative plus the sup-norm change of the final sweep.
struct ValueFunction {
  std::vector<double> values;
  double bellman_residual = 0.0;
};

/// Chosen candidate index per grid bin.
struct MeasurePolicy {
  std::vector<int> choice;
};

namespace detail {

inline bool same_row(const Measure& a, const Measure& b) {
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline bool contains_policy(const std::vector<StatePolicy>& pool, const StatePolicy& cand) {
  for (const StatePolicy& p : pool) {
    bool equal = true;
    for (int x = 0; x < cand.n_states() && equal; ++x) equal = same_row(p.row(x), cand.row(x));
    if (equal) return true;
  }
  return false;
}

}  // namespace detail

/**
 * Deterministic maps first (odometer order over states, state 0 most
 * significant, so index 0 is the all-zero map), then every product of
 * per-state action rows from the 1/q lattice that is not already present.
 * mixture_resolution 0 keeps only the deterministic maps.
 *
 * The count grows as |U|^|X| and lattice_rows^|X|; sets beyond 200000
 * candidates are refused as a usage error.
 */
inline PolicyCandidateSet candidate_policies(int n_states, int n_actions,
                                             int mixture_resolution = 0) {
  if (n_states < 1 || n_actions < 1)
    throw std::invalid_argument("candidate_policies: need positive state and action counts");
  if (mixture_resolution < 0)
    throw std::invalid_argument("candidate_policies: mixture resolution must be nonnegative");

  const double cap = 200000.0;
  double det_count = 1.0;
  for (int x = 0; x < n_states; ++x) det_count *= n_actions;
  if (det_count > cap) throw std::invalid_argument("candidate_policies: candidate set too large");

  PolicyCandidateSet out;
  std::vector<int> digits(static_cast<std::size_t>(n_states), 0);
  for (;;) {
    out.policies.push_back(deterministic_policy(digits, n_actions));
    int x = n_states - 1;
    while (x >= 0 && ++digits[static_cast<std::size_t>(x)] == n_actions)
      digits[static_cast<std::size_t>(x--)] = 0;
    if (x < 0) break;
  }

  if (mixture_resolution > 0) {
    const SimplexGrid lattice = build_grid(n_actions, mixture_resolution);
    double mix_count = 1.0;
    for (int x = 0; x < n_states; ++x) mix_count *= lattice.size();
    if (mix_count > cap)
      throw std::invalid_argument("candidate_policies: candidate set too large");
    std::vector<int> rows(static_cast<std::size_t>(n_states), 0);
    for (;;) {
      StatePolicy p;
      for (int x = 0; x < n_states; ++x)
        p.rows.push_back(lattice.reps[static_cast<std::size_t>(rows[static_cast<std::size_t>(x)])]);
      if (!detail::contains_policy(out.policies, p)) out.policies.push_back(std::move(p));
      int x = n_states - 1;
      while (x >= 0 && ++rows[static_cast<std::size_t>(x)] == lattice.size())
        rows[static_cast<std::size_t>(x--)] = 0;
      if (x < 0) break;
    }
  }
  return out;
}

/**
 * Precomputed transition structure of the discretized lifted problem: stage
 * cost and successor bin for every (representative, candidate) pair, plus
 * the worst tv distance lost when projecting a successor onto the grid.
 * Building the tables costs one model evaluation per pair; every sweep
 * afterwards is pure table lookups.
 */
struct PlanTables {
  std::vector<std::vector<double>> cost;  ///< [bin][candidate]
  std::vector<std::vector<int>> next;     ///< [bin][candidate]
  double worst_projection = 0.0;
};

inline PlanTables build_plan_tables(const FiniteMFCModel& model, const SimplexGrid& grid,
                                    const PolicyCandidateSet& candidates) {
  if (candidates.policies.empty())
    throw std::invalid_argument("build_plan_tables: empty candidate set");
  for (const StatePolicy& p : candidates.policies)
    if (p.n_states() != model.n_states || p.n_actions() != model.n_actions)
      throw std::invalid_argument("build_plan_tables: candidate shape mismatch");
  if (grid.n_states != model.n_states)
    throw std::invalid_argument("build_plan_tables: grid support mismatch");

  PlanTables t;
  const std::size_t bins = static_cast<std::size_t>(grid.size());
  const std::size_t cands = candidates.policies.size();
  t.cost.assign(bins, std::vector<double>(cands, 0.0));
  t.next.assign(bins, std::vector<int>(cands, 0));
  // Rows are independent of one another; a parallel build would partition
  // over bins. Kept sequential here.
  for (std::size_t b = 0; b < bins; ++b) {
    const Measure& mu = grid.reps[b];
    for (std::size_t c = 0; c < cands; ++c) {
      const StatePolicy& gamma = candidates.policies[c];
      t.cost[b][c] = stage_cost_infinite(model, mu, gamma);
      const Measure flow = mean_field_step(model, mu, gamma);
      t.next[b][c] = grid.project(flow);
      t.worst_projection = std::max(t.worst_projection, grid.projection_distance(flow));
    }
  }
  return t;
}

/// One Bellman sweep over precomputed tables; ties go to the lowest index.
inline std::vector<double> bellman_sweep(const PlanTables& tables, double beta,
                                         const std::vector<double>& values,
                                         MeasurePolicy* greedy = nullptr) {
  const std::size_t bins = tables.cost.size();
  if (values.size() != bins)
    throw std::invalid_argument("bellman_sweep: value vector does not match the grid");
  std::vector<double> out(bins, 0.0);
  if (greedy) greedy->choice.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < tables.cost[b].size(); ++c) {
      const double v = tables.cost[b][c] + beta * values[static_cast<std::size_t>(tables.next[b][c])];
      if (v < best) {
        best = v;
        arg = static_cast<int>(c);
      }
    }
    out[b] = best;
    if (greedy) greedy->choice[b] = arg;
  }
  return out;
}

/// Result of one explicit backup: improved values and the greedy choice.
struct BackupResult {
  std::vector<double> values;
  MeasurePolicy greedy;
};

/**
 * Single Bellman backup V'(mu_i) = min_gamma [k(mu_i, gamma) +
 * beta V(project(F(mu_i, gamma)))]. Builds the tables on the fly; use
 * build_plan_tables plus bellman_sweep when iterating.
 */
inline BackupResult bellman_backup(const FiniteMFCModel& model, const SimplexGrid& grid,
                                   const PolicyCandidateSet& candidates, double beta,
                                   const std::vector<double>& values) {
  const PlanTables tables = build_plan_tables(model, grid, candidates);
  BackupResult r;
  r.values = bellman_sweep(tables, beta, values, &r.greedy);
  return r;
}

/// Converged plan: value function, greedy policy, and the discretization
/// addendum (worst projection distance) the caller must account for.
struct PlanResult {
  ValueFunction value;
  MeasurePolicy policy;
  double worst_projection = 0.0;
  int sweeps = 0;
  std::vector<double> sweep_residuals;  ///< sup-norm change per sweep
};

/**
 * Value iteration from V = 0 until the sup-norm change drops to
 * tol(1-beta)/(2 beta), which leaves the iterate within tol of the
 * discretized fixed point. The greedy policy is taken against the final
 * values.
 *
 * Throws std::invalid_argument for tol <= 0 or beta outside (0,1), and
 * std::runtime_error if the sweep cap is exhausted before convergence.
 */
inline PlanResult value_iteration(const FiniteMFCModel& model, const SimplexGrid& grid,
                                  const PolicyCandidateSet& candidates, double beta, double tol,
                                  int max_sweeps = 100000) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument("value_iteration: beta must lie in (0,1)");
  if (max_sweeps < 1) throw std::invalid_argument("value_iteration: need at least one sweep");

  const PlanTables tables = build_plan_tables(model, grid, candidates);
  const double stop = tol * (1.0 - beta) / (2.0 * beta);

  PlanResult r;
  r.worst_projection = tables.worst_projection;
  std::vector<double> values(static_cast<std::size_t>(grid.size()), 0.0);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    std::vector<double> next = bellman_sweep(tables, beta, values);
    double residual = 0.0;
    for (std::size_t b = 0; b < values.size(); ++b)
      residual = std::max(residual, std::abs(next[b] - values[b]));
    values = std::move(next);
    r.sweeps = sweep;
    r.sweep_residuals.push_back(residual);
    if (residual <= stop) {
      r.value.values = values;
      r.value.bellman_residual = residual;
      bellman_sweep(tables, beta, values, &r.policy);
      return r;
    }
  }
  throw std::runtime_error("value_iteration: no convergence within " +
                           std::to_string(max_sweeps) + " sweeps");
}

/**
 * Lipschitz certificate C/(1 - beta K) for the optimal value function,
 * with C = c_sup + k_c and K = k_f + delta_t. Only meaningful when
 * beta K < 1; otherwise the discounted contraction argument fails and the
 * call is refused.
 */
inline double lip_value_certificate(const ModelConstants& constants, double beta) {
  const double bk = beta * constants.k_const();
  if (bk >= 1.0)
    throw std::invalid_argument("lip_value_certificate: requires beta * K < 1");
  return constants.c_const() / (1.0 - bk);
}

/// Largest pairwise ratio |V_i - V_j| / tv(rep_i, rep_j) over the grid.
inline double measure_value_lipschitz(const SimplexGrid& grid, const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("measure_value_lipschitz: value vector does not match the grid");
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      const double d = tv_distance(grid.reps[i], grid.reps[j]);
      if (d > 0.0) worst = std::max(worst, std::abs(values[i] - values[j]) / d);
    }
  }
  return worst;
}

}  // namespace mfc
