#ifndef MFC_POPULATION_HPP
#define MFC_POPULATION_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfc/measure.hpp"
#include "mfc/model.hpp"
#include "mfc/policy.hpp"
#include "mfc/rng.hpp"
#include "mfc/simplex_grid.hpp"

namespace mfc {

/// Joint index of (state, action) on the product set, state-major.
inline int joint_index(int x, int u, int n_actions) { return x * n_actions + u; }

/// One synchronous round of the N-agent system.
struct StepResult {
  std::vector<int> next_states;
  Measure joint;      ///< empirical measure on X x U realized this round
  double stage_cost;  ///< per-agent average cost at the current empirical measure
};

/**
 * Advance every agent one step: draw u^i from policy(i, x^i, mu), then the
 * next state from the model's noise functional, with mu the current
 * empirical state distribution shared by dynamics and costs.
 */
inline StepResult step_finite(const FiniteMFCModel& model, const std::vector<int>& states,
                              const std::function<Measure(int, int, const Measure&)>& policy,
                              RngStream& rng) {
  if (states.empty()) throw std::invalid_argument("step_finite: empty population");
  const Measure mu = empirical_from_states(states, model.n_states);
  std::vector<int> next_states;
  next_states.reserve(states.size());
  std::vector<double> joint(static_cast<std::size_t>(model.n_states * model.n_actions), 0.0);
  const double unit = 1.0 / static_cast<double>(states.size());
  double cost = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const int x = states[i];
    const Measure action_law = policy(static_cast<int>(i), x, mu);
    if (action_law.size() != model.n_actions)
      throw std::invalid_argument("step_finite: policy row has wrong action count");
    const int u = rng.sample(action_law.weights());
    joint[static_cast<std::size_t>(joint_index(x, u, model.n_actions))] += unit;
    cost += model.cost(x, u, mu);
    next_states.push_back(model.sampler(x, u, mu, rng.next_unit()));
  }
  return StepResult{std::move(next_states), Measure(std::move(joint)), cost * unit};
}

/// Same round for one shared population-conditioned policy.
inline StepResult step_finite(const FiniteMFCModel& model, const std::vector<int>& states,
                              const AgentPolicy& policy, RngStream& rng) {
  return step_finite(
      model, states, [&policy](int, int x, const Measure& mu) { return policy(x, mu); }, rng);
}

/**
 * Deterministic infinite-population transfer: the image of mu under the
 * kernel mixed over policy rows,
 *   F(mu, gamma)(z) = sum_{x,u} T(z|x,u,mu) gamma(u|x) mu(x).
 * Zero-mass terms are skipped, which cannot change the value.
 */
inline Measure mean_field_step(const FiniteMFCModel& model, const Measure& mu,
                               const StatePolicy& gamma) {
  if (mu.size() != model.n_states)
    throw std::invalid_argument("mean_field_step: population support mismatch");
  if (gamma.n_states() != model.n_states || gamma.n_actions() != model.n_actions)
    throw std::invalid_argument("mean_field_step: policy shape mismatch");
  std::vector<double> next(static_cast<std::size_t>(model.n_states), 0.0);
  for (int x = 0; x < model.n_states; ++x) {
    if (mu[x] == 0.0) continue;
    for (int u = 0; u < model.n_actions; ++u) {
      const double w = gamma.row(x)[u] * mu[x];
      if (w == 0.0) continue;
      const Measure row = model.kernel(x, u, mu);
      for (int z = 0; z < model.n_states; ++z) next[static_cast<std::size_t>(z)] += w * row[z];
    }
  }
  return Measure(std::move(next));
}

/// Mean stage cost of the limiting population under gamma.
inline double stage_cost_infinite(const FiniteMFCModel& model, const Measure& mu,
                                  const StatePolicy& gamma) {
  if (mu.size() != model.n_states)
    throw std::invalid_argument("stage_cost_infinite: population support mismatch");
  if (gamma.n_states() != model.n_states || gamma.n_actions() != model.n_actions)
    throw std::invalid_argument("stage_cost_infinite: policy shape mismatch");
  double cost = 0.0;
  for (int x = 0; x < model.n_states; ++x) {
    if (mu[x] == 0.0) continue;
    for (int u = 0; u < model.n_actions; ++u) {
      const double w = gamma.row(x)[u] * mu[x];
      if (w == 0.0) continue;
      cost += w * model.cost(x, u, mu);
    }
  }
  return cost;
}

/**
 * All empirical joint measures on X x U whose X-marginal equals mu_n for a
 * team of N agents: per state, every split of its agent count over actions.
 * Guarded by the capacity cap on N * |X| * |U|; mu_n must be an N-agent
 * empirical measure (every weight a multiple of 1/N).
 */
inline std::vector<Measure> admissible_actions(const Measure& mu_n, int n_agents, int n_actions,
                                               long long cap = 256) {
  if (n_agents <= 0) throw std::invalid_argument("admissible_actions: need agents");
  if (n_actions <= 0) throw std::invalid_argument("admissible_actions: need actions");
  const long long load =
      static_cast<long long>(n_agents) * mu_n.size() * static_cast<long long>(n_actions);
  if (load > cap)
    throw std::length_error("admissible_actions: N*|X|*|U| = " + std::to_string(load) +
                            " exceeds cap " + std::to_string(cap));
  const int n_states = mu_n.size();
  std::vector<int> counts(static_cast<std::size_t>(n_states));
  for (int x = 0; x < n_states; ++x) {
    const double scaled = mu_n[x] * n_agents;
    const int k = static_cast<int>(std::llround(scaled));
    if (std::abs(scaled - k) > 1e-9)
      throw std::invalid_argument("admissible_actions: marginal is not N-agent empirical");
    counts[static_cast<std::size_t>(x)] = k;
  }

  std::vector<Measure> out;
  std::vector<std::vector<std::vector<int>>> per_state;
  for (int x = 0; x < n_states; ++x)
    per_state.push_back(detail::compositions(counts[static_cast<std::size_t>(x)], n_actions));
  std::vector<std::size_t> pick(static_cast<std::size_t>(n_states), 0);
  while (true) {
    std::vector<double> joint(static_cast<std::size_t>(n_states * n_actions), 0.0);
    for (int x = 0; x < n_states; ++x) {
      const auto& split = per_state[static_cast<std::size_t>(x)][pick[static_cast<std::size_t>(x)]];
      for (int u = 0; u < n_actions; ++u)
        joint[static_cast<std::size_t>(joint_index(x, u, n_actions))] =
            static_cast<double>(split[static_cast<std::size_t>(u)]) / n_agents;
    }
    out.push_back(Measure(std::move(joint)));
    int pos = n_states - 1;
    while (pos >= 0) {
      if (++pick[static_cast<std::size_t>(pos)] < per_state[static_cast<std::size_t>(pos)].size()) break;
      pick[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

/// Exact centralized solution of the N-agent team problem.
struct TeamSolution {
  std::vector<double> value;  ///< optimal value per joint state (agent 0 least significant)
  int n_agents = 0;
  int n_states = 0;
  int sweeps = 0;
  double residual = 0.0;

  double value_of(const std::vector<int>& states) const {
    if (static_cast<int>(states.size()) != n_agents)
      throw std::invalid_argument("TeamSolution::value_of: wrong team size");
    long long id = 0, base = 1;
    for (int i = 0; i < n_agents; ++i) {
      if (states[static_cast<std::size_t>(i)] < 0 || states[static_cast<std::size_t>(i)] >= n_states)
        throw std::invalid_argument("TeamSolution::value_of: state out of range");
      id += base * states[static_cast<std::size_t>(i)];
      base *= n_states;
    }
    return value[static_cast<std::size_t>(id)];
  }
};

/**
 * Value iteration on the joint team MDP over X^N x U^N, exact up to the
 * stopping rule: sweeps end once the sup-norm residual falls below
 * tol (1-beta) / (2 beta), which pins the value within tol/2.
 * Guarded by cap on |X|^N * |U|^N (and a memory guard on the row tables).
 */
inline TeamSolution brute_force_optimal_team(const FiniteMFCModel& model, int n_agents,
                                             double beta, double tol = 1e-9,
                                             long long cap = 1000000) {
  if (n_agents <= 0) throw std::invalid_argument("brute_force_optimal_team: need agents");
  if (beta <= 0.0 || beta >= 1.0)
    throw std::invalid_argument("brute_force_optimal_team: beta must lie in (0,1)");
  if (tol <= 0.0) throw std::invalid_argument("brute_force_optimal_team: tol must be positive");
  long long joint_states = 1, joint_actions = 1;
  for (int i = 0; i < n_agents; ++i) {
    joint_states *= model.n_states;
    joint_actions *= model.n_actions;
    if (joint_states > cap || joint_actions > cap)
      throw std::length_error("brute_force_optimal_team: joint space exceeds cap");
  }
  if (joint_states * joint_actions > cap)
    throw std::length_error("brute_force_optimal_team: |X|^N * |U|^N exceeds cap " +
                            std::to_string(cap));
  const long long table = joint_states * joint_actions * n_agents * model.n_states;
  if (table > 50000000LL)
    throw std::length_error("brute_force_optimal_team: row table would exceed memory guard");

  const auto decode = [&](long long id, int base, int digits) {
    std::vector<int> out(static_cast<std::size_t>(digits));
    for (int i = 0; i < digits; ++i) {
      out[static_cast<std::size_t>(i)] = static_cast<int>(id % base);
      id /= base;
    }
    return out;
  };

  // Stage costs and per-agent next-state rows, computed once.
  std::vector<double> stage(static_cast<std::size_t>(joint_states * joint_actions));
  std::vector<double> rows(static_cast<std::size_t>(table));
  for (long long s = 0; s < joint_states; ++s) {
    const auto xs = decode(s, model.n_states, n_agents);
    const Measure mu = empirical_from_states(xs, model.n_states);
    for (long long a = 0; a < joint_actions; ++a) {
      const auto us = decode(a, model.n_actions, n_agents);
      double cost = 0.0;
      for (int i = 0; i < n_agents; ++i) {
        cost += model.cost(xs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)], mu);
        const Measure row = model.kernel(xs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)], mu);
        for (int z = 0; z < model.n_states; ++z)
          rows[static_cast<std::size_t>((((s * joint_actions + a) * n_agents) + i) * model.n_states + z)] = row[z];
      }
      stage[static_cast<std::size_t>(s * joint_actions + a)] = cost / n_agents;
    }
  }

  TeamSolution sol;
  sol.n_agents = n_agents;
  sol.n_states = model.n_states;
  sol.value.assign(static_cast<std::size_t>(joint_states), 0.0);
  std::vector<double> next_value(static_cast<std::size_t>(joint_states));
  const double stop = tol * (1.0 - beta) / (2.0 * beta);
  const int max_sweeps = 100000;
  for (sol.sweeps = 1; sol.sweeps <= max_sweeps; ++sol.sweeps) {
    double residual = 0.0;
    for (long long s = 0; s < joint_states; ++s) {
      double best = 0.0;
      bool first = true;
      for (long long a = 0; a < joint_actions; ++a) {
        double expect = 0.0;
        for (long long y = 0; y < joint_states; ++y) {
          double prob = 1.0;
          long long rest = y;
          for (int i = 0; i < n_agents; ++i) {
            prob *= rows[static_cast<std::size_t>(
                (((s * joint_actions + a) * n_agents) + i) * model.n_states + rest % model.n_states)];
            rest /= model.n_states;
            if (prob == 0.0) break;
          }
          if (prob != 0.0) expect += prob * sol.value[static_cast<std::size_t>(y)];
        }
        const double q = stage[static_cast<std::size_t>(s * joint_actions + a)] + beta * expect;
        if (first || q < best) {
          best = q;
          first = false;
        }
      }
      next_value[static_cast<std::size_t>(s)] = best;
      residual = std::max(residual, std::abs(best - sol.value[static_cast<std::size_t>(s)]));
    }
    sol.value.swap(next_value);
    sol.residual = residual;
    if (residual <= stop) return sol;
  }
  throw std::runtime_error("brute_force_optimal_team: sweep cap reached before convergence");
}

/// Discount horizon after which the tail is below tol: smallest H with
/// beta^H c_sup / (1-beta) <= tol.
inline int horizon_for(double beta, double c_sup, double tol) {
  if (beta <= 0.0 || beta >= 1.0) throw std::invalid_argument("horizon_for: beta in (0,1)");
  if (tol <= 0.0) throw std::invalid_argument("horizon_for: tol must be positive");
  if (c_sup <= 0.0) return 1;
  const double target = tol * (1.0 - beta) / c_sup;
  if (target >= 1.0) return 1;
  return static_cast<int>(std::ceil(std::log(target) / std::log(beta)));
}

/// The tail bound the horizon rule guarantees.
inline double truncation_tail(double beta, double c_sup, int horizon) {
  return std::pow(beta, horizon) * c_sup / (1.0 - beta);
}

/// Monte Carlo summary of a finite-population execution.
struct RolloutSummary {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  double truncation_bound = 0.0;
  int horizon = 0;
  int replications = 0;
};

/**
 * Replicated discounted rollouts from a fixed initial team, one policy
 * shared by all agents. Replication r consumes stream (root_seed, r), so
 * results are reproducible and independent across replications.
 */
inline RolloutSummary rollout_finite(const FiniteMFCModel& model, const std::vector<int>& pop0,
                                     const AgentPolicy& policy, double beta, double c_sup,
                                     double tol, int replications, std::uint64_t root_seed) {
  if (replications <= 0) throw std::invalid_argument("rollout_finite: need replications");
  RolloutSummary out;
  out.horizon = horizon_for(beta, c_sup, tol);
  out.truncation_bound = truncation_tail(beta, c_sup, out.horizon);
  out.replications = replications;
  std::vector<double> totals;
  totals.reserve(static_cast<std::size_t>(replications));
  for (int rep = 0; rep < replications; ++rep) {
    RngStream rng(root_seed, static_cast<std::uint64_t>(rep));
    std::vector<int> states = pop0;
    double total = 0.0, discount = 1.0;
    for (int t = 0; t < out.horizon; ++t) {
      StepResult step = step_finite(model, states, policy, rng);
      total += discount * step.stage_cost;
      discount *= beta;
      states = std::move(step.next_states);
    }
    totals.push_back(total);
  }
  double sum = 0.0;
  for (double t : totals) sum += t;
  out.mean = sum / replications;
  if (replications > 1) {
    // Two-pass variance: degenerate samples yield exactly zero spread.
    double ss = 0.0;
    bool all_equal = true;
    for (double t : totals) {
      all_equal = all_equal && t == totals.front();
      ss += (t - out.mean) * (t - out.mean);
    }
    if (!all_equal)
      out.stderr_of_mean = std::sqrt(ss / (replications - 1) / replications);
  }
  return out;
}

}  // namespace mfc

#endif  // MFC_POPULATION_HPP
