#ifndef MFC_LEARN_HPP
#define MFC_LEARN_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfc/basis.hpp"
#include "mfc/linear_model.hpp"
#include "mfc/measure.hpp"
#include "mfc/model.hpp"
#include "mfc/policy.hpp"
#include "mfc/population.hpp"
#include "mfc/rng.hpp"

namespace mfc {

/// Exact regression targets collected at a list of population distributions.
struct TrainingSet {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Measure> mus;
  std::vector<std::vector<double>> costs;  ///< [xu][sample]
  std::vector<std::vector<Measure>> rows;  ///< [xu][sample]
};

inline TrainingSet make_training_set(const FiniteMFCModel& model,
                                     const std::vector<Measure>& mus) {
  if (mus.empty()) throw std::invalid_argument("make_training_set: no sample points");
  TrainingSet ts;
  ts.n_states = model.n_states;
  ts.n_actions = model.n_actions;
  ts.mus = mus;
  const int pairs = model.n_states * model.n_actions;
  ts.costs.assign(static_cast<std::size_t>(pairs), {});
  ts.rows.assign(static_cast<std::size_t>(pairs), {});
  for (const Measure& mu : mus) {
    for (int x = 0; x < model.n_states; ++x) {
      for (int u = 0; u < model.n_actions; ++u) {
        const std::size_t xu = static_cast<std::size_t>(joint_index(x, u, model.n_actions));
        ts.costs[xu].push_back(model.cost(x, u, mu));
        ts.rows[xu].push_back(model.kernel(x, u, mu));
      }
    }
  }
  return ts;
}

/// Batch-fit diagnostics per (x, u).
struct FitReport {
  std::vector<std::uint8_t> rank_deficient;   ///< design rank < basis dimension
  std::vector<int> ranks;
  std::vector<double> cost_residual_rms;      ///< ||A theta - b|| / sqrt(M)
  std::vector<double> kernel_residual_rms;    ///< Frobenius residual / sqrt(M)
};

/**
 * Pooled least squares on exact targets: per (x, u), solve the design system
 * with rows phi(mu_j) for the cost vector and every next-state column at
 * once. Rank-deficient designs fall back to the minimum-norm solution and
 * are flagged rather than rejected.
 */
inline std::pair<LinearModel, FitReport> coordinated_least_squares(const TrainingSet& ts,
                                                                   const BasisFamily& basis) {
  if (ts.mus.empty()) throw std::invalid_argument("coordinated_least_squares: empty training set");
  LinearModel lm = make_linear_model(ts.n_states, ts.n_actions, basis);
  const int pairs = lm.pair_count();
  const int m = static_cast<int>(ts.mus.size());
  FitReport report;
  report.rank_deficient.assign(static_cast<std::size_t>(pairs), 0);
  report.ranks.assign(static_cast<std::size_t>(pairs), 0);
  report.cost_residual_rms.assign(static_cast<std::size_t>(pairs), 0.0);
  report.kernel_residual_rms.assign(static_cast<std::size_t>(pairs), 0.0);

  for (int x = 0; x < ts.n_states; ++x) {
    for (int u = 0; u < ts.n_actions; ++u) {
      const std::size_t xu = static_cast<std::size_t>(lm.pair_index(x, u));
      Eigen::MatrixXd design(m, basis.dimension);
      Eigen::VectorXd b(m);
      Eigen::MatrixXd targets(m, ts.n_states);
      for (int j = 0; j < m; ++j) {
        const auto phi = basis.eval(x, u, ts.mus[static_cast<std::size_t>(j)]);
        if (static_cast<int>(phi.size()) != basis.dimension)
          throw std::invalid_argument("coordinated_least_squares: basis dimension mismatch");
        for (int k = 0; k < basis.dimension; ++k) design(j, k) = phi[static_cast<std::size_t>(k)];
        b(j) = ts.costs[xu][static_cast<std::size_t>(j)];
        const Measure& row = ts.rows[xu][static_cast<std::size_t>(j)];
        for (int z = 0; z < ts.n_states; ++z) targets(j, z) = row[z];
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
      report.ranks[xu] = static_cast<int>(cod.rank());
      if (cod.rank() < basis.dimension) report.rank_deficient[xu] = 1;
      lm.theta[xu] = cod.solve(b);
      lm.q[xu] = cod.solve(targets);
      lm.learned[xu] = 1;
      lm.rank_deficient[xu] = report.rank_deficient[xu];
      report.cost_residual_rms[xu] = (design * lm.theta[xu] - b).norm() / std::sqrt(m);
      report.kernel_residual_rms[xu] = (design * lm.q[xu] - targets).norm() / std::sqrt(m);
    }
  }
  return {std::move(lm), std::move(report)};
}

/// Trajectory of the projected quadratic objective along an SGD run.
struct SgdResult {
  Eigen::VectorXd v;
  std::vector<double> objective_trace;  ///< g(s_t, v_t) before each update
};

/**
 * Stochastic gradient descent on g(s, v) = (k(s).v - h(s))^2 along a Markov
 * input stream with step size 1/t:
 *   v_{t+1} = v_t - (2/t) k(s_t) (k(s_t).v_t - h(s_t)).
 * With an ergodic stream the iterates settle at the stationary-weighted
 * least-squares solution.
 */
inline SgdResult sgd_markov_quadratic(const std::function<int(int, RngStream&)>& chain_step,
                                      int s0,
                                      const std::function<Eigen::VectorXd(int)>& k,
                                      const std::function<double(int)>& h,
                                      Eigen::VectorXd v0, long long steps, RngStream& rng) {
  if (steps <= 0) throw std::invalid_argument("sgd_markov_quadratic: need steps");
  SgdResult out;
  out.v = std::move(v0);
  out.objective_trace.reserve(static_cast<std::size_t>(steps));
  int s = s0;
  for (long long t = 1; t <= steps; ++t) {
    const Eigen::VectorXd ks = k(s);
    const double slack = ks.dot(out.v) - h(s);
    out.objective_trace.push_back(slack * slack);
    out.v -= (2.0 / static_cast<double>(t)) * slack * ks;
    if (!out.v.allFinite())
      throw std::runtime_error("sgd_markov_quadratic: iterate diverged at step " +
                               std::to_string(t));
    s = chain_step(s, rng);
  }
  return out;
}

/**
 * Online linear learner: per-pair step size 1/(1 + visits including the
 * current one), so with indicator features the iterates are exactly running
 * averages seeded by the zero initialization.
 */
struct LearnerState {
  LinearModel model;
  std::vector<long long> visits;               ///< per xu
  std::vector<Eigen::MatrixXd> s_phiphi;       ///< per xu: sum of phi phi^T
  std::vector<Eigen::VectorXd> s_phic;         ///< sum of phi * observed cost
  std::vector<double> s_cc;                    ///< sum of cost^2
  std::vector<Eigen::MatrixXd> s_phinext;      ///< sum of phi * one_hot(next)^T
  std::vector<std::vector<Measure>> reservoir; ///< per xu: subsample of visited mu
  long long reservoir_cap = 256;
  long long total_steps = 0;
};

inline LearnerState make_learner(int n_states, int n_actions, const BasisFamily& basis) {
  LearnerState st;
  st.model = make_linear_model(n_states, n_actions, basis);
  const int pairs = st.model.pair_count();
  st.visits.assign(static_cast<std::size_t>(pairs), 0);
  st.s_phiphi.assign(static_cast<std::size_t>(pairs),
                     Eigen::MatrixXd::Zero(basis.dimension, basis.dimension));
  st.s_phic.assign(static_cast<std::size_t>(pairs), Eigen::VectorXd::Zero(basis.dimension));
  st.s_cc.assign(static_cast<std::size_t>(pairs), 0.0);
  st.s_phinext.assign(static_cast<std::size_t>(pairs),
                      Eigen::MatrixXd::Zero(basis.dimension, n_states));
  st.reservoir.assign(static_cast<std::size_t>(pairs), {});
  return st;
}

/// One transition's worth of updates at the visited pair.
inline void learner_update(LearnerState& st, int x, int u, const Measure& mu, double cost,
                           int next_state, RngStream& reservoir_rng) {
  const std::size_t xu = static_cast<std::size_t>(st.model.pair_index(x, u));
  st.visits[xu] += 1;
  st.total_steps += 1;
  const double alpha = 1.0 / (1.0 + static_cast<double>(st.visits[xu]));
  const Eigen::VectorXd phi = eval_features(st.model, x, u, mu);

  st.model.theta[xu] += alpha * (cost - phi.dot(st.model.theta[xu])) * phi;
  Eigen::VectorXd target_gap = -(st.model.q[xu].transpose() * phi);
  target_gap(next_state) += 1.0;
  st.model.q[xu] += alpha * phi * target_gap.transpose();
  st.model.learned[xu] = 1;

  st.s_phiphi[xu] += phi * phi.transpose();
  st.s_phic[xu] += cost * phi;
  st.s_cc[xu] += cost * cost;
  st.s_phinext[xu].col(next_state) += phi;
  auto& pool = st.reservoir[xu];
  if (static_cast<long long>(pool.size()) < st.reservoir_cap) {
    pool.push_back(mu);
  } else {
    const long long j =
        static_cast<long long>(reservoir_rng.next_unit() * static_cast<double>(st.visits[xu]));
    if (j < st.reservoir_cap) pool[static_cast<std::size_t>(j)] = mu;
  }
}

/// Cost-fit residual against the learner's own visitation data, exact from
/// the running sufficient statistics: sqrt(mean (phi.theta - c)^2).
inline double learner_cost_residual(const LearnerState& st, int x, int u) {
  const std::size_t xu = static_cast<std::size_t>(st.model.pair_index(x, u));
  if (st.visits[xu] == 0) return 0.0;
  const Eigen::VectorXd& th = st.model.theta[xu];
  const double sq = th.dot(st.s_phiphi[xu] * th) - 2.0 * th.dot(st.s_phic[xu]) + st.s_cc[xu];
  return std::sqrt(std::max(0.0, sq / static_cast<double>(st.visits[xu])));
}

/// Visit-weighted aggregate of per-pair cost residuals.
inline double learner_cost_residual_weighted(const LearnerState& st) {
  double sq = 0.0;
  long long total = 0;
  for (int x = 0; x < st.model.n_states; ++x)
    for (int u = 0; u < st.model.n_actions; ++u) {
      const std::size_t xu = static_cast<std::size_t>(st.model.pair_index(x, u));
      const double r = learner_cost_residual(st, x, u);
      sq += static_cast<double>(st.visits[xu]) * r * r;
      total += st.visits[xu];
    }
  return total == 0 ? 0.0 : std::sqrt(sq / static_cast<double>(total));
}

/// Transition-fit residual against the one-hot next-state observations,
/// exact from the running statistics: sqrt(mean |e_next - Q^T phi|^2). This
/// includes the irreducible sampling noise of the next-state draw, so it is
/// comparable across fits but does not vanish for a perfect model.
inline double learner_kernel_residual(const LearnerState& st, int x, int u) {
  const std::size_t xu = static_cast<std::size_t>(st.model.pair_index(x, u));
  if (st.visits[xu] == 0) return 0.0;
  const Eigen::MatrixXd& qm = st.model.q[xu];
  const double sq = static_cast<double>(st.visits[xu]) -
                    2.0 * (qm.transpose() * st.s_phinext[xu]).trace() +
                    (qm.transpose() * st.s_phiphi[xu] * qm).trace();
  return std::sqrt(std::max(0.0, sq / static_cast<double>(st.visits[xu])));
}

/// Batch least squares on exactly the data the online learner consumed,
/// recovered from the running sufficient statistics. This is the optimal fit
/// under the empirical visitation measure and the natural yardstick for the
/// online iterates.
struct LsBaseline {
  Eigen::VectorXd theta;
  Eigen::MatrixXd q;
  double cost_rms = 0.0;
  double kernel_rms = 0.0;
  bool rank_deficient = false;
};

inline LsBaseline learner_ls_baseline(const LearnerState& st, int x, int u) {
  const std::size_t xu = static_cast<std::size_t>(st.model.pair_index(x, u));
  const int d = st.model.basis.dimension;
  LsBaseline out;
  out.theta = Eigen::VectorXd::Zero(d);
  out.q = Eigen::MatrixXd::Zero(d, st.model.n_states);
  if (st.visits[xu] == 0) return out;
  const double v = static_cast<double>(st.visits[xu]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(st.s_phiphi[xu]);
  out.rank_deficient = cod.rank() < d;
  out.theta = cod.solve(st.s_phic[xu]);
  out.q = cod.solve(st.s_phinext[xu]);
  const double cost_sq = st.s_cc[xu] - 2.0 * out.theta.dot(st.s_phic[xu]) +
                         out.theta.dot(st.s_phiphi[xu] * out.theta);
  const double kernel_sq = v - 2.0 * (out.q.transpose() * st.s_phinext[xu]).trace() +
                           (out.q.transpose() * st.s_phiphi[xu] * out.q).trace();
  out.cost_rms = std::sqrt(std::max(0.0, cost_sq / v));
  out.kernel_rms = std::sqrt(std::max(0.0, kernel_sq / v));
  return out;
}

/**
 * Exploration driven by a finite set of component policies. With common
 * randomness one component is drawn per round and every agent (and the
 * limiting flow) follows it; without, agents randomize independently, which
 * at the population level is the deterministic row-wise mixture.
 */
struct ExplorationScheme {
  std::vector<StatePolicy> components;
  Measure weights;
  bool common_randomness = true;

  ExplorationScheme(std::vector<StatePolicy> comps, Measure w, bool common)
      : components(std::move(comps)), weights(std::move(w)), common_randomness(common) {
    if (components.empty() || weights.size() != static_cast<int>(components.size()))
      throw std::invalid_argument("ExplorationScheme: one weight per component");
  }
};

namespace detail {

inline Measure floored_row(const Measure& row, double eps_floor) {
  if (eps_floor <= 0.0) return row;
  std::vector<double> w(static_cast<std::size_t>(row.size()));
  const double unif = 1.0 / static_cast<double>(row.size());
  for (int u = 0; u < row.size(); ++u)
    w[static_cast<std::size_t>(u)] = (1.0 - eps_floor) * row[u] + eps_floor * unif;
  return Measure(std::move(w));
}

}  // namespace detail

/// Outcome of an online learning run.
struct LearnReport {
  LinearModel model;
  std::vector<long long> visits;
  std::vector<std::uint8_t> unlearned;        ///< pairs never visited (zero-filled)
  bool converged = false;
  double param_change = 0.0;                  ///< relative change over the last tenth
  double final_cost_residual = 0.0;           ///< visit-weighted rms on own data
  double final_kernel_residual = 0.0;         ///< visit-weighted, noise floor included
  std::vector<LsBaseline> baselines;          ///< batch LS on the same data, per xu
  std::vector<double> mu0_trace_autocorr;     ///< lag 1..5 autocorrelation of mu(0)
  std::vector<std::vector<double>> curve;     ///< rows: step, residual, param delta
  std::vector<std::vector<Measure>> reservoir;  ///< per xu, for offline comparisons
};

namespace detail {

inline std::vector<double> autocorrelation(const std::vector<double>& xs, int max_lag) {
  std::vector<double> out;
  const int n = static_cast<int>(xs.size());
  if (n < max_lag + 2) return out;
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : xs) var += (v - mean) * (v - mean);
  if (var <= 0.0) return std::vector<double>(static_cast<std::size_t>(max_lag), 0.0);
  for (int lag = 1; lag <= max_lag; ++lag) {
    double cov = 0.0;
    for (int t = 0; t + lag < n; ++t) cov += (xs[static_cast<std::size_t>(t)] - mean) *
                                             (xs[static_cast<std::size_t>(t + lag)] - mean);
    out.push_back(cov / var);
  }
  return out;
}

/// Shared learning loop body once the per-step population and policy are known.
struct OnlineLoop {
  LearnerState st;
  RngStream reservoir_rng;
  Eigen::VectorXd snapshot;
  std::vector<std::vector<double>> curve;
  long long snapshot_step = 0;

  OnlineLoop(int n_states, int n_actions, const BasisFamily& basis, std::uint64_t root_seed)
      : st(make_learner(n_states, n_actions, basis)), reservoir_rng(root_seed, 0x52455356ULL) {}

  Eigen::VectorXd stacked() const {
    long long len = 0;
    for (const auto& th : st.model.theta) len += th.size();
    for (const auto& qm : st.model.q) len += qm.size();
    Eigen::VectorXd v(len);
    long long at = 0;
    for (const auto& th : st.model.theta) {
      v.segment(at, th.size()) = th;
      at += th.size();
    }
    for (const auto& qm : st.model.q) {
      v.segment(at, qm.size()) = Eigen::Map<const Eigen::VectorXd>(qm.data(), qm.size());
      at += qm.size();
    }
    return v;
  }

  void maybe_checkpoint(long long step, long long total) {
    const long long stride = std::max<long long>(1, total / 64);
    if (step % stride == 0 || step == total) {
      const Eigen::VectorXd now = stacked();
      const double delta = snapshot.size() == 0 ? 0.0 : (now - snapshot).norm();
      curve.push_back({static_cast<double>(step), learner_cost_residual_weighted(st), delta});
    }
    if (step == (total * 9) / 10) {
      snapshot = stacked();
      snapshot_step = step;
    }
  }

  LearnReport finish(std::vector<double> mu0_trace, double convergence_threshold) {
    LearnReport rep;
    const Eigen::VectorXd now = stacked();
    rep.param_change =
        snapshot.size() == 0 ? 1.0 : (now - snapshot).norm() / std::max(1.0, now.norm());
    rep.converged = rep.param_change < convergence_threshold;
    rep.final_cost_residual = learner_cost_residual_weighted(st);
    double kernel_sq = 0.0;
    long long total = 0;
    for (int x = 0; x < st.model.n_states; ++x)
      for (int u = 0; u < st.model.n_actions; ++u) {
        const std::size_t xu = static_cast<std::size_t>(st.model.pair_index(x, u));
        const double r = learner_kernel_residual(st, x, u);
        kernel_sq += static_cast<double>(st.visits[xu]) * r * r;
        total += st.visits[xu];
        rep.baselines.push_back(learner_ls_baseline(st, x, u));
      }
    rep.final_kernel_residual =
        total == 0 ? 0.0 : std::sqrt(kernel_sq / static_cast<double>(total));
    rep.visits = st.visits;
    for (long long v : st.visits) rep.unlearned.push_back(v == 0 ? 1 : 0);
    rep.mu0_trace_autocorr = autocorrelation(mu0_trace, 5);
    rep.curve = std::move(curve);
    rep.reservoir = st.reservoir;
    rep.model = std::move(st.model);
    return rep;
  }
};

}  // namespace detail

/**
 * Learn from the limiting population: the coordinator drives the exact flow
 * under the exploration scheme while one representative agent generates
 * transitions. The agent's action draw is floored by an eps-uniform mixture
 * so no pair starves; the floor changes only the representative's draws, not
 * the flow. A zero-filled, flagged model entry remains for unvisited pairs.
 */
inline LearnReport independent_learn_infinite(const FiniteMFCModel& model,
                                              const BasisFamily& basis,
                                              const ExplorationScheme& scheme,
                                              long long steps, const Measure& mu0,
                                              double eps_floor, std::uint64_t root_seed,
                                              double convergence_threshold = 1e-3) {
  if (steps <= 0) throw std::invalid_argument("independent_learn_infinite: need steps");
  if (eps_floor < 0.0 || eps_floor >= 1.0)
    throw std::invalid_argument("independent_learn_infinite: eps_floor must lie in [0,1)");
  detail::OnlineLoop loop(model.n_states, model.n_actions, basis, root_seed);
  RngStream rng(root_seed, 1);
  Measure mu = mu0;
  int x = sample_inverse_cdf(mu0, rng.next_unit());
  std::vector<double> mu0_trace;
  StatePolicy blended;
  if (!scheme.common_randomness) blended = mix_policies(scheme.components, scheme.weights);
  for (long long t = 0; t < steps; ++t) {
    const StatePolicy& gamma =
        scheme.common_randomness
            ? scheme.components[static_cast<std::size_t>(rng.sample(scheme.weights.weights()))]
            : blended;
    const Measure action_row = detail::floored_row(gamma.row(x), eps_floor);
    const int u = rng.sample(action_row.weights());
    const double cost = model.cost(x, u, mu);
    const int x_next = model.sampler(x, u, mu, rng.next_unit());
    learner_update(loop.st, x, u, mu, cost, x_next, loop.reservoir_rng);
    mu = mean_field_step(model, mu, gamma);
    if (mu0_trace.size() < 20000) mu0_trace.push_back(mu[0]);
    x = x_next;
    loop.maybe_checkpoint(t + 1, steps);
  }
  return loop.finish(std::move(mu0_trace), convergence_threshold);
}

/**
 * Learn inside an N-agent system: all agents explore, one designated agent's
 * transitions feed the learner, and the empirical distribution replaces the
 * flow everywhere. Requires the same uniqueness-of-visitation caveat as the
 * infinite variant; the eps floor applies to every agent.
 */
inline LearnReport independent_learn_finite(const FiniteMFCModel& model,
                                            const BasisFamily& basis,
                                            const ExplorationScheme& scheme, int n_agents,
                                            long long steps, const std::vector<int>& pop0,
                                            double eps_floor, std::uint64_t root_seed,
                                            double convergence_threshold = 1e-3) {
  if (steps <= 0) throw std::invalid_argument("independent_learn_finite: need steps");
  if (static_cast<int>(pop0.size()) != n_agents)
    throw std::invalid_argument("independent_learn_finite: pop0 size mismatch");
  detail::OnlineLoop loop(model.n_states, model.n_actions, basis, root_seed);
  RngStream rng(root_seed, 1);
  std::vector<int> pop = pop0;
  std::vector<double> mu0_trace;
  for (long long t = 0; t < steps; ++t) {
    const Measure mu = empirical_from_states(pop, model.n_states);
    // Component choice: shared under common randomness, else per agent.
    const int shared_w = scheme.common_randomness ? rng.sample(scheme.weights.weights()) : -1;
    int learner_action = -1;
    std::vector<int> next(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const int w = scheme.common_randomness ? shared_w : rng.sample(scheme.weights.weights());
      const Measure row = detail::floored_row(
          scheme.components[static_cast<std::size_t>(w)].row(pop[i]), eps_floor);
      const int u = rng.sample(row.weights());
      if (i == 0) learner_action = u;
      next[i] = model.sampler(pop[i], u, mu, rng.next_unit());
    }
    learner_update(loop.st, pop[0], learner_action, mu,
                   model.cost(pop[0], learner_action, mu), next[0], loop.reservoir_rng);
    if (mu0_trace.size() < 20000) mu0_trace.push_back(mu[0]);
    pop = std::move(next);
    loop.maybe_checkpoint(t + 1, steps);
  }
  return loop.finish(std::move(mu0_trace), convergence_threshold);
}

}  // namespace mfc

#endif  // MFC_LEARN_HPP
