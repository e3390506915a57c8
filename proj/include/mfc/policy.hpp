#ifndef MFC_POLICY_HPP
#define MFC_POLICY_HPP

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfc/measure.hpp"

namespace mfc {

/// Stationary agent policy: one action law per state.
struct StatePolicy {
  std::vector<Measure> rows;

  int n_states() const { return static_cast<int>(rows.size()); }
  int n_actions() const { return rows.empty() ? 0 : rows.front().size(); }
  const Measure& row(int x) const {
    if (x < 0 || x >= n_states()) throw std::invalid_argument("StatePolicy: state out of range");
    return rows[static_cast<std::size_t>(x)];
  }
};

inline StatePolicy uniform_policy(int n_states, int n_actions) {
  StatePolicy p;
  for (int x = 0; x < n_states; ++x) p.rows.push_back(Measure::uniform(n_actions));
  return p;
}

inline StatePolicy deterministic_policy(const std::vector<int>& action_of_state, int n_actions) {
  StatePolicy p;
  for (int a : action_of_state) p.rows.push_back(Measure::dirac(n_actions, a));
  return p;
}

/// Row-wise convex combination of policies; weights form a Measure over them.
inline StatePolicy mix_policies(const std::vector<StatePolicy>& parts, const Measure& weights) {
  if (parts.empty() || weights.size() != static_cast<int>(parts.size()))
    throw std::invalid_argument("mix_policies: need one weight per policy");
  const int n = parts.front().n_states();
  const int nu = parts.front().n_actions();
  StatePolicy out;
  for (int x = 0; x < n; ++x) {
    std::vector<double> row(static_cast<std::size_t>(nu), 0.0);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (parts[k].n_states() != n || parts[k].n_actions() != nu)
        throw std::invalid_argument("mix_policies: shape mismatch");
      for (int u = 0; u < nu; ++u) row[static_cast<std::size_t>(u)] += weights[static_cast<int>(k)] * parts[k].row(x)[u];
    }
    out.rows.push_back(Measure(std::move(row)));
  }
  return out;
}

/**
 * Population-conditioned policy: chooses an action law from the agent state
 * and the (empirical or limiting) population distribution. Closed-loop
 * execution feeds the realized population; open-loop execution feeds a
 * precomputed deterministic flow.
 */
using AgentPolicy = std::function<Measure(int x, const Measure& mu)>;

inline AgentPolicy as_agent_policy(StatePolicy p) {
  return [p = std::move(p)](int x, const Measure&) { return p.row(x); };
}

}  // namespace mfc

#endif  // MFC_POLICY_HPP
