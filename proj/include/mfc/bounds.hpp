#pragma once

#include <stdexcept>
#include <string>

namespace mfc {

/**
 * Performance-loss bounds for executing a policy that is optimal for a
 * mismatched model. Shared inputs:
 *   lambda  sup-norm model mismatch (cost error + kernel tv error)
 *   C       c_sup + k_c, the cost-side constant
 *   K       k_f + delta_t, the kernel-side contraction modulus
 *   beta    discount in (0,1)
 *   m_n     expected empirical-measure deviation for N agents
 * Every bound needs beta K < 1; outside that regime the discounted
 * contraction argument collapses and the functions refuse to answer.
 */

namespace detail {

inline void check_bound_inputs(double lambda, double c_const, double k_const, double beta,
                               double m_n, const char* who) {
  if (lambda < 0.0 || c_const < 0.0 || k_const < 0.0 || m_n < 0.0)
    throw std::invalid_argument(std::string(who) + ": constants must be nonnegative");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument(std::string(who) + ": beta must lie in (0,1)");
  if (beta * k_const >= 1.0)
    throw std::invalid_argument(std::string(who) + ": requires beta * K < 1");
}

}  // namespace detail

/// Closed-loop infinite-population loss: 2 lambda (beta C - beta K + 1) / ((1-beta)^2 (1-beta K)).
inline double bound_closed_infinite(double lambda, double c_const, double k_const, double beta) {
  detail::check_bound_inputs(lambda, c_const, k_const, beta, 0.0, "bound_closed_infinite");
  return 2.0 * lambda * (beta * c_const - beta * k_const + 1.0) /
         ((1.0 - beta) * (1.0 - beta) * (1.0 - beta * k_const));
}

/// Open-loop infinite-population loss: 2 lambda (beta (C - K) + 1) / ((1-beta)(1-beta K)).
inline double bound_open_infinite(double lambda, double c_const, double k_const, double beta) {
  detail::check_bound_inputs(lambda, c_const, k_const, beta, 0.0, "bound_open_infinite");
  return 2.0 * lambda * (beta * (c_const - k_const) + 1.0) /
         ((1.0 - beta) * (1.0 - beta * k_const));
}

/// Value mismatch between the estimated and true infinite-population values:
/// lambda (beta C - beta K + 1) / ((1-beta)(1-beta K)).
inline double bound_value_mismatch(double lambda, double c_const, double k_const, double beta) {
  detail::check_bound_inputs(lambda, c_const, k_const, beta, 0.0, "bound_value_mismatch");
  return lambda * (beta * c_const - beta * k_const + 1.0) /
         ((1.0 - beta) * (1.0 - beta * k_const));
}

/// Open-loop N-agent loss against the N-agent optimum: the infinite-population
/// mismatch term plus the empirical-measure term M_N 4 beta C / ((1-beta)(1-beta K)).
inline double bound_open_finite(double lambda, double c_const, double k_const, double beta,
                                double m_n) {
  detail::check_bound_inputs(lambda, c_const, k_const, beta, m_n, "bound_open_finite");
  const double one_minus_bk = 1.0 - beta * k_const;
  return 2.0 * lambda * (beta * c_const - beta * k_const + 1.0) /
             ((1.0 - beta) * one_minus_bk) +
         m_n * 4.0 * beta * c_const / ((1.0 - beta) * one_minus_bk);
}

/// Closed-loop N-agent loss: the closed-loop infinite bound plus the same
/// empirical-measure term as the open-loop finite bound.
inline double bound_closed_finite(double lambda, double c_const, double k_const, double beta,
                                  double m_n) {
  detail::check_bound_inputs(lambda, c_const, k_const, beta, m_n, "bound_closed_finite");
  const double one_minus_bk = 1.0 - beta * k_const;
  return 2.0 * lambda * (beta * c_const - beta * k_const + 1.0) /
             ((1.0 - beta) * (1.0 - beta) * one_minus_bk) +
         m_n * 4.0 * beta * c_const / ((1.0 - beta) * one_minus_bk);
}

/// Distance between the N-agent and infinite-population optimal values:
/// 2 beta C M_N / ((1-beta)(1-beta K)).
inline double bound_finite_vs_infinite_value(double c_const, double k_const, double beta,
                                             double m_n) {
  detail::check_bound_inputs(0.0, c_const, k_const, beta, m_n,
                             "bound_finite_vs_infinite_value");
  return 2.0 * beta * c_const * m_n / ((1.0 - beta) * (1.0 - beta * k_const));
}

/**
 * Expected tv divergence after t steps between the realized flow and the
 * estimated deterministic flow: sum_{n<t} K^n (lambda + 2 m_n) with
 * K = delta_t + k_f. m_n = 0 gives the infinite-population variant. Unlike
 * the discounted bounds this partial sum is finite for any K, so only the
 * inputs are validated, not beta K.
 */
inline double flow_divergence_bound(double lambda, double delta_t, double k_f, double m_n,
                                    int t) {
  if (lambda < 0.0 || delta_t < 0.0 || k_f < 0.0 || m_n < 0.0)
    throw std::invalid_argument("flow_divergence_bound: constants must be nonnegative");
  if (t < 0) throw std::invalid_argument("flow_divergence_bound: t must be nonnegative");
  const double k = delta_t + k_f;
  double geom = 0.0;
  double pow_k = 1.0;
  for (int n = 0; n < t; ++n) {
    geom += pow_k;
    pow_k *= k;
  }
  return geom * (lambda + 2.0 * m_n);
}

}  // namespace mfc
