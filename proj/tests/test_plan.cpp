#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mfc/gallery.hpp"
#include "mfc/plan.hpp"

namespace {

bool rows_equal(const mfc::StatePolicy& a, const mfc::StatePolicy& b) {
  for (int x = 0; x < a.n_states(); ++x)
    for (int u = 0; u < a.n_actions(); ++u)
      if (a.row(x)[u] != b.row(x)[u]) return false;
  return true;
}

}  // namespace

TEST_CASE("candidate sets enumerate deterministic maps first and dedup the lattice") {
  const mfc::PolicyCandidateSet det = mfc::candidate_policies(2, 2);
  REQUIRE(det.size() == 4);
  // Index 0 is the all-zero map; state 0 is the most significant digit.
  REQUIRE(det.policies[0].row(0)[0] == 1.0);
  REQUIRE(det.policies[0].row(1)[0] == 1.0);
  REQUIRE(det.policies[1].row(0)[0] == 1.0);
  REQUIRE(det.policies[1].row(1)[1] == 1.0);
  REQUIRE(det.policies[2].row(0)[1] == 1.0);

  const mfc::PolicyCandidateSet mixed = mfc::candidate_policies(2, 2, 2);
  // 3 lattice rows per state give 9 products, 4 of which are deterministic.
  REQUIRE(mixed.size() == 9);
  for (int i = 0; i < 4; ++i) REQUIRE(rows_equal(mixed.policies[static_cast<std::size_t>(i)],
                                                 det.policies[static_cast<std::size_t>(i)]));
  int fifty_fifty = 0;
  for (const mfc::StatePolicy& p : mixed.policies)
    if (p.row(0)[0] == 0.5 && p.row(1)[0] == 0.5) ++fifty_fifty;
  REQUIRE(fifty_fifty == 1);

  REQUIRE_THROWS_AS(mfc::candidate_policies(0, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(mfc::candidate_policies(2, 2, -1), std::invalid_argument);
  // 4^20 deterministic maps blow past the candidate cap.
  REQUIRE_THROWS_AS(mfc::candidate_policies(20, 4), std::invalid_argument);
}

TEST_CASE("a single backup maps zero cost to the discounted projection") {
  const mfc::GalleryModel g =
      mfc::gallery_constant(2, 2, mfc::Measure({0.6, 0.4}), mfc::constant_cost(2, 2, 0.0));
  const mfc::SimplexGrid grid = mfc::build_grid(2, 4);
  const mfc::PolicyCandidateSet cands = mfc::candidate_policies(2, 2);

  const std::vector<double> zero(static_cast<std::size_t>(grid.size()), 0.0);
  const mfc::BackupResult from_zero = mfc::bellman_backup(g.model, grid, cands, 0.9, zero);
  for (double v : from_zero.values) REQUIRE(v == 0.0);

  // c == 1 has fixed point 1/(1-beta) regardless of the kernel.
  const mfc::GalleryModel ones =
      mfc::gallery_constant(2, 2, mfc::Measure({0.6, 0.4}), mfc::constant_cost(2, 2, 1.0));
  const double fp = 1.0 / (1.0 - 0.9);
  const std::vector<double> v_fp(static_cast<std::size_t>(grid.size()), fp);
  const mfc::BackupResult again = mfc::bellman_backup(ones.model, grid, cands, 0.9, v_fp);
  for (double v : again.values) REQUIRE(v == Catch::Approx(fp).margin(1e-12));
}

TEST_CASE("value iteration solves the constant-cost problem and validates input") {
  const mfc::GalleryModel g =
      mfc::gallery_constant(2, 2, mfc::Measure({0.6, 0.4}), mfc::constant_cost(2, 2, 0.7));
  const mfc::SimplexGrid grid = mfc::build_grid(2, 4);
  const mfc::PolicyCandidateSet cands = mfc::candidate_policies(2, 2);

  const mfc::PlanResult r = mfc::value_iteration(g.model, grid, cands, 0.8, 1e-6);
  for (double v : r.value.values) REQUIRE(v == Catch::Approx(0.7 / 0.2).margin(1e-6));
  REQUIRE(r.sweeps == static_cast<int>(r.sweep_residuals.size()));
  REQUIRE(r.value.bellman_residual == r.sweep_residuals.back());

  REQUIRE_THROWS_AS(mfc::value_iteration(g.model, grid, cands, 0.8, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(mfc::value_iteration(g.model, grid, cands, 1.0, 1e-6), std::invalid_argument);
  REQUIRE_THROWS_AS(mfc::value_iteration(g.model, grid, cands, 0.8, 1e-6, 0),
                    std::invalid_argument);
  // One sweep cannot reach a 1e-9 stop from V = 0 with nonzero cost.
  REQUIRE_THROWS_AS(mfc::value_iteration(g.model, grid, cands, 0.8, 1e-9, 1),
                    std::runtime_error);

  const mfc::PolicyCandidateSet wrong = mfc::candidate_policies(3, 2);
  REQUIRE_THROWS_AS(mfc::bellman_backup(g.model, grid, wrong, 0.8,
                                        std::vector<double>(5, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("coordination example: both target policies achieve zero value") {
  // Two-state team problem whose stage cost vanishes only at the even split
  // or full concentration in state 0; actions teleport agents.
  const mfc::GalleryModel g = mfc::gallery_two_target();
  const mfc::SimplexGrid grid = mfc::build_grid(2, 4);
  const mfc::PolicyCandidateSet cands = mfc::candidate_policies(2, 2, 2);
  const mfc::PlanResult r = mfc::value_iteration(g.model, grid, cands, 0.9, 1e-9);

  const int even_bin = grid.project(mfc::Measure({0.5, 0.5}));
  REQUIRE(r.value.values[static_cast<std::size_t>(even_bin)] == Catch::Approx(0.0).margin(1e-8));

  // The greedy candidate at the even split must be one of the two optima:
  // send everyone to state 0, or have every agent flip a fair coin.
  const mfc::StatePolicy& greedy =
      cands.policies[static_cast<std::size_t>(r.policy.choice[static_cast<std::size_t>(even_bin)])];
  const bool all_zero = greedy.row(0)[0] == 1.0 && greedy.row(1)[0] == 1.0;
  const bool fair_coin = greedy.row(0)[0] == 0.5 && greedy.row(1)[0] == 0.5;
  REQUIRE((all_zero || fair_coin));

  // Concentration in state 0 is also free; lopsided splits pay.
  const int zero_bin = grid.project(mfc::Measure({1.0, 0.0}));
  REQUIRE(r.value.values[static_cast<std::size_t>(zero_bin)] == Catch::Approx(0.0).margin(1e-8));
  const int lopsided = grid.project(mfc::Measure({0.25, 0.75}));
  REQUIRE(r.value.values[static_cast<std::size_t>(lopsided)] > 5.0);
}

TEST_CASE("sweeps contract at rate beta") {
  const mfc::GalleryModel g = mfc::gallery_random(303, 2, 2, 0.6, false);
  const mfc::SimplexGrid grid = mfc::build_grid(2, 8);
  const mfc::PlanResult r =
      mfc::value_iteration(g.model, grid, mfc::candidate_policies(2, 2, 2), 0.9, 1e-6);
  for (std::size_t k = 1; k < r.sweep_residuals.size(); ++k)
    REQUIRE(r.sweep_residuals[k] <= 0.9 * r.sweep_residuals[k - 1] + 1e-12);
}

TEST_CASE("values converge under grid refinement") {
  // Wave-cost models keep the optimal orbit off coarse lattice points, so
  // refinement genuinely moves the answer; the Cauchy differences at the
  // shared representative (0.5, 0.5) must shrink.
  for (const std::uint64_t seed : {101ull, 303ull, 505ull, 707ull}) {
    const mfc::GalleryModel g = mfc::gallery_random(seed, 2, 2, 0.6, false);
    const mfc::PolicyCandidateSet cands = mfc::candidate_policies(2, 2, 2);
    std::vector<double> at_center;
    for (int m : {4, 8, 16, 32}) {
      const mfc::SimplexGrid grid = mfc::build_grid(2, m);
      const mfc::PlanResult r = mfc::value_iteration(g.model, grid, cands, 0.9, 1e-9);
      at_center.push_back(
          r.value.values[static_cast<std::size_t>(grid.project(mfc::Measure({0.5, 0.5})))]);
    }
    const double d1 = std::abs(at_center[0] - at_center[1]);
    const double d2 = std::abs(at_center[1] - at_center[2]);
    const double d3 = std::abs(at_center[2] - at_center[3]);
    REQUIRE(d2 < d1);
    REQUIRE(d3 < d2);
    REQUIRE(d3 < 0.5 * d1);
  }
}

TEST_CASE("greedy rollout under the exact flow matches the planned value") {
  for (const std::uint64_t seed : {101ull, 3ull}) {
    const mfc::GalleryModel g = mfc::gallery_random(seed, 2, 2, 0.4, seed < 100);
    const mfc::SimplexGrid grid = mfc::build_grid(2, 8);
    const mfc::PolicyCandidateSet cands = mfc::candidate_policies(2, 2, 2);
    const double beta = 0.9, tol = 1e-6;
    const mfc::PlanResult r = mfc::value_iteration(g.model, grid, cands, beta, tol);
    const double cert = mfc::lip_value_certificate(*g.analytic, beta);
    const double bk = beta * g.analytic->k_const();
    const int horizon = 400;

    // Projection drift C r beta / ((1-beta)(1-beta K)) plus the truncated
    // tail bounds the rollout-vs-value gap.
    const double drift = g.analytic->c_const() * r.worst_projection * beta /
                         ((1.0 - beta) * (1.0 - bk));
    const double tail = std::pow(beta, horizon) * g.analytic->c_sup / (1.0 - beta);
    const double budget = tol + drift + tail + 1e-9;
    REQUIRE(cert > 0.0);

    for (int b = 0; b < grid.size(); ++b) {
      mfc::Measure mu = grid.reps[static_cast<std::size_t>(b)];
      double total = 0.0;
      double disc = 1.0;
      for (int t = 0; t < horizon; ++t) {
        const int bin = grid.project(mu);
        const mfc::StatePolicy& gamma = cands.policies[static_cast<std::size_t>(
            r.policy.choice[static_cast<std::size_t>(bin)])];
        total += disc * mfc::stage_cost_infinite(g.model, mu, gamma);
        mu = mfc::mean_field_step(g.model, mu, gamma);
        disc *= beta;
      }
      REQUIRE(std::abs(total - r.value.values[static_cast<std::size_t>(b)]) <= budget);
    }
  }
}

TEST_CASE("positive cost scaling leaves the greedy policy unchanged") {
  const mfc::GalleryModel g = mfc::gallery_random(101, 2, 2, 0.4, false);
  mfc::FiniteMFCModel scaled = g.model;
  const auto base_cost = g.model.cost;
  scaled.cost = [base_cost](int x, int u, const mfc::Measure& mu) {
    return 3.7 * base_cost(x, u, mu);
  };
  const mfc::SimplexGrid grid = mfc::build_grid(2, 8);
  const mfc::PolicyCandidateSet cands = mfc::candidate_policies(2, 2, 2);
  const mfc::PlanResult a = mfc::value_iteration(g.model, grid, cands, 0.9, 1e-9);
  const mfc::PlanResult b = mfc::value_iteration(scaled, grid, cands, 0.9, 1e-9);
  REQUIRE(a.policy.choice == b.policy.choice);
}

TEST_CASE("value lipschitz certificate: formula, applicability, and grid ratios") {
  mfc::ModelConstants flat;
  flat.c_sup = 1.0;
  REQUIRE(mfc::lip_value_certificate(flat, 0.5) == 1.0);

  mfc::ModelConstants unit;
  unit.c_sup = 1.5;
  unit.k_c = 0.5;
  unit.k_f = 1.0;
  REQUIRE(mfc::lip_value_certificate(unit, 0.5) == Catch::Approx(4.0));

  mfc::ModelConstants expansive;
  expansive.c_sup = 1.0;
  expansive.k_f = 2.0;
  REQUIRE_THROWS_AS(mfc::lip_value_certificate(expansive, 0.5), std::invalid_argument);

  // Population-independent kernel: the projected successor is the same bin
  // for every representative, so the projection shift cancels in value
  // differences and the certificate bounds the measured ratio directly.
  mfc::CostSpec cost;
  cost.base = {0.2, 0.5, 0.1, 0.4};
  cost.slope = {0.3, 0.1, 0.0, 0.2, 0.5, 0.0, 0.1, 0.3};
  const mfc::GalleryModel fixed = mfc::gallery_constant(2, 2, mfc::Measure({0.7, 0.3}), cost);
  const double cert_fixed = mfc::lip_value_certificate(*fixed.analytic, 0.9);
  const mfc::SimplexGrid grid = mfc::build_grid(2, 16);
  const mfc::PlanResult rf =
      mfc::value_iteration(fixed.model, grid, mfc::candidate_policies(2, 2, 2), 0.9, 1e-9);
  REQUIRE(mfc::measure_value_lipschitz(grid, rf.value.values) <= cert_fixed);

  // Population-coupled kernel: projection jumps inflate adjacent-pair
  // ratios beyond the certificate, so the sound comparison adds the
  // discretization addendum 2 beta r / ((1-beta) d_min) on top.
  std::vector<mfc::Measure> rows(4, mfc::Measure({0.7, 0.3}));
  const mfc::GalleryModel mix = mfc::gallery_mixture(2, 2, 0.5, rows, cost);
  const double cert_mix = mfc::lip_value_certificate(*mix.analytic, 0.9);
  const mfc::PlanResult rm =
      mfc::value_iteration(mix.model, grid, mfc::candidate_policies(2, 2, 2), 0.9, 1e-9);
  const double measured = mfc::measure_value_lipschitz(grid, rm.value.values);
  const double d_min = 1.0 / 16.0;
  const double addendum = cert_mix * 2.0 * 0.9 * rm.worst_projection / (0.1 * d_min);
  REQUIRE(measured <= cert_mix + addendum);
}
