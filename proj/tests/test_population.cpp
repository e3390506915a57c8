#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mfc/gallery.hpp"
#include "mfc/measure.hpp"
#include "mfc/model.hpp"
#include "mfc/policy.hpp"
#include "mfc/population.hpp"
#include "mfc/rng.hpp"

using namespace mfc;

namespace {

// Long-double accumulation oracle for the population transfer.
std::vector<double> flow_oracle(const FiniteMFCModel& model, const Measure& mu,
                                const StatePolicy& gamma) {
  std::vector<long double> acc(static_cast<std::size_t>(model.n_states), 0.0L);
  for (int x = 0; x < model.n_states; ++x)
    for (int u = 0; u < model.n_actions; ++u) {
      const Measure row = model.kernel(x, u, mu);
      for (int z = 0; z < model.n_states; ++z)
        acc[static_cast<std::size_t>(z)] +=
            static_cast<long double>(row[z]) * gamma.row(x)[u] * mu[x];
    }
  std::vector<double> out;
  for (auto v : acc) out.push_back(static_cast<double>(v));
  return out;
}

double stage_cost_oracle(const FiniteMFCModel& model, const Measure& mu,
                         const StatePolicy& gamma) {
  long double acc = 0.0L;
  for (int x = 0; x < model.n_states; ++x)
    for (int u = 0; u < model.n_actions; ++u)
      acc += static_cast<long double>(model.cost(x, u, mu)) * gamma.row(x)[u] * mu[x];
  return static_cast<double>(acc);
}

// Standalone single-agent discounted VI, kept independent of the library.
std::vector<double> mdp_vi_oracle(const FiniteMFCModel& model, double beta, int sweeps) {
  const int n = model.n_states;
  std::vector<double> v(static_cast<std::size_t>(n), 0.0), w(static_cast<std::size_t>(n));
  for (int s = 0; s < sweeps; ++s) {
    for (int x = 0; x < n; ++x) {
      const Measure mu = Measure::dirac(n, x);
      double best = 1e100;
      for (int u = 0; u < model.n_actions; ++u) {
        const Measure row = model.kernel(x, u, mu);
        double q = model.cost(x, u, mu);
        for (int z = 0; z < n; ++z) q += beta * row[z] * v[static_cast<std::size_t>(z)];
        best = std::min(best, q);
      }
      w[static_cast<std::size_t>(x)] = best;
    }
    v = w;
  }
  return v;
}

StatePolicy stuck_mixture() {
  // Per-state action law (3/4, 1/4): the uncoordinated blend of the two
  // coordination policies of the two-target model.
  StatePolicy p;
  p.rows = {Measure(std::vector<double>{0.75, 0.25}), Measure(std::vector<double>{0.75, 0.25})};
  return p;
}

}  // namespace

TEST_CASE("step_finite on the two-target model is deterministic under dirac rows",
          "[population]") {
  GalleryModel g = gallery_two_target();
  RngStream rng(1, 0);
  std::vector<int> pop = {0, 0, 1, 1};
  StatePolicy all_zero = deterministic_policy({0, 0}, 2);
  StepResult step = step_finite(g.model, pop, as_agent_policy(all_zero), rng);
  REQUIRE(step.next_states == std::vector<int>{0, 0, 0, 0});
  REQUIRE(step.stage_cost == 0.0);  // current population sits on the even split

  StepResult onward = step_finite(g.model, step.next_states, as_agent_policy(all_zero), rng);
  REQUIRE(onward.stage_cost == 0.0);  // all-at-zero is the other target
  REQUIRE(onward.next_states == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("step_finite joint measure marginalizes to the state empirical", "[population]") {
  GalleryModel g = gallery_random(41, 3, 2, 0.5);
  RngStream rng(2, 0);
  std::vector<int> pop = {0, 1, 2, 2, 1, 0, 2, 2};
  const Measure mu = empirical_from_states(pop, 3);
  StepResult step = step_finite(g.model, pop, as_agent_policy(uniform_policy(3, 2)), rng);
  for (int x = 0; x < 3; ++x) {
    double marg = 0.0;
    for (int u = 0; u < 2; ++u) marg += step.joint[joint_index(x, u, 2)];
    REQUIRE(marg == Catch::Approx(mu[x]).margin(1e-12));
  }
  REQUIRE(static_cast<int>(step.next_states.size()) == 8);
}

TEST_CASE("mean_field_step: uncoordinated blend parks the population off target",
          "[population]") {
  GalleryModel g = gallery_two_target();
  const Measure even = Measure::uniform(2);
  Measure next = mean_field_step(g.model, even, stuck_mixture());
  REQUIRE(next[0] == Catch::Approx(0.75).margin(1e-15));
  REQUIRE(next[1] == Catch::Approx(0.25).margin(1e-15));
  // And that point is a fixed point of the blended flow.
  Measure again = mean_field_step(g.model, next, stuck_mixture());
  REQUIRE(again[0] == Catch::Approx(0.75).margin(1e-15));
}

TEST_CASE("mean_field_step matches long-double accumulation", "[population][property]") {
  RngStream rng(20240812, 9);
  for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
    GalleryModel g = gallery_random(seed, 3, 2, 0.6, false);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> w(3);
      double sum = 0.0;
      for (auto& v : w) {
        v = 0.01 + rng.next_unit();
        sum += v;
      }
      for (auto& v : w) v /= sum;
      Measure mu(std::move(w));
      StatePolicy gamma = uniform_policy(3, 2);
      Measure got = mean_field_step(g.model, mu, gamma);
      const auto want = flow_oracle(g.model, mu, gamma);
      for (int z = 0; z < 3; ++z)
        REQUIRE(got[z] == Catch::Approx(want[static_cast<std::size_t>(z)]).margin(1e-13));
      REQUIRE(stage_cost_infinite(g.model, mu, gamma) ==
              Catch::Approx(stage_cost_oracle(g.model, mu, gamma)).margin(1e-13));
    }
  }
}

TEST_CASE("stage_cost_infinite on the two-target model", "[population]") {
  GalleryModel g = gallery_two_target();
  const Measure even = Measure::uniform(2);
  const Measure stuck(std::vector<double>{0.75, 0.25});
  REQUIRE(stage_cost_infinite(g.model, even, stuck_mixture()) == 0.0);
  REQUIRE(stage_cost_infinite(g.model, stuck, stuck_mixture()) ==
          Catch::Approx(10.0).margin(1e-12));
}

TEST_CASE("admissible_actions enumerates exactly the splits", "[population]") {
  SECTION("two agents split over two states: 2*2 joint choices") {
    auto acts = admissible_actions(Measure::uniform(2), 2, 2);
    REQUIRE(acts.size() == 4);
  }
  SECTION("two agents on one state: multisets of actions, 3 choices") {
    auto acts = admissible_actions(Measure::dirac(2, 0), 2, 2);
    REQUIRE(acts.size() == 3);
  }
  SECTION("single agent: one action each") {
    auto acts = admissible_actions(Measure::dirac(2, 0), 1, 2);
    REQUIRE(acts.size() == 2);
  }
  SECTION("X-marginals all equal the input") {
    const Measure mu(std::vector<double>{0.25, 0.5, 0.25});
    for (const Measure& joint : admissible_actions(mu, 4, 3)) {
      for (int x = 0; x < 3; ++x) {
        double marg = 0.0;
        for (int u = 0; u < 3; ++u) marg += joint[joint_index(x, u, 3)];
        REQUIRE(marg == Catch::Approx(mu[x]).margin(1e-12));
      }
    }
  }
  SECTION("capacity guard") {
    REQUIRE_THROWS_AS(admissible_actions(Measure::uniform(2), 100, 2, 256), std::length_error);
  }
  SECTION("non-empirical marginal rejected") {
    REQUIRE_THROWS_AS(admissible_actions(Measure(std::vector<double>{0.3, 0.7}), 2, 2),
                      std::invalid_argument);
  }
}

TEST_CASE("brute force with one agent matches plain MDP value iteration", "[population]") {
  GalleryModel g = gallery_random(71, 2, 2, 0.0);  // population-free dynamics
  const double beta = 0.8;
  TeamSolution sol = brute_force_optimal_team(g.model, 1, beta, 1e-10);
  const auto oracle = mdp_vi_oracle(g.model, beta, 400);
  for (int x = 0; x < 2; ++x)
    REQUIRE(sol.value_of({x}) == Catch::Approx(oracle[static_cast<std::size_t>(x)]).margin(1e-8));
}

TEST_CASE("team value is symmetric under agent permutation", "[population][property]") {
  GalleryModel g = gallery_random(72, 2, 2, 0.5);
  TeamSolution sol = brute_force_optimal_team(g.model, 3, 0.85, 1e-8);
  REQUIRE(sol.value_of({0, 0, 1}) == Catch::Approx(sol.value_of({1, 0, 0})).margin(1e-12));
  REQUIRE(sol.value_of({0, 1, 0}) == Catch::Approx(sol.value_of({1, 0, 0})).margin(1e-12));
  REQUIRE(sol.value_of({1, 1, 0}) == Catch::Approx(sol.value_of({0, 1, 1})).margin(1e-12));
}

TEST_CASE("brute force stopping rule pins the value within tol", "[population]") {
  GalleryModel g = gallery_random(73, 2, 2, 0.5);
  TeamSolution coarse = brute_force_optimal_team(g.model, 2, 0.9, 1e-3);
  TeamSolution fine = brute_force_optimal_team(g.model, 2, 0.9, 1e-9);
  for (std::size_t s = 0; s < coarse.value.size(); ++s)
    REQUIRE(std::abs(coarse.value[s] - fine.value[s]) <= 1e-3);
}

TEST_CASE("brute force capacity guards", "[population]") {
  GalleryModel g = gallery_random(74, 3, 3, 0.5);
  REQUIRE_THROWS_AS(brute_force_optimal_team(g.model, 9, 0.9, 1e-6, 1000000),
                    std::length_error);
  REQUIRE_THROWS_AS(brute_force_optimal_team(g.model, 2, 1.0, 1e-6), std::invalid_argument);
}

TEST_CASE("horizon rule and tail bound", "[population]") {
  // beta = 0.5, c_sup = 1, tol = 1e-3: need 0.5^H * 2 <= 1e-3, so H = 11.
  REQUIRE(horizon_for(0.5, 1.0, 1e-3) == 11);
  REQUIRE(truncation_tail(0.5, 1.0, 11) <= 1e-3);
  REQUIRE(truncation_tail(0.5, 1.0, 10) > 1e-3);
  for (double beta : {0.3, 0.9, 0.99}) {
    for (double tol : {1e-2, 1e-6}) {
      const int h = horizon_for(beta, 2.5, tol);
      REQUIRE(truncation_tail(beta, 2.5, h) <= tol * (1.0 + 1e-12));
    }
  }
  REQUIRE(horizon_for(0.9, 0.0, 1e-6) == 1);
}

TEST_CASE("rollout with unit cost sums the discount series exactly", "[population]") {
  GalleryModel g = gallery_identity(2, 2, constant_cost(2, 2, 1.0));
  const double beta = 0.9, tol = 1e-6;
  RolloutSummary s = rollout_finite(g.model, {0, 1, 1}, as_agent_policy(uniform_policy(2, 2)),
                                    beta, 1.0, tol, 5, 99);
  const int h = horizon_for(beta, 1.0, tol);
  REQUIRE(s.horizon == h);
  REQUIRE(s.mean == Catch::Approx((1.0 - std::pow(beta, h)) / (1.0 - beta)).margin(1e-10));
  REQUIRE(s.stderr_of_mean == 0.0);
  REQUIRE(s.truncation_bound <= tol);
}

TEST_CASE("rollouts are reproducible by seed", "[population]") {
  GalleryModel g = gallery_random(75, 2, 2, 0.5);
  const AgentPolicy pol = as_agent_policy(uniform_policy(2, 2));
  RolloutSummary a = rollout_finite(g.model, {0, 1, 0, 1}, pol, 0.8, 2.0, 1e-4, 20, 1234);
  RolloutSummary b = rollout_finite(g.model, {0, 1, 0, 1}, pol, 0.8, 2.0, 1e-4, 20, 1234);
  RolloutSummary c = rollout_finite(g.model, {0, 1, 0, 1}, pol, 0.8, 2.0, 1e-4, 20, 4321);
  REQUIRE(a.mean == b.mean);
  REQUIRE(a.stderr_of_mean == b.stderr_of_mean);
  REQUIRE(a.mean != c.mean);
}

TEST_CASE("empirical flows track the deterministic flow as N grows",
          "[population][statistical]") {
  GalleryModel g = gallery_random(76, 2, 2, 0.5);
  StatePolicy gamma = uniform_policy(2, 2);
  const int horizon = 20, reps = 80;
  std::vector<Measure> flow = {Measure::uniform(2)};
  for (int t = 0; t < horizon; ++t) flow.push_back(mean_field_step(g.model, flow.back(), gamma));

  std::vector<double> avg_gap;  // indexed by population size
  for (int n_agents : {10, 100, 1000}) {
    std::vector<int> pop0(static_cast<std::size_t>(n_agents));
    for (int i = 0; i < n_agents; ++i) pop0[static_cast<std::size_t>(i)] = i % 2;
    double gap = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream rng(5150, static_cast<std::uint64_t>(rep));
      std::vector<int> pop = pop0;
      for (int t = 1; t <= horizon; ++t) {
        StepResult step = step_finite(g.model, pop, as_agent_policy(gamma), rng);
        pop = std::move(step.next_states);
        gap += tv_distance(empirical_from_states(pop, 2), flow[static_cast<std::size_t>(t)]);
      }
    }
    avg_gap.push_back(gap / (reps * horizon));
  }
  REQUIRE(avg_gap[1] < avg_gap[0]);
  REQUIRE(avg_gap[2] < avg_gap[1]);
  REQUIRE(avg_gap[2] < 0.05);
}
