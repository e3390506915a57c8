#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfc/measure.hpp"
#include "mfc/rng.hpp"
#include "mfc/simplex_grid.hpp"

using namespace mfc;

namespace {

// Random point of the simplex from i.i.d. exponential spacings; covers the
// interior and, with mass_at_zero, pushes some coordinates to exact zero so
// boundary cases are exercised too.
Measure random_measure(RngStream& rng, int n, double mass_at_zero = 0.2) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& v : w) {
    const bool zero = rng.next_unit() < mass_at_zero;
    v = zero ? 0.0 : -std::log(1.0 - rng.next_unit());
    sum += v;
  }
  if (sum == 0.0) w[0] = sum = 1.0;
  for (auto& v : w) v /= sum;
  return Measure(std::move(w));
}

// Independent transport oracle for the discrete 0/1 ground metric: the
// optimal plan keeps min(a,b) in place, so the cost is 1 - sum_i min(a_i,b_i).
double w1_coupling_oracle(const Measure& a, const Measure& b) {
  double kept = 0.0;
  for (int i = 0; i < a.size(); ++i) kept += std::min(a[i], b[i]);
  return 1.0 - kept;
}

// Pascal-triangle binomial, independent of the library's helper.
long long binom_oracle(int n, int k) {
  std::vector<std::vector<long long>> c(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    c[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i + 1), 1);
    for (int j = 1; j < i; ++j)
      c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
          c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
  }
  return c[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

}  // namespace

TEST_CASE("Measure constructor validates and renormalizes", "[measure]") {
  SECTION("mass within slack renormalizes to one") {
    Measure m(std::vector<double>{0.5, 0.5 + 1e-10});
    double sum = 0.0;
    for (int i = 0; i < m.size(); ++i) sum += m[i];
    REQUIRE(std::abs(sum - 1.0) <= kMassTolerance);
  }
  SECTION("mass off by more than slack is rejected") {
    REQUIRE_THROWS_AS(Measure(std::vector<double>{0.5, 0.6}), std::invalid_argument);
  }
  SECTION("negative weight is rejected") {
    REQUIRE_THROWS_AS(Measure(std::vector<double>{1.2, -0.2}), std::invalid_argument);
  }
  SECTION("tiny negative rounding debris is clamped") {
    Measure m(std::vector<double>{1.0 + 5e-13, -5e-13});
    REQUIRE(m[1] == 0.0);
  }
  SECTION("empty and non-finite inputs are rejected") {
    REQUIRE_THROWS_AS(Measure(std::vector<double>{}), std::invalid_argument);
    REQUIRE_THROWS_AS(Measure(std::vector<double>{std::nan(""), 1.0}), std::invalid_argument);
  }
}

TEST_CASE("tv_distance on hand cases", "[measure]") {
  Measure half = Measure::uniform(2);
  Measure d0 = Measure::dirac(2, 0);
  REQUIRE(tv_distance(half, d0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(tv_distance(half, half) == 0.0);
  REQUIRE_THROWS_AS(tv_distance(half, Measure::uniform(3)), std::invalid_argument);
}

TEST_CASE("tv_distance is a metric bounded by one", "[measure][property]") {
  RngStream rng(20240811, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_unit() * 5);
    Measure a = random_measure(rng, n);
    Measure b = random_measure(rng, n);
    Measure c = random_measure(rng, n);
    const double ab = tv_distance(a, b);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab <= 1.0 + 1e-15);
    REQUIRE(ab == Catch::Approx(tv_distance(b, a)).margin(0.0));
    REQUIRE(ab <= tv_distance(a, c) + tv_distance(c, b) + 1e-12);
  }
}

TEST_CASE("wasserstein1_discrete equals tv_distance bitwise", "[measure][property]") {
  RngStream rng(20240811, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_unit() * 5);
    Measure a = random_measure(rng, n);
    Measure b = random_measure(rng, n);
    REQUIRE(wasserstein1_discrete(a, b) == tv_distance(a, b));
    // The identity itself, against the independent coupling oracle.
    REQUIRE(wasserstein1_discrete(a, b) ==
            Catch::Approx(w1_coupling_oracle(a, b)).margin(1e-12));
  }
}

TEST_CASE("empirical_from_states counts states", "[measure]") {
  Measure m = empirical_from_states({0, 1, 1, 0}, 2);
  REQUIRE(m[0] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(m[1] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE_THROWS_AS(empirical_from_states({0, 2}, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(empirical_from_states({}, 2), std::invalid_argument);
}

TEST_CASE("mix forms convex combinations", "[measure]") {
  Measure a = Measure::dirac(2, 0);
  Measure b = Measure::dirac(2, 1);
  Measure m = mix(a, b, 0.25);
  REQUIRE(m[0] == Catch::Approx(0.75).margin(1e-15));
  REQUIRE_THROWS_AS(mix(a, b, 1.5), std::invalid_argument);
}

TEST_CASE("SignedMeasure accepts arbitrary finite entries", "[measure]") {
  SignedMeasure s(std::vector<double>{-0.5, 2.0});
  REQUIRE(s.size() == 2);
  REQUIRE_THROWS_AS(SignedMeasure(std::vector<double>{1.0, std::nan("")}),
                    std::invalid_argument);
}

TEST_CASE("build_grid enumerates the type lattice", "[grid]") {
  SECTION("three states, resolution two: six representatives") {
    SimplexGrid g = build_grid(3, 2);
    REQUIRE(g.size() == 6);
    REQUIRE(g.size() == binom_oracle(2 + 3 - 1, 3 - 1));
  }
  SECTION("representative count matches stars-and-bars over a sweep") {
    for (int n = 1; n <= 4; ++n)
      for (int m = 1; m <= 6; ++m)
        REQUIRE(build_grid(n, m).size() == binom_oracle(m + n - 1, n - 1));
  }
  SECTION("two states, resolution four: the five expected points in order") {
    SimplexGrid g = build_grid(2, 4);
    const std::vector<double> first = {1.0, 0.75, 0.5, 0.25, 0.0};
    REQUIRE(g.size() == 5);
    for (int i = 0; i < 5; ++i) {
      REQUIRE(g.reps[static_cast<std::size_t>(i)][0] ==
              Catch::Approx(first[static_cast<std::size_t>(i)]).margin(1e-15));
    }
  }
  SECTION("invalid resolution rejected") {
    REQUIRE_THROWS_AS(build_grid(2, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(build_grid(0, 2), std::invalid_argument);
  }
  SECTION("diameter bound never exceeds (n-1)/m") {
    for (int n = 2; n <= 5; ++n)
      for (int m = 1; m <= 8; ++m) {
        SimplexGrid g = build_grid(n, m);
        REQUIRE(g.max_bin_diameter <= static_cast<double>(n - 1) / m + 1e-15);
        REQUIRE(g.max_bin_diameter > 0.0);
      }
  }
}

TEST_CASE("projection picks nearest representative, lowest index on ties", "[grid]") {
  SECTION("(0.6,0.4) on the two-point grid goes to the mass at state 0") {
    SimplexGrid g = build_grid(2, 1);
    REQUIRE(g.project(Measure(std::vector<double>{0.6, 0.4})) == 0);
  }
  SECTION("exact tie goes to index 0") {
    SimplexGrid g = build_grid(2, 1);
    REQUIRE(g.project(Measure::uniform(2)) == 0);
  }
  SECTION("representatives are their own bins") {
    SimplexGrid g = build_grid(3, 3);
    for (int i = 0; i < g.size(); ++i)
      REQUIRE(g.project(g.reps[static_cast<std::size_t>(i)]) == i);
  }
  SECTION("support size mismatch rejected") {
    SimplexGrid g = build_grid(2, 2);
    REQUIRE_THROWS_AS(g.project(Measure::uniform(3)), std::invalid_argument);
  }
}

TEST_CASE("projection distance is within the bin diameter bound", "[grid][property]") {
  RngStream rng(20240811, 3);
  for (int n = 2; n <= 4; ++n) {
    for (int m : {1, 2, 5, 9}) {
      SimplexGrid g = build_grid(n, m);
      // Covering radius of the type lattice, derived independently.
      const double cover = static_cast<double>(n / 2) * static_cast<double>((n + 1) / 2) /
                           (static_cast<double>(n) * static_cast<double>(m));
      for (int trial = 0; trial < 100; ++trial) {
        Measure mu = random_measure(rng, n);
        const double d = g.projection_distance(mu);
        REQUIRE(d <= g.max_bin_diameter + 1e-12);
        REQUIRE(d <= cover + 1e-12);
      }
    }
  }
}

TEST_CASE("two points of one bin are within the diameter bound", "[grid][property]") {
  RngStream rng(20240811, 4);
  for (int n : {2, 3}) {
    const int m = 4;
    SimplexGrid g = build_grid(n, m);
    std::vector<std::vector<Measure>> by_bin(static_cast<std::size_t>(g.size()));
    for (int trial = 0; trial < 600; ++trial) {
      Measure mu = random_measure(rng, n, 0.0);
      by_bin[static_cast<std::size_t>(g.project(mu))].push_back(mu);
    }
    for (const auto& bin : by_bin)
      for (std::size_t i = 0; i + 1 < bin.size(); ++i)
        REQUIRE(tv_distance(bin[i], bin[i + 1]) <= g.max_bin_diameter + 1e-12);
  }
}
