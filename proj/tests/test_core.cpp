#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/initial.hpp"
#include "epichaos/particle_process.hpp"
#include "epichaos/random.hpp"
#include "epichaos/stats.hpp"

using namespace epichaos;

TEST_CASE("torus distance wraps across the boundary") {
  const TorusGeometry g(1.0);
  CHECK(torus_distance({0.1, 0.1}, {0.9, 0.1}, g) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(torus_distance({0.3, 0.7}, {0.3, 0.7}, g) == 0.0);
  CHECK(torus_distance({0.0, 0.0}, {0.5, 0.5}, g) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(g.max_distance() == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("distance is symmetric and bounded") {
  const TorusGeometry g(2.5);
  RandomStream rng({7, 0});
  for (int k = 0; k < 10000; ++k) {
    const Vec2 a{2.5 * rng.uniform(), 2.5 * rng.uniform()};
    const Vec2 b{2.5 * rng.uniform(), 2.5 * rng.uniform()};
    const double d = torus_distance(a, b, g);
    CHECK(d == torus_distance(b, a, g));
    CHECK(d >= 0.0);
    CHECK(d <= g.max_distance() + 1e-15);
  }
}

TEST_CASE("in_range uses a strict inequality") {
  const TorusGeometry g(1.0);
  CHECK(in_range({0.1, 0.1}, {0.9, 0.1}, 0.25, g));
  // Dyadic coordinates make the wrapped distance exactly 0.25.
  CHECK_FALSE(in_range({0.125, 0.5}, {0.875, 0.5}, 0.25, g));
  CHECK(in_range({0.125, 0.5}, {0.875, 0.5}, 0.25 + 1e-12, g));
  RandomStream rng({8, 0});
  for (int k = 0; k < 1000; ++k) {
    CHECK(in_range({rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}, 0.8, g));
  }
}

TEST_CASE("wrap is idempotent and lands in [0, D)") {
  const TorusGeometry g(1.0);
  for (double c : {-1e-17, -0.3, 0.0, 0.999999999999, 1.0, 1.7, -5.25, 1e6 + 0.5}) {
    const double w = g.wrap(c);
    CHECK(w >= 0.0);
    CHECK(w < 1.0);
    CHECK(g.wrap(w) == w);
  }
  CHECK(wrap_angle(-1e-18) < kTwoPi);
  CHECK(wrap_angle(kTwoPi) == 0.0);
}

TEST_CASE("free flight") {
  const TorusGeometry g(1.0);
  const AgentState a{{0.5, 0.5}, 0.0, Label::S};
  const AgentState b = advance_free(a, 0.25, g);
  CHECK(b.x.x == doctest::Approx(0.75));
  CHECK(b.x.y == doctest::Approx(0.5));
  const AgentState c = advance_free({{0.9, 0.5}, 0.0, Label::I}, 0.2, g);
  CHECK(c.x.x == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(c.label == Label::I);
  CHECK(advance_free(a, 0.0, g) == a);
}

TEST_CASE("model parameters are validated") {
  ModelParams p{100, 1.0, 0.1, 1.0, 0.5};
  CHECK_NOTHROW(p.validate());
  p.r0 = -0.1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("R0"), std::invalid_argument);
  p = {0, 1.0, 0.1, 1.0, 0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("label rules") {
  CHECK(recovered(Label::I) == Label::R);
  CHECK(recovered(Label::S) == Label::S);
  CHECK(recovered(Label::R) == Label::R);
  CHECK(infected(Label::S) == Label::I);
  CHECK(infected(Label::R) == Label::R);
  CHECK(label_from_char(label_char(Label::I)) == Label::I);
}

TEST_CASE("seed streams are reproducible and distinct") {
  RandomStream a({42, 3}), b({42, 3}), c({42, 4});
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differs = differs || x != c.uniform();
  }
  CHECK(differs);
  CHECK(SeedSpec{1, 0}.child(5) == SeedSpec{1, 0}.child(5));
  CHECK_FALSE(SeedSpec{1, 0}.child(5) == SeedSpec{1, 0}.child(6));
  CHECK_FALSE(SeedSpec{1, 0}.child(5) == SeedSpec{2, 0}.child(5));
}

TEST_CASE("below is in range and roughly uniform") {
  RandomStream rng({11, 0});
  std::vector<std::int64_t> counts(7, 0);
  for (int k = 0; k < 70000; ++k) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  CHECK(stats::chi_square_uniform_p(counts) > 1e-3);
}

TEST_CASE("headings are uniform on the circle") {
  RandomStream rng({2024, 1});
  const int n = 1000000;
  double c = 0.0, s = 0.0;
  std::vector<std::int64_t> bins(36, 0);
  for (int k = 0; k < n; ++k) {
    const double th = sample_velocity(rng);
    REQUIRE(th >= 0.0);
    REQUIRE(th < kTwoPi);
    c += std::cos(th);
    s += std::sin(th);
    ++bins[std::min<std::size_t>(35, static_cast<std::size_t>(th / kTwoPi * 36))];
  }
  CHECK(std::abs(c / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(stats::chi_square_uniform_p(bins) > 1e-3);
}

TEST_CASE("exponential variates have the right mean") {
  RandomStream rng({5, 5});
  double sum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) sum += rng.exponential(4.0);
  CHECK(std::abs(sum / n - 0.25) < 4.0 * 0.25 / std::sqrt(n));
}

TEST_CASE("initial sampling") {
  SUBCASE("label fractions are binomial") {
    RandomStream rng({1, 1});
    const auto agents = sample_agents(InitialSpec::uniform({0.9, 0.1, 0.0}), 1000000, 1.0, rng);
    double inf = 0.0;
    for (const auto& a : agents) {
      inf += a.label == Label::I ? 1.0 : 0.0;
      REQUIRE(a.label != Label::R);
    }
    CHECK(std::abs(inf / 1e6 - 0.1) < 3.0 * std::sqrt(0.09 / 1e6));
  }
  SUBCASE("a concentrated law puts every agent in one cell") {
    InitialSpec spec;
    spec.cells = 4;
    spec.cell_mass.assign(16, 0.0);
    spec.cell_mass[1 * 4 + 2] = 1.0;
    spec.label_mix.assign(16, {1.0, 0.0, 0.0});
    spec.heading = 1.0;
    RandomStream rng({1, 2});
    for (const auto& a : sample_agents(spec, 1000, 2.0, rng)) {
      CHECK(a.x.x >= 0.5);
      CHECK(a.x.x < 1.0);
      CHECK(a.x.y >= 1.0);
      CHECK(a.x.y < 1.5);
      CHECK(a.theta == 1.0);
    }
  }
  SUBCASE("independent streams give uncorrelated ensembles") {
    const int reps = 4000;
    std::vector<double> x(reps), y(reps);
    const InitialSpec spec = InitialSpec::uniform({0.5, 0.5, 0.0});
    for (int r = 0; r < reps; ++r) {
      RandomStream a(SeedSpec{9, 0}.child(r)), b(SeedSpec{9, 1}.child(r));
      x[r] = static_cast<double>(sample_initial(spec, 50, 1.0, a).counts()[Label::I]);
      y[r] = static_cast<double>(sample_initial(spec, 50, 1.0, b).counts()[Label::I]);
    }
    double mx = 0, my = 0;
    for (int r = 0; r < reps; ++r) mx += x[r], my += y[r];
    mx /= reps, my /= reps;
    double sxy = 0, sxx = 0, syy = 0;
    for (int r = 0; r < reps; ++r) {
      sxy += (x[r] - mx) * (y[r] - my);
      sxx += (x[r] - mx) * (x[r] - mx);
      syy += (y[r] - my) * (y[r] - my);
    }
    CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 3.0 / std::sqrt(reps));
  }
  SUBCASE("bad specs are rejected") {
    InitialSpec spec = InitialSpec::uniform({0.5, 0.4, 0.0});
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  }
}
