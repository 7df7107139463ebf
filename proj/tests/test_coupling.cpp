#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "epichaos/coupling.hpp"
#include "epichaos/initial.hpp"
#include "epichaos/kinetic_solver.hpp"
#include "epichaos/observables.hpp"

using namespace epichaos;

namespace {

FieldOracle constant_oracle(double c, double horizon = 10.0) {
  IntensityHistory h;
  h.times = {0.0, horizon};
  h.grids.assign(2, InfectionIntensity{8, 1.0, std::vector<double>(64, c)});
  return FieldOracle(h);
}

/// Agents on a line y = 0.5 at the given x coordinates, all S.
CoupledEnsemble line(std::initializer_list<double> xs) {
  std::vector<AgentState> agents;
  for (double x : xs) agents.push_back({{x, 0.5}, 0.0, Label::S});
  return CoupledEnsemble(agents, 1.0);
}

}  // namespace

TEST_CASE("rate decomposition") {
  const ModelParams p{3, 1.0, 0.1, 1.0, 0.5};
  const FieldOracle oracle = constant_oracle(0.25);
  SUBCASE("equal label vectors") {
    CoupledEnsemble s = line({0.5, 0.52, 0.55});
    s.set_a(1, Label::I), s.set_b(1, Label::I);
    s.set_a(2, Label::I), s.set_b(2, Label::I);
    const CouplingRates r = compute_rates(s, oracle, p, 0);
    CHECK(r.j1 == 0.0);
    CHECK(r.j2 == 0.0);
    CHECK(r.j == doctest::Approx(2.0 / 3.0));
    CHECK(r.empirical_a() == r.empirical_b());
    CHECK(r.field() == doctest::Approx(0.25));
  }
  SUBCASE("nobody in range") {
    CoupledEnsemble s = line({0.1, 0.5, 0.8});
    s.set_a(1, Label::I), s.set_b(1, Label::I);
    const CouplingRates r = compute_rates(s, oracle, p, 0);
    CHECK(r.j == 0.0);
    CHECK(r.j1 == 0.0);
    CHECK(r.j2 == 0.0);
    CHECK(r.e == doctest::Approx(0.25));
  }
  SUBCASE("two agents, partner infected only in A") {
    CoupledEnsemble s = line({0.5, 0.55});
    s.set_a(1, Label::I);
    const CouplingRates r = compute_rates(s, oracle, {2, 1.0, 0.1, 1.0, 0.5}, 0);
    CHECK(r.j == 0.0);
    CHECK(r.j1 == 0.5);
    CHECK(r.j2 == 0.0);
    CHECK(empirical_intensity_b(s, {2, 1.0, 0.1, 1.0, 0.5}, 0) == 0.0);
  }
}

TEST_CASE("shared recovery") {
  CoupledEnsemble s = line({0.1, 0.3, 0.6});
  s.set_a(0, Label::I), s.set_b(0, Label::I);
  s.set_a(1, Label::I), s.set_b(1, Label::R);
  REQUIRE(s.mismatches() == 1);
  coupled_recovery(s, 0);
  CHECK(s.a(0) == Label::R);
  CHECK(s.b(0) == Label::R);
  CHECK(s.mismatches() == 1);
  coupled_recovery(s, 1);
  CHECK(s.a(1) == Label::R);
  CHECK(s.b(1) == Label::R);
  CHECK(s.mismatches() == 0);
  coupled_recovery(s, 2);
  CHECK(s.a(2) == Label::S);
  CHECK(s.b(2) == Label::S);
}

TEST_CASE("coupled infection proposals") {
  const ModelParams p{3, 1.0, 0.1, 1.0, 0.5};
  SUBCASE("infected partner in range with q >= p: both attempt") {
    CoupledEnsemble s = line({0.5, 0.55, 0.9});
    s.set_a(1, Label::I), s.set_b(1, Label::I);
    const InfectionAttempts at = coupled_infection_event(s, 0, 1, 0.999, constant_oracle(0.9), p);
    CHECK(at.a);
    CHECK(at.b);
    CHECK(s.a(0) == Label::I);
    CHECK(s.b(0) == Label::I);
    CHECK(s.mismatches() == 0);
  }
  SUBCASE("equal labels and q = p never split") {
    CoupledEnsemble s = line({0.5, 0.55, 0.58});
    s.set_a(1, Label::I), s.set_b(1, Label::I);
    const double q = empirical_intensity_b(s, p, 0);
    REQUIRE(q == doctest::Approx(1.0 / 3.0));
    const FieldOracle oracle = constant_oracle(q);
    for (std::size_t j = 0; j < 3; ++j) {
      for (double u : {0.0, 0.2, 0.5, 0.9}) {
        CoupledEnsemble c = s;
        const InfectionAttempts at = coupled_infection_event(c, 0, j, u, oracle, p);
        CHECK(at.a == at.b);
        CHECK(c.mismatches() == 0);
      }
    }
  }
  SUBCASE("zero field: B never attempts") {
    CoupledEnsemble s = line({0.5, 0.55, 0.58});
    s.set_a(1, Label::I), s.set_b(1, Label::I);
    for (std::size_t j = 0; j < 3; ++j) {
      for (double u : {0.0, 0.3, 0.99}) {
        CoupledEnsemble c = s;
        CHECK_FALSE(coupled_infection_event(c, 0, j, u, constant_oracle(0.0), p).b);
      }
    }
  }
}

TEST_CASE("attempt probabilities have the right marginals") {
  // Average over the uniform partner and a fine grid of u.
  const ModelParams p{5, 1.0, 0.1, 1.0, 0.5};
  CoupledEnsemble s = line({0.5, 0.52, 0.54, 0.56, 0.9});
  s.set_a(1, Label::I), s.set_b(1, Label::I);
  s.set_a(2, Label::I);
  s.set_b(3, Label::I);
  const double pa = 2.0 / 5.0, pb = 2.0 / 5.0;
  REQUIRE(empirical_intensity_b(s, p, 0) == doctest::Approx(pb));
  for (double q : {0.0, 0.1, pb, 0.7, 1.0}) {
    const FieldOracle oracle = constant_oracle(q);
    const int grid = 2000;
    double a = 0.0, b = 0.0, both = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      for (int k = 0; k < grid; ++k) {
        CoupledEnsemble c = s;
        const InfectionAttempts at = coupled_infection_event(c, 0, j, (k + 0.5) / grid, oracle, p);
        a += at.a, b += at.b, both += at.a && at.b;
      }
    }
    const double norm = 5.0 * grid;
    CHECK(a / norm == doctest::Approx(pa));
    CHECK(b / norm == doctest::Approx(q).epsilon(1e-3));
    // Partner 1 is infected on both sides; partner 2 only in A and can only
    // share the spare B rate (q - p) / (1 - p).
    const double shared = 0.2 * std::min(1.0, q / pb) + 0.2 * std::max(0.0, q - pb) / (1.0 - pb);
    CHECK(both / norm == doctest::Approx(shared).epsilon(1e-3));
  }
}

TEST_CASE("mismatch fraction") {
  CoupledEnsemble s = line({0.1, 0.4, 0.7});
  CHECK(mismatch_fraction(s) == 0.0);
  s.set_a(1, Label::I);
  s.set_a(2, Label::R), s.set_b(2, Label::R);
  CHECK(mismatch_fraction(s) == doctest::Approx(1.0 / 3.0));
  s.set_b(0, Label::I);
  s.set_b(2, Label::I);
  CHECK(mismatch_fraction(s) == 1.0);
  CHECK(coupled_transport_cost(s) == mismatch_fraction(s));
}

TEST_CASE("coupled runs") {
  const GridSpec g{32, 8, 1e-3, 1.0};
  const InitialSpec f0 = InitialSpec::uniform({0.9, 0.1, 0.0});
  SUBCASE("no infection, no divergence") {
    const ModelParams p{200, 1.0, 0.1, 0.0, 0.5};
    const FieldOracle oracle(solve(project_initial(f0, g), p, g, 2.0, {}).history);
    RandomStream rng({1, 0});
    const auto run = run_coupled(f0, oracle, p, {2.0, {0.0, 0.5, 1.0, 2.0}}, rng);
    for (const auto& s : run) {
      CHECK(s.mismatch == 0.0);
      CHECK(s.a == s.b);
    }
    CHECK(wasserstein_discrete_upper(run) == std::vector<double>(4, 0.0));
  }
  SUBCASE("mismatch starts at zero, stays a fraction, and matches a recount") {
    const ModelParams p{300, 1.0, 0.1, 2.0, 0.5};
    const FieldOracle oracle(solve(project_initial(f0, g), p, g, 1.0, {}).history);
    RandomStream rng({2, 0});
    CoupledEnsemble state(sample_agents(f0, p.n, 1.0, rng), 1.0);
    const auto run = run_coupled(state, oracle, p, {1.0, {0.0, 0.25, 0.5, 1.0}}, rng,
                                 [&](std::size_t, const CoupledEnsemble& c) {
                                   CHECK(coupled_transport_cost(c) == mismatch_fraction(c));
                                   CHECK(binned_label_tv(c, GridSpec{4, 4, 1e-3, 1.0}) <=
                                         mismatch_fraction(c));
                                 });
    CHECK(run.front().mismatch == 0.0);
    for (const auto& s : run) {
      CHECK(s.mismatch >= 0.0);
      CHECK(s.mismatch <= 1.0);
      CHECK(s.a.total() == 300);
      CHECK(s.b.total() == 300);
    }
  }
  SUBCASE("the bound at N = 1000") {
    const ModelParams p{1000, 1.0, 0.1, 1.0, 0.5};
    const FieldOracle oracle(solve(project_initial(f0, g), p, g, 1.0, {}).history);
    double mean = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      RandomStream rng(SeedSpec{3, 0}.child(r));
      mean += run_coupled(f0, oracle, p, {1.0, {1.0}}, rng).back().mismatch / reps;
    }
    CHECK(mean <= mismatch_bound(1.0, 1.0, 1000));
    CHECK(mismatch_bound(1.0, 1.0, 1000) == doctest::Approx(std::exp(2.0) / 1000));
  }
  SUBCASE("identical seeds reproduce the run") {
    const ModelParams p{100, 1.0, 0.1, 2.0, 0.5};
    const FieldOracle oracle(solve(project_initial(f0, g), p, g, 1.0, {}).history);
    auto once = [&] {
      RandomStream rng({4, 4});
      const auto run = run_coupled(f0, oracle, p, {1.0, {0.5, 1.0}}, rng);
      return std::pair{run.back().mismatch, run.back().a};
    };
    CHECK(once() == once());
  }
}
