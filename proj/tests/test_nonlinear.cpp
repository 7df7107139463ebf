#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "epichaos/kinetic_solver.hpp"
#include "epichaos/nonlinear_process.hpp"

using namespace epichaos;

namespace {

FieldOracle constant_oracle(double c, double horizon, std::size_t m = 8) {
  IntensityHistory h;
  h.times = {0.0, horizon};
  h.grids.assign(2, InfectionIntensity{m, 1.0, std::vector<double>(m * m, c)});
  return FieldOracle(h);
}

InitialSpec two_patch() {
  InitialSpec spec;
  spec.cells = 2;
  spec.cell_mass = {0.4, 0.1, 0.2, 0.3};
  spec.label_mix = {{{0.7, 0.3, 0.0}}, {{1.0, 0.0, 0.0}}, {{0.95, 0.05, 0.0}}, {{1.0, 0.0, 0.0}}};
  return spec;
}

}  // namespace

TEST_CASE("field oracle interpolation") {
  const std::size_t m = 4;
  IntensityHistory h;
  h.times = {0.0, 0.5, 1.0};
  for (int r = 0; r < 3; ++r) {
    InfectionIntensity g{m, 1.0, std::vector<double>(m * m)};
    for (std::size_t q = 0; q < m * m; ++q) g.values[q] = 0.01 * static_cast<double>(q + r);
    h.grids.push_back(g);
  }
  const FieldOracle oracle(h);
  // Cell centres at records reproduce the stored values exactly.
  for (std::size_t ix = 0; ix < m; ++ix) {
    for (std::size_t iy = 0; iy < m; ++iy) {
      const Vec2 x{(ix + 0.5) / m, (iy + 0.5) / m};
      CHECK(oracle.nf_at(x, 0.5) == h.grids[1].at(ix, iy));
      CHECK(nf_at(oracle, x, 1.0) == h.grids[2].at(ix, iy));
    }
  }
  // Linear in time.
  const Vec2 c{0.125, 0.375};
  CHECK(oracle.nf_at(c, 0.25) == doctest::Approx(0.5 * (h.grids[0].at(0, 1) + h.grids[1].at(0, 1))));
  // Bilinear and periodic in space: halfway between the last and first column.
  const Vec2 seam{0.0, 0.125};
  CHECK(oracle.nf_at(seam, 0.0) ==
        doctest::Approx(0.5 * (h.grids[0].at(3, 0) + h.grids[0].at(0, 0))));
  CHECK_THROWS_AS(oracle.nf_at(c, 1.1), std::out_of_range);
  CHECK_THROWS_AS(oracle.nf_at(c, -0.1), std::out_of_range);
}

TEST_CASE("field oracle on solver output") {
  const GridSpec g{64, 4, 1e-3, 1.0};
  const ModelParams p{10, 1.0, 0.15, 0.0, 0.0};
  const auto sol = solve(project_initial(InitialSpec::uniform({0.7, 0.3, 0.0}), g), p, g, 0.05, {});
  const FieldOracle oracle(sol.history);
  const double expected = 0.3 * std::numbers::pi * 0.15 * 0.15;
  RandomStream rng({1, 0});
  for (int k = 0; k < 100; ++k) {
    const double v = oracle.nf_at({rng.uniform(), rng.uniform()}, 0.05 * rng.uniform());
    CHECK(std::abs(v - expected) <= 0.02 * expected);
  }
  const auto none = solve(project_initial(InitialSpec::uniform({1.0, 0.0, 0.0}), g), p, g, 0.05, {});
  CHECK(FieldOracle(none.history).nf_at({0.3, 0.6}, 0.02) == 0.0);
}

TEST_CASE("no infections without infected mass") {
  const FieldOracle zero = constant_oracle(0.0, 5.0);
  const ModelParams p{1, 1.0, 0.1, 5.0, 0.5};
  RandomStream rng({2, 0});
  for (int r = 0; r < 200; ++r) {
    AgentState a{{rng.uniform(), rng.uniform()}, rng.angle(), Label::S};
    double t = 0.0;
    while (true) {
      const AgentStep s = step_agent(a, t, zero, p, rng);
      if (s.t > 5.0) break;
      REQUIRE(s.agent.label == Label::S);
      a = s.agent;
      t = s.t;
    }
  }
}

TEST_CASE("constant intensity gives an exponential infection time") {
  const double c = 0.3, lambda = 2.0, t = 1.0;
  const FieldOracle oracle = constant_oracle(c, t);
  const ModelParams p{1, 1.0, 0.1, lambda, 0.5};
  const std::size_t reps = 100000;
  std::size_t still = 0;
  RandomStream rng({3, 0});
  for (std::size_t r = 0; r < reps; ++r) {
    const AgentState a{{rng.uniform(), rng.uniform()}, rng.angle(), Label::S};
    const AgentState end = run_agent(a, oracle, p, {}, t, rng, {});
    still += end.label == Label::S ? 1 : 0;
  }
  const double q = std::exp(-lambda * c * t);
  CHECK(std::abs(static_cast<double>(still) / reps - q) < 3.0 * std::sqrt(q * (1 - q) / reps));
}

TEST_CASE("recovered agents never change label") {
  const FieldOracle oracle = constant_oracle(1.0, 3.0);
  const ModelParams p{1, 1.0, 0.1, 3.0, 1.0};
  RandomStream rng({4, 0});
  const AgentState a{{0.5, 0.5}, 0.0, Label::R};
  int jumps = 0;
  run_agent(a, oracle, p, {0.5, 1.0, 2.0}, 3.0, rng, [&](std::size_t, const AgentState& s) {
    CHECK(s.label == Label::R);
    ++jumps;
  });
  CHECK(jumps == 3);
}

TEST_CASE("one-agent ensemble equals a single agent run") {
  const FieldOracle oracle = constant_oracle(0.2, 2.0);
  const ModelParams p{1, 1.0, 0.1, 1.0, 0.5};
  const SeedSpec seed{5, 0};
  const InitialSpec f0 = InitialSpec::uniform({0.5, 0.5, 0.0});
  const MeanFieldRun ens = run_ensemble(1, f0, oracle, p, {2.0, {}}, seed);
  RandomStream rng(seed.child(0));
  const AgentState start = InitialSampler(f0, 1.0)(rng);
  const AgentState end = run_agent(start, oracle, p, {0.0, 2.0}, 2.0, rng, {});
  CHECK(ens.final_agents.front() == end);
}

TEST_CASE("ensemble agents are independent") {
  const FieldOracle oracle = constant_oracle(0.4, 1.0);
  const ModelParams p{2, 1.0, 0.1, 2.0, 0.5};
  const int reps = 10000;
  std::vector<double> a(reps), b(reps);
  for (int r = 0; r < reps; ++r) {
    const auto run = run_ensemble(2, InitialSpec::uniform({0.8, 0.2, 0.0}), oracle, p, {1.0, {1.0}},
                                  SeedSpec{6, 0}.child(r));
    a[r] = run.final_agents[0].label == Label::I ? 1.0 : 0.0;
    b[r] = run.final_agents[1].label == Label::I ? 1.0 : 0.0;
  }
  double ma = 0, mb = 0;
  for (int r = 0; r < reps; ++r) ma += a[r], mb += b[r];
  ma /= reps, mb /= reps;
  double sab = 0, saa = 0, sbb = 0;
  for (int r = 0; r < reps; ++r) {
    sab += (a[r] - ma) * (b[r] - mb);
    saa += (a[r] - ma) * (a[r] - ma);
    sbb += (b[r] - mb) * (b[r] - mb);
  }
  CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 3.0 / std::sqrt(reps));
}

TEST_CASE("ensemble label fractions follow the solver masses") {
  const GridSpec g{32, 8, 1e-3, 1.0};
  const ModelParams p{100000, 1.0, 0.15, 2.0, 0.5};
  const InitialSpec f0 = two_patch();
  const auto sol = solve(project_initial(f0, g), p, g, 1.0, {0.5, 1.0}, {ConvolutionBackend::Spectral, true, 5});
  const FieldOracle oracle(sol.history);
  const MeanFieldRun run = run_ensemble(p.n, f0, oracle, p, {1.0, {0.5, 1.0}}, {7, 0});
  for (std::size_t s = 0; s < 2; ++s) {
    const auto masses = sol.snapshots[s].field.label_masses();
    for (Label a : kLabels) {
      const double q = masses[index_of(a)];
      const double frac = static_cast<double>(run.observations[s].counts[a]) / p.n;
      MESSAGE("t=" << run.observations[s].t << " " << std::string(1, label_char(a)) << " solver " << q << " agents " << frac);
      CHECK(std::abs(frac - q) <= 3.0 * std::sqrt(q * (1 - q) / p.n) + 1e-12);
    }
  }
}

TEST_CASE("oracle must cover the horizon") {
  const FieldOracle oracle = constant_oracle(0.1, 1.0);
  CHECK_THROWS_AS(run_ensemble(3, InitialSpec::uniform({1, 0, 0}), oracle, {3, 1.0, 0.1, 1.0, 0.5},
                               {2.0, {}}, {1, 0}),
                  std::invalid_argument);
}
