#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/coupling.hpp"
#include "epichaos/kinetic_solver.hpp"

namespace epichaos {

/// Piecewise-constant density on a GridSpec, [a][ix][iy][iv], per unit
/// (area x angle). The common currency for comparing particles and fields.
struct DensityGrid {
  GridSpec grid;
  std::vector<double> values;

  double mass() const noexcept;
};

/// One-agent empirical marginal f^N_1: agent counts per phase-space cell.
struct EmpiricalMarginal {
  GridSpec grid;
  std::size_t n = 0;
  double t = 0.0;
  std::vector<std::int64_t> counts;  // [a][ix][iy][iv]

  /// count / (N h^2 (2 pi / k)).
  DensityGrid density() const;
};

EmpiricalMarginal empirical_marginal(std::span<const AgentState> agents, const GridSpec& grid,
                                     double t = 0.0);

DensityGrid to_density(const KineticField& field);

/// Integrates the field's piecewise-constant density over the cells of a
/// coarser (or differently aligned) grid on the same torus.
DensityGrid project(const KineticField& field, const GridSpec& target);

/// sum |f - g| * cell measure. Throws std::invalid_argument on grid mismatch.
double l1_distance(const DensityGrid& f, const DensityGrid& g);
double l1_distance(const EmpiricalMarginal& f, const EmpiricalMarginal& g);
double l1_distance(const EmpiricalMarginal& f, const KineticField& field);

/// Discrete-metric transport cost of the coupled empirical pair
/// (1/N) sum_i ([z_i != z'_i] + [a_i != b_i]); positions are shared, so only
/// labels contribute.
double coupled_transport_cost(const CoupledEnsemble& state) noexcept;

/// Total variation between the binned empirical marginals of the A and B
/// labels. Any coupling's cost bounds it from above.
double binned_label_tv(const CoupledEnsemble& state, const GridSpec& grid);

/// D_N(t) read off a coupled run: the coupling upper estimate of the
/// discrete-metric Wasserstein distance between the two one-agent laws.
std::vector<double> wasserstein_discrete_upper(const std::vector<CoupledSample>& run);

/// Pair-marginal factorization gap || f^N_2 - f^N_1 (x) f^N_1 ||_1 on
/// labels x cells x cells. f^N_2 is estimated from ordered pairs of distinct
/// agents; both marginals are averaged over every configuration added, so
/// feeding independent replicas estimates the ensemble laws.
class PairCorrelation {
 public:
  PairCorrelation(std::size_t cells, double side);

  void add(std::span<const AgentState> agents);
  double gap() const;
  std::size_t configurations() const noexcept { return configs_; }

 private:
  std::size_t bin(const AgentState& a) const noexcept;

  std::size_t cells_;
  double side_;
  std::size_t bins_;
  std::size_t configs_ = 0;
  std::vector<double> one_;  // summed f1 estimates
  std::vector<double> two_;  // summed f2 estimates
};

/// Gap of a single configuration.
double pair_marginal_factorization_gap(std::span<const AgentState> agents, std::size_t cells,
                                       double side);

/// One replica's trajectory of a scalar observable.
struct Series {
  std::vector<double> times;
  std::vector<double> values;
};

struct EnsembleSummary {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::size_t replicas = 0;
};

/// Means and normal 95% intervals per sample time, reduced in replica order.
/// Throws std::invalid_argument for fewer than 2 replicas or mismatched times.
EnsembleSummary ensemble_aggregate(const std::vector<Series>& replicas);

}  // namespace epichaos
