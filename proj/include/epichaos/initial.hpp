#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/random.hpp"

namespace epichaos {

/// One-particle initial law f0 on torus x circle x labels, piecewise constant
/// on a cells x cells spatial grid. Each cell carries a probability mass and a
/// label mix; headings are uniform on the circle, or a single fixed angle.
struct InitialSpec {
  std::size_t cells = 1;
  std::vector<double> cell_mass;                  // row-major [ix][iy], sums to 1
  std::vector<std::array<double, 3>> label_mix;   // per cell, (S, I, R), sums to 1
  std::optional<double> heading;                  // unset: uniform headings

  /// Spatially uniform law with one label mix everywhere.
  static InitialSpec uniform(std::array<double, 3> mix);

  /// Throws std::invalid_argument if any mass is negative or a
  /// normalization is off by more than 1e-9.
  void validate() const;

  /// Total probability of each label.
  std::array<double, 3> label_marginal() const;
};

class EnsembleState;

/// N i.i.d. draws from f0 into a fresh ensemble at time 0.
EnsembleState sample_initial(const InitialSpec& spec, std::size_t n, double side, RandomStream& rng);

/// N i.i.d. agents from f0.
std::vector<AgentState> sample_agents(const InitialSpec& spec, std::size_t n, double side,
                                      RandomStream& rng);

/// Draws single agents from f0; keeps the cumulative cell table around.
class InitialSampler {
 public:
  InitialSampler(const InitialSpec& spec, double side);

  AgentState operator()(RandomStream& rng) const;

 private:
  const InitialSpec* spec_;
  double side_;
  double cell_;
  std::vector<double> cumulative_;
};

}  // namespace epichaos
