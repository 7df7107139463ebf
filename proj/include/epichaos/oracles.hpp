#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "epichaos/core.hpp"

// Brute-force references for the test and validation suites. Nothing here
// shares stepping code with the simulators it checks.
namespace epichaos::oracles {

/// Label vector <-> base-3 state index (agent 0 is the least significant digit).
std::size_t encode(std::span<const Label> labels);
std::vector<Label> decode(std::size_t state, std::size_t n);

/// Dense 3^N x 3^N generator of the label chain with every pair in contact:
/// each S agent becomes I at rate (lambda / N) #{j != i : a_j = I}, each I
/// agent becomes R at rate gamma.
class LabelChainGenerator {
 public:
  LabelChainGenerator(std::size_t n, double lambda, double gamma);

  std::size_t states() const noexcept { return states_; }
  double rate(std::size_t from, std::size_t to) const noexcept { return q_[from * states_ + to]; }

  /// p(t) = p(0) exp(tQ) by uniformization, truncated at 1e-15 Poisson tail.
  std::vector<double> evolve(std::span<const double> p0, double t) const;

 private:
  std::size_t n_;
  std::size_t states_;
  std::vector<double> q_;
};

/// Probability vector over 3^N label states at time t. Throws for N > 5.
std::vector<double> master_equation_solve(std::size_t n, double lambda, double gamma,
                                          std::span<const double> initial, double t);

/// Point mass on one label vector.
std::vector<double> point_mass(std::span<const Label> labels);

struct SirCurve {
  std::vector<double> t;
  std::vector<std::array<double, 3>> mass;  // (S, I, R)
};

/// Classical RK4 on S' = -beta S I, I' = beta S I - gamma I, R' = gamma I.
SirCurve sir_ode_solve(double beta, double gamma, std::array<double, 3> initial, double horizon,
                       double dt);

/// Literal O(M^4) periodic convolution of an m x m density with the disc of
/// radius r0: a source cell counts iff its centre is strictly within r0 of
/// the target centre. Multiplies by the h^2 cell area.
std::vector<double> direct_convolution(std::span<const double> density, std::size_t m, double side,
                                       double r0);

}  // namespace epichaos::oracles
