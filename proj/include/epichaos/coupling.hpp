#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/initial.hpp"
#include "epichaos/nonlinear_process.hpp"
#include "epichaos/particle_process.hpp"
#include "epichaos/random.hpp"

namespace epichaos {

/// Shared positions and headings Z_N carrying two label vectors: A follows
/// the N-agent process, B the nonlinear process.
class CoupledEnsemble {
 public:
  CoupledEnsemble() = default;
  /// B starts as a copy of A.
  CoupledEnsemble(std::vector<AgentState> agents, double side, double t0 = 0.0);

  std::size_t size() const noexcept { return motion_.size(); }
  double time() const noexcept { return motion_.time(); }
  const TorusGeometry& geometry() const noexcept { return motion_.geometry(); }

  Label a(std::size_t i) const noexcept { return motion_.label(i); }
  Label b(std::size_t i) const noexcept { return b_[i]; }
  Vec2 position_at(std::size_t i, double t) const noexcept { return motion_.position_at(i, t); }
  Vec2 position(std::size_t i) const noexcept { return motion_.position_at(i, time()); }

  const LabelCounts& counts_a() const noexcept { return motion_.counts(); }
  const LabelCounts& counts_b() const noexcept { return counts_b_; }
  std::size_t mismatches() const noexcept { return mismatches_; }

  /// Agents at the ensemble time, carrying A or B labels.
  std::vector<AgentState> agents_a() const;
  std::vector<AgentState> agents_b() const;

  void set_time(double t) noexcept { motion_.set_time(t); }
  void synchronize() noexcept { motion_.synchronize(); }
  void set_heading(std::size_t i, double theta) noexcept { motion_.set_heading(i, theta); }
  void set_a(std::size_t i, Label l) noexcept;
  void set_b(std::size_t i, Label l) noexcept;

 private:
  EnsembleState motion_;  // positions, headings and the A labels
  std::vector<Label> b_;
  LabelCounts counts_b_;
  std::size_t mismatches_ = 0;
};

/// Per-agent split of the infection intensities.
///   j  = (1/N) sum_{k != i} [a_k = I][b_k = I] chi_ik   (shared)
///   j1 = (1/N) sum_{k != i} [a_k = I][b_k != I] chi_ik  (A only)
///   j2 = (1/N) sum_{k != i} [a_k != I][b_k = I] chi_ik  (B only)
///   e  = N_f(x_i) - (j + j2), which can be negative.
struct CouplingRates {
  double j = 0.0;
  double j1 = 0.0;
  double j2 = 0.0;
  double e = 0.0;

  double empirical_a() const noexcept { return j + j1; }
  double empirical_b() const noexcept { return j + j2; }
  double field() const noexcept { return j + j2 + e; }
};

/// Rates for agent i at the ensemble time.
CouplingRates compute_rates(const CoupledEnsemble& state, const FieldOracle& oracle,
                            const ModelParams& params, std::size_t i);

/// (1/N) #{k != i : b_k = I, |x_k - x_i| < r0} at the ensemble time.
double empirical_intensity_b(const CoupledEnsemble& state, const ModelParams& params,
                             std::size_t i);

/// The shared recovery clock of agent i: both labels take the I -> R rule.
/// Never increases the mismatch count.
void coupled_recovery(CoupledEnsemble& state, std::size_t i);

struct InfectionAttempts {
  bool a = false;
  bool b = false;
};

/// Infection proposal for agent i with partner j and an independent uniform u.
/// A attempts iff a_j = I and j is in range. With q = N_f(x_i) and
/// p = empirical_intensity_b(i):
///   q >= p: B attempts iff (b_j = I and in range), or otherwise u < (q-p)/(1-p);
///   q <  p: B attempts iff b_j = I, in range and u < q/p.
/// Each side's attempt rate is then exactly lambda p_A and lambda q, and the
/// two attempts coincide as often as possible. Attempts flip S -> I only.
InfectionAttempts coupled_infection_event(CoupledEnsemble& state, std::size_t i, std::size_t j,
                                          double u, const FieldOracle& oracle,
                                          const ModelParams& params);

/// (1/N) sum_i [a_i != b_i].
double mismatch_fraction(const CoupledEnsemble& state) noexcept;

struct CoupledSample {
  double t = 0.0;
  double mismatch = 0.0;
  LabelCounts a;
  LabelCounts b;
};

using CoupledObserver = std::function<void(std::size_t sample, const CoupledEnsemble&)>;

/// Event-driven run of the coupled generator from a given state: shared
/// heading clocks (rate 1), shared recovery clocks (rate gamma) and infection
/// proposals (rate lambda) per agent.
std::vector<CoupledSample> run_coupled(CoupledEnsemble& state, const FieldOracle& oracle,
                                       const ModelParams& params, const SamplePlan& plan,
                                       RandomStream& rng, const CoupledObserver& observer = {});

/// Samples Z_N, A_N = B_N i.i.d. from f0, then runs.
std::vector<CoupledSample> run_coupled(const InitialSpec& f0, const FieldOracle& oracle,
                                       const ModelParams& params, const SamplePlan& plan,
                                       RandomStream& rng, const CoupledObserver& observer = {});

/// The right-hand side of the mismatch bound, (t lambda / N) e^{2 lambda t}.
double mismatch_bound(double t, double lambda, std::size_t n) noexcept;

}  // namespace epichaos
