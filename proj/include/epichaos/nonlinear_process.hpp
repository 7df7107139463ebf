#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/initial.hpp"
#include "epichaos/kinetic_solver.hpp"
#include "epichaos/particle_process.hpp"
#include "epichaos/random.hpp"

namespace epichaos {

/// Time-dependent infection intensity N_f(x, t) read off the kinetic solver:
/// bilinear in space between cell centres (periodic), linear in time between
/// records, clamped to [0, 1].
class FieldOracle {
 public:
  explicit FieldOracle(IntensityHistory history);

  /// Throws std::out_of_range if t lies outside the recorded span.
  double nf_at(Vec2 x, double t) const;

  double start() const noexcept { return history_.times.front(); }
  double end() const noexcept { return history_.times.back(); }
  const IntensityHistory& history() const noexcept { return history_; }

 private:
  double spatial(const InfectionIntensity& grid, Vec2 x) const noexcept;

  IntensityHistory history_;
  double cell_;
};

double nf_at(const FieldOracle& oracle, Vec2 x, double t);

/// Result of one jump of the single-agent process.
struct AgentStep {
  AgentState agent;   // state right after the jump
  double t = 0.0;     // jump time
  Event event;        // Proposal carries no partner (j == i)
  bool accepted = false;
};

/// One jump of the one-particle nonlinear process started from (agent, t):
/// rate-1 heading jumps, rate-gamma recovery clock, and infection proposals
/// at majorant rate lambda accepted with probability N_f(x, t). The agent
/// never looks at any other agent.
AgentStep step_agent(const AgentState& agent, double t, const FieldOracle& oracle,
                     const ModelParams& params, RandomStream& rng);

/// Called for every (sample, agent) with that agent's state at the sample time.
using AgentObserver = std::function<void(std::size_t sample, std::size_t agent, const AgentState&)>;

struct MeanFieldRun {
  std::vector<Observation> observations;
  std::vector<AgentState> final_agents;  // at the horizon
};

/// Runs one agent from its initial state to the horizon, reporting its state
/// at each of the (sorted) sample times.
AgentState run_agent(AgentState agent, const FieldOracle& oracle, const ModelParams& params,
                     const std::vector<double>& samples, double horizon, RandomStream& rng,
                     const std::function<void(std::size_t sample, const AgentState&)>& at_sample);

/// N independent copies of the nonlinear process, each initialized from f0
/// and driven by its own stream seed.child(agent).
MeanFieldRun run_ensemble(std::size_t n, const InitialSpec& f0, const FieldOracle& oracle,
                          const ModelParams& params, const SamplePlan& plan, SeedSpec seed,
                          const AgentObserver& observer = {});

}  // namespace epichaos
