#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/random.hpp"

namespace epichaos {

struct EventCounters {
  std::uint64_t velocity_jumps = 0;
  std::uint64_t recoveries = 0;   // effective I->R flips
  std::uint64_t proposals = 0;    // infection clocks that rang
  std::uint64_t infections = 0;   // effective S->I flips

  friend bool operator==(const EventCounters&, const EventCounters&) = default;
};

/// The N-agent configuration (Z_N; A_N) plus the clock.
///
/// Free flight is applied lazily: agent i's stored position is valid at
/// stamp(i), and position_at() extrapolates along the current heading.
/// synchronize() brings every agent to the ensemble time.
class EnsembleState {
 public:
  EnsembleState() = default;
  EnsembleState(std::vector<AgentState> agents, double side, double t0 = 0.0);

  std::size_t size() const noexcept { return agents_.size(); }
  double time() const noexcept { return t_; }
  const TorusGeometry& geometry() const noexcept { return geom_; }

  /// Agent i as stored (position valid at stamp(i)).
  const AgentState& stored(std::size_t i) const noexcept { return agents_[i]; }
  double stamp(std::size_t i) const noexcept { return stamps_[i]; }
  Label label(std::size_t i) const noexcept { return agents_[i].label; }

  /// Agent i's position at time t >= stamp(i).
  Vec2 position_at(std::size_t i, double t) const noexcept;
  /// Agent i fully advanced to the ensemble time.
  AgentState agent(std::size_t i) const noexcept;
  /// All agents advanced to the ensemble time.
  std::vector<AgentState> agents() const;

  const LabelCounts& counts() const noexcept { return counts_; }
  const EventCounters& counters() const noexcept { return counters_; }
  EventCounters& counters() noexcept { return counters_; }

  void set_time(double t) noexcept { t_ = t; }
  void synchronize() noexcept;
  /// Moves agent i to the ensemble time and gives it a new heading.
  void set_heading(std::size_t i, double theta) noexcept;
  void set_label(std::size_t i, Label a) noexcept;

  friend bool operator==(const EnsembleState&, const EnsembleState&) = default;

 private:
  std::vector<AgentState> agents_;
  std::vector<double> stamps_;
  std::vector<Vec2> headings_;
  TorusGeometry geom_{1.0};
  double t_ = 0.0;
  LabelCounts counts_;
  EventCounters counters_;
};

/// How infection clocks are attached.
///  PairClock: one clock of rate lambda/N per unordered pair.
///  PerAgent:  one clock of rate lambda per agent, partner uniform over all N
///             indices (self-pick is a no-op).
/// Both give each susceptible agent the same infection intensity.
enum class InteractionScheme { PerAgent, PairClock };

enum class EventKind { VelocityJump, Recovery, PairClock, Proposal };

struct Event {
  EventKind kind = EventKind::VelocityJump;
  std::size_t i = 0;
  std::size_t j = 0;  // partner for PairClock (i < j) and Proposal

  friend bool operator==(const Event&, const Event&) = default;
};

struct ScheduledEvent {
  double holding = 0.0;
  Event event;
};

/// Sum of all clock rates: N + gamma N + lambda (N-1)/2 for pair clocks,
/// N + gamma N + lambda N for per-agent clocks.
double total_event_rate(const ModelParams& params,
                        InteractionScheme scheme = InteractionScheme::PairClock) noexcept;

ScheduledEvent sample_event(const EnsembleState& state, const ModelParams& params,
                            InteractionScheme scheme, RandomStream& rng);

/// I -> R for agent i, otherwise a no-op.
void apply_recovery(EnsembleState& state, std::size_t i);

/// Contact between i and j at the ensemble time: an (S, I) pair in range
/// becomes (I, I). Anything else is a no-op.
void apply_pair_infection(EnsembleState& state, std::size_t i, std::size_t j,
                          const ModelParams& params);

/// Applies a drawn event at the current ensemble time. Velocity jumps consume
/// one heading draw from rng.
void apply_event(EnsembleState& state, const Event& event, const ModelParams& params,
                 RandomStream& rng);

/// One jump of the process: holding time, free flight, jump.
void step(EnsembleState& state, const ModelParams& params, InteractionScheme scheme,
          RandomStream& rng);

struct Observation {
  double t = 0.0;
  LabelCounts counts;
};

/// Horizon plus the times at which observations are taken.
struct SamplePlan {
  double horizon = 0.0;
  std::vector<double> times;

  /// Sorted, deduplicated sample times; {0, T} when none were given.
  /// Throws std::invalid_argument for a time outside [0, T].
  std::vector<double> resolved() const;
};

/// Called with the ensemble synchronized to each sample time.
using EnsembleObserver = std::function<void(std::size_t sample, const EnsembleState&)>;

/// Runs until the horizon, observing at each sample time. The state is left
/// synchronized at exactly T.
std::vector<Observation> run(EnsembleState& state, const ModelParams& params,
                             const SamplePlan& plan, InteractionScheme scheme, RandomStream& rng,
                             const EnsembleObserver& observer = {});

}  // namespace epichaos
