#include "epichaos/particle_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epichaos {

EnsembleState::EnsembleState(std::vector<AgentState> agents, double side, double t0)
    : agents_(std::move(agents)), geom_(side), t_(t0) {
  stamps_.assign(agents_.size(), t0);
  headings_.reserve(agents_.size());
  for (auto& a : agents_) {
    a.x = geom_.wrap(a.x);
    a.theta = wrap_angle(a.theta);
    headings_.push_back(a.velocity());
    ++counts_[a.label];
  }
}

Vec2 EnsembleState::position_at(std::size_t i, double t) const noexcept {
  const double dt = t - stamps_[i];
  if (dt == 0.0) return agents_[i].x;
  const Vec2 x = agents_[i].x;
  const Vec2 v = headings_[i];
  return geom_.wrap(Vec2{x.x + v.x * dt, x.y + v.y * dt});
}

AgentState EnsembleState::agent(std::size_t i) const noexcept {
  AgentState a = agents_[i];
  a.x = position_at(i, t_);
  return a;
}

std::vector<AgentState> EnsembleState::agents() const {
  std::vector<AgentState> out;
  out.reserve(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) out.push_back(agent(i));
  return out;
}

void EnsembleState::synchronize() noexcept {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].x = position_at(i, t_);
    stamps_[i] = t_;
  }
}

void EnsembleState::set_heading(std::size_t i, double theta) noexcept {
  agents_[i].x = position_at(i, t_);
  stamps_[i] = t_;
  agents_[i].theta = theta;
  headings_[i] = agents_[i].velocity();
}

void EnsembleState::set_label(std::size_t i, Label a) noexcept {
  --counts_[agents_[i].label];
  ++counts_[a];
  agents_[i].label = a;
}

double total_event_rate(const ModelParams& params, InteractionScheme scheme) noexcept {
  const double n = static_cast<double>(params.n);
  const double infection = scheme == InteractionScheme::PairClock
                               ? params.lambda * (n - 1.0) / 2.0
                               : params.lambda * n;
  return n * ModelParams::kJumpRate + n * params.gamma + infection;
}

ScheduledEvent sample_event(const EnsembleState& state, const ModelParams& params,
                            InteractionScheme scheme, RandomStream& rng) {
  const std::uint64_t n = state.size();
  const double nd = static_cast<double>(n);
  const double jump = nd * ModelParams::kJumpRate;
  const double recovery = nd * params.gamma;
  const double total = total_event_rate(params, scheme);

  ScheduledEvent out;
  out.holding = rng.exponential(total);
  const double u = rng.uniform() * total;
  if (u < jump) {
    out.event = {EventKind::VelocityJump, rng.below(n), 0};
  } else if (u < jump + recovery) {
    out.event = {EventKind::Recovery, rng.below(n), 0};
  } else if (scheme == InteractionScheme::PairClock) {
    std::size_t i = rng.below(n);
    std::size_t j = rng.below(n - 1);
    if (j >= i) ++j;
    if (j < i) std::swap(i, j);
    out.event = {EventKind::PairClock, i, j};
  } else {
    out.event = {EventKind::Proposal, rng.below(n), rng.below(n)};
  }
  return out;
}

void apply_recovery(EnsembleState& state, std::size_t i) {
  if (state.label(i) == Label::I) {
    state.set_label(i, Label::R);
    ++state.counters().recoveries;
  }
}

void apply_pair_infection(EnsembleState& state, std::size_t i, std::size_t j,
                          const ModelParams& params) {
  if (i == j) return;
  const Label ai = state.label(i);
  const Label aj = state.label(j);
  const bool si = ai == Label::S && aj == Label::I;
  const bool is = ai == Label::I && aj == Label::S;
  if (!si && !is) return;
  const double t = state.time();
  if (!in_range(state.position_at(i, t), state.position_at(j, t), params.r0, state.geometry())) {
    return;
  }
  state.set_label(si ? i : j, Label::I);
  ++state.counters().infections;
}

void apply_event(EnsembleState& state, const Event& event, const ModelParams& params,
                 RandomStream& rng) {
  switch (event.kind) {
    case EventKind::VelocityJump:
      state.set_heading(event.i, sample_velocity(rng));
      ++state.counters().velocity_jumps;
      break;
    case EventKind::Recovery:
      apply_recovery(state, event.i);
      break;
    case EventKind::PairClock:
      ++state.counters().proposals;
      apply_pair_infection(state, event.i, event.j, params);
      break;
    case EventKind::Proposal:
      // Only the proposing agent can flip: partner must already be I.
      ++state.counters().proposals;
      if (state.label(event.i) == Label::S && state.label(event.j) == Label::I) {
        apply_pair_infection(state, event.i, event.j, params);
      }
      break;
  }
}

void step(EnsembleState& state, const ModelParams& params, InteractionScheme scheme,
          RandomStream& rng) {
  const ScheduledEvent next = sample_event(state, params, scheme, rng);
  state.set_time(state.time() + next.holding);
  apply_event(state, next.event, params, rng);
}

std::vector<double> SamplePlan::resolved() const {
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
  std::vector<double> out = times;
  if (out.empty()) out = {0.0, horizon};
  for (double s : out) {
    if (!(s >= 0.0) || s > horizon) {
      throw std::invalid_argument("sample time outside [0, T]");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Observation> run(EnsembleState& state, const ModelParams& params,
                             const SamplePlan& plan, InteractionScheme scheme, RandomStream& rng,
                             const EnsembleObserver& observer) {
  const std::vector<double> samples = plan.resolved();
  const double t0 = state.time();
  const double horizon = plan.horizon;
  std::vector<Observation> out;
  out.reserve(samples.size());
  std::size_t next_sample = 0;

  auto observe_until = [&](double limit) {
    while (next_sample < samples.size() && samples[next_sample] <= limit) {
      state.set_time(std::max(samples[next_sample], t0));
      state.synchronize();
      out.push_back({state.time(), state.counts()});
      if (observer) observer(next_sample, state);
      ++next_sample;
    }
  };

  observe_until(t0);
  while (true) {
    const ScheduledEvent next = sample_event(state, params, scheme, rng);
    const double t_next = state.time() + next.holding;
    if (t_next > horizon) {
      observe_until(horizon);
      break;
    }
    observe_until(t_next);
    state.set_time(t_next);
    apply_event(state, next.event, params, rng);
  }
  state.set_time(horizon);
  state.synchronize();
  return out;
}

}  // namespace epichaos
