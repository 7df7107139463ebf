#include "epichaos/nonlinear_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epichaos {

FieldOracle::FieldOracle(IntensityHistory history) : history_(std::move(history)) {
  if (history_.times.empty() || history_.times.size() != history_.grids.size()) {
    throw std::invalid_argument("intensity history is empty or inconsistent");
  }
  for (std::size_t r = 1; r < history_.times.size(); ++r) {
    if (!(history_.times[r] > history_.times[r - 1])) {
      throw std::invalid_argument("intensity history times must be strictly increasing");
    }
  }
  const auto& g = history_.grids.front();
  cell_ = g.side / static_cast<double>(g.m);
}

double FieldOracle::spatial(const InfectionIntensity& grid, Vec2 x) const noexcept {
  const std::size_t m = grid.m;
  const auto axis = [&](double c, std::size_t& i0, std::size_t& i1, double& w) {
    const double u = c / cell_ - 0.5;
    const double fl = std::floor(u);
    w = u - fl;
    const long mm = static_cast<long>(m);
    long i = static_cast<long>(fl) % mm;
    if (i < 0) i += mm;
    i0 = static_cast<std::size_t>(i);
    i1 = (i0 + 1) % m;
  };
  std::size_t x0, x1, y0, y1;
  double wx, wy;
  axis(x.x, x0, x1, wx);
  axis(x.y, y0, y1, wy);
  const double a = grid.at(x0, y0) + wy * (grid.at(x0, y1) - grid.at(x0, y0));
  const double b = grid.at(x1, y0) + wy * (grid.at(x1, y1) - grid.at(x1, y0));
  return a + wx * (b - a);
}

double FieldOracle::nf_at(Vec2 x, double t) const {
  const auto& times = history_.times;
  constexpr double kSlack = 1e-12;
  if (t < times.front() - kSlack || t > times.back() + kSlack) {
    throw std::out_of_range("time outside the intensity history span");
  }
  double value;
  if (times.size() == 1 || t <= times.front()) {
    value = spatial(history_.grids.front(), x);
  } else if (t >= times.back()) {
    value = spatial(history_.grids.back(), x);
  } else {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    const double a = spatial(history_.grids[lo], x);
    value = w == 0.0 ? a : a + w * (spatial(history_.grids[hi], x) - a);
  }
  return std::clamp(value, 0.0, 1.0);
}

double nf_at(const FieldOracle& oracle, Vec2 x, double t) { return oracle.nf_at(x, t); }

AgentStep step_agent(const AgentState& agent, double t, const FieldOracle& oracle,
                     const ModelParams& params, RandomStream& rng) {
  const double total = ModelParams::kJumpRate + params.gamma + params.lambda;
  AgentStep out;
  out.t = t + rng.exponential(total);
  out.agent = advance_free(agent, out.t - t, TorusGeometry(params.side));
  const double u = rng.uniform() * total;
  if (u < ModelParams::kJumpRate) {
    out.event = {EventKind::VelocityJump, 0, 0};
    out.agent.theta = sample_velocity(rng);
  } else if (u < ModelParams::kJumpRate + params.gamma) {
    out.event = {EventKind::Recovery, 0, 0};
    out.agent.label = recovered(out.agent.label);
  } else {
    out.event = {EventKind::Proposal, 0, 0};
    // The acceptance draw is always consumed so the stream layout does not
    // depend on the label.
    const double accept = rng.uniform();
    if (out.agent.label == Label::S) {
      const double q = oracle.nf_at(out.agent.x, std::min(out.t, oracle.end()));
      if (accept < q) {
        out.agent.label = Label::I;
        out.accepted = true;
      }
    }
  }
  return out;
}

AgentState run_agent(AgentState agent, const FieldOracle& oracle, const ModelParams& params,
                     const std::vector<double>& samples, double horizon, RandomStream& rng,
                     const std::function<void(std::size_t, const AgentState&)>& at_sample) {
  const TorusGeometry geom(params.side);
  double t = 0.0;
  std::size_t next = 0;
  while (true) {
    const AgentStep s = step_agent(agent, t, oracle, params, rng);
    const double limit = std::min(s.t, horizon);
    while (next < samples.size() && samples[next] <= limit) {
      if (at_sample) at_sample(next, advance_free(agent, samples[next] - t, geom));
      ++next;
    }
    if (s.t > horizon) {
      return advance_free(agent, horizon - t, geom);
    }
    agent = s.agent;
    t = s.t;
  }
}

MeanFieldRun run_ensemble(std::size_t n, const InitialSpec& f0, const FieldOracle& oracle,
                          const ModelParams& params, const SamplePlan& plan, SeedSpec seed,
                          const AgentObserver& observer) {
  const std::vector<double> samples = plan.resolved();
  if (oracle.start() > 1e-12 || oracle.end() < plan.horizon - 1e-12) {
    throw std::invalid_argument("field oracle does not span [0, T]");
  }
  const InitialSampler draw(f0, params.side);
  MeanFieldRun out;
  out.observations.resize(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) out.observations[s].t = samples[s];
  out.final_agents.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(seed.child(i));
    const AgentState start = draw(rng);
    out.final_agents.push_back(run_agent(
        start, oracle, params, samples, plan.horizon, rng,
        [&](std::size_t sample, const AgentState& a) {
          ++out.observations[sample].counts[a.label];
          if (observer) observer(sample, i, a);
        }));
  }
  return out;
}

}  // namespace epichaos
