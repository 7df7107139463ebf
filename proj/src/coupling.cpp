#include "epichaos/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epichaos {

CoupledEnsemble::CoupledEnsemble(std::vector<AgentState> agents, double side, double t0)
    : motion_(std::move(agents), side, t0) {
  b_.reserve(motion_.size());
  for (std::size_t i = 0; i < motion_.size(); ++i) b_.push_back(motion_.label(i));
  counts_b_ = motion_.counts();
}

std::vector<AgentState> CoupledEnsemble::agents_a() const { return motion_.agents(); }

std::vector<AgentState> CoupledEnsemble::agents_b() const {
  std::vector<AgentState> out = motion_.agents();
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = b_[i];
  return out;
}

void CoupledEnsemble::set_a(std::size_t i, Label l) noexcept {
  const bool before = motion_.label(i) != b_[i];
  motion_.set_label(i, l);
  const bool after = l != b_[i];
  mismatches_ = mismatches_ + (after ? 1 : 0) - (before ? 1 : 0);
}

void CoupledEnsemble::set_b(std::size_t i, Label l) noexcept {
  const bool before = motion_.label(i) != b_[i];
  --counts_b_[b_[i]];
  ++counts_b_[l];
  b_[i] = l;
  const bool after = motion_.label(i) != l;
  mismatches_ = mismatches_ + (after ? 1 : 0) - (before ? 1 : 0);
}

CouplingRates compute_rates(const CoupledEnsemble& state, const FieldOracle& oracle,
                            const ModelParams& params, std::size_t i) {
  const std::size_t n = state.size();
  const double t = state.time();
  const Vec2 xi = state.position_at(i, t);
  std::size_t both = 0, only_a = 0, only_b = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i) continue;
    const bool ai = state.a(k) == Label::I;
    const bool bi = state.b(k) == Label::I;
    if (!ai && !bi) continue;
    if (!in_range(xi, state.position_at(k, t), params.r0, state.geometry())) continue;
    if (ai && bi) ++both;
    else if (ai) ++only_a;
    else ++only_b;
  }
  const double inv = 1.0 / static_cast<double>(n);
  CouplingRates r;
  r.j = static_cast<double>(both) * inv;
  r.j1 = static_cast<double>(only_a) * inv;
  r.j2 = static_cast<double>(only_b) * inv;
  r.e = oracle.nf_at(xi, t) - (r.j + r.j2);
  return r;
}

double empirical_intensity_b(const CoupledEnsemble& state, const ModelParams& params,
                             std::size_t i) {
  const std::size_t n = state.size();
  const double t = state.time();
  const Vec2 xi = state.position_at(i, t);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i || state.b(k) != Label::I) continue;
    if (in_range(xi, state.position_at(k, t), params.r0, state.geometry())) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

void coupled_recovery(CoupledEnsemble& state, std::size_t i) {
  const std::size_t before = state.mismatches();
  state.set_a(i, recovered(state.a(i)));
  state.set_b(i, recovered(state.b(i)));
  if (state.mismatches() > before) {
    throw std::logic_error("shared recovery increased the label mismatch");
  }
}

InfectionAttempts coupled_infection_event(CoupledEnsemble& state, std::size_t i, std::size_t j,
                                          double u, const FieldOracle& oracle,
                                          const ModelParams& params) {
  InfectionAttempts out;
  const bool a_open = state.a(i) == Label::S;
  const bool b_open = state.b(i) == Label::S;
  if (!a_open && !b_open) return out;

  const double t = state.time();
  bool contact = false;
  if (j != i && (state.a(j) == Label::I || state.b(j) == Label::I)) {
    contact = in_range(state.position_at(i, t), state.position_at(j, t), params.r0,
                       state.geometry());
  }
  out.a = contact && state.a(j) == Label::I;

  if (b_open) {
    const bool hit = contact && state.b(j) == Label::I;
    const double q = oracle.nf_at(state.position_at(i, t), t);
    const double p = empirical_intensity_b(state, params, i);
    if (q >= p) {
      out.b = hit || u < (q - p) / (1.0 - p);
    } else {
      out.b = hit && u < q / p;
    }
  }

  if (out.a && a_open) state.set_a(i, Label::I);
  if (out.b && b_open) state.set_b(i, Label::I);
  return out;
}

double mismatch_fraction(const CoupledEnsemble& state) noexcept {
  std::size_t d = 0;
  for (std::size_t i = 0; i < state.size(); ++i) d += state.a(i) != state.b(i) ? 1 : 0;
  return static_cast<double>(d) / static_cast<double>(state.size());
}

std::vector<CoupledSample> run_coupled(CoupledEnsemble& state, const FieldOracle& oracle,
                                       const ModelParams& params, const SamplePlan& plan,
                                       RandomStream& rng, const CoupledObserver& observer) {
  const std::vector<double> samples = plan.resolved();
  if (oracle.start() > state.time() + 1e-12 || oracle.end() < plan.horizon - 1e-12) {
    throw std::invalid_argument("field oracle does not span [0, T]");
  }
  const std::uint64_t n = state.size();
  const double nd = static_cast<double>(n);
  const double jump = nd * ModelParams::kJumpRate;
  const double recovery = nd * params.gamma;
  const double total = jump + recovery + nd * params.lambda;
  const double horizon = plan.horizon;

  std::vector<CoupledSample> out;
  out.reserve(samples.size());
  std::size_t next = 0;
  auto observe_until = [&](double limit) {
    while (next < samples.size() && samples[next] <= limit) {
      state.set_time(samples[next]);
      state.synchronize();
      out.push_back({state.time(), static_cast<double>(state.mismatches()) / nd,
                     state.counts_a(), state.counts_b()});
      if (observer) observer(next, state);
      ++next;
    }
  };

  observe_until(state.time());
  while (true) {
    const double t_next = state.time() + rng.exponential(total);
    if (t_next > horizon) {
      observe_until(horizon);
      break;
    }
    observe_until(t_next);
    state.set_time(t_next);
    const double v = rng.uniform() * total;
    const std::size_t i = rng.below(n);
    if (v < jump) {
      state.set_heading(i, sample_velocity(rng));
    } else if (v < jump + recovery) {
      coupled_recovery(state, i);
    } else {
      const std::size_t j = rng.below(n);
      const double u = rng.uniform();
      coupled_infection_event(state, i, j, u, oracle, params);
    }
  }
  state.set_time(horizon);
  state.synchronize();
  return out;
}

std::vector<CoupledSample> run_coupled(const InitialSpec& f0, const FieldOracle& oracle,
                                       const ModelParams& params, const SamplePlan& plan,
                                       RandomStream& rng, const CoupledObserver& observer) {
  CoupledEnsemble state(sample_agents(f0, params.n, params.side, rng), params.side, 0.0);
  return run_coupled(state, oracle, params, plan, rng, observer);
}

double mismatch_bound(double t, double lambda, std::size_t n) noexcept {
  return t * lambda / static_cast<double>(n) * std::exp(2.0 * lambda * t);
}

}  // namespace epichaos
