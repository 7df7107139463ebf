#include "epichaos/initial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epichaos/particle_process.hpp"

namespace epichaos {

namespace {
constexpr double kNormTolerance = 1e-9;
}

InitialSpec InitialSpec::uniform(std::array<double, 3> mix) {
  InitialSpec spec;
  spec.cells = 1;
  spec.cell_mass = {1.0};
  spec.label_mix = {mix};
  return spec;
}

void InitialSpec::validate() const {
  if (cells < 1) throw std::invalid_argument("initial.cells: must be >= 1");
  const std::size_t n = cells * cells;
  if (cell_mass.size() != n) {
    throw std::invalid_argument("initial.mass: expected " + std::to_string(n) + " entries");
  }
  if (label_mix.size() != n) {
    throw std::invalid_argument("initial labels: expected " + std::to_string(n) + " cells");
  }
  double total = 0.0;
  for (double m : cell_mass) {
    if (!(m >= 0.0)) throw std::invalid_argument("initial.mass: negative entry");
    total += m;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw std::invalid_argument("initial.mass: does not sum to 1");
  }
  for (const auto& mix : label_mix) {
    if (!(mix[0] >= 0.0 && mix[1] >= 0.0 && mix[2] >= 0.0)) {
      throw std::invalid_argument("initial labels: negative fraction");
    }
    if (std::abs(mix[0] + mix[1] + mix[2] - 1.0) > kNormTolerance) {
      throw std::invalid_argument("initial labels: fractions in a cell do not sum to 1");
    }
  }
}

std::array<double, 3> InitialSpec::label_marginal() const {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (std::size_t c = 0; c < cell_mass.size(); ++c) {
    for (std::size_t a = 0; a < 3; ++a) out[a] += cell_mass[c] * label_mix[c][a];
  }
  return out;
}

InitialSampler::InitialSampler(const InitialSpec& spec, double side)
    : spec_(&spec), side_(side), cell_(side / static_cast<double>(spec.cells)) {
  spec.validate();
  cumulative_.reserve(spec.cell_mass.size());
  double acc = 0.0;
  for (double m : spec.cell_mass) {
    acc += m;
    cumulative_.push_back(acc);
  }
}

AgentState InitialSampler::operator()(RandomStream& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t c = static_cast<std::size_t>(it - cumulative_.begin());
  if (c >= cumulative_.size()) c = cumulative_.size() - 1;
  // Skip zero-mass cells that upper_bound can land on through ties.
  while (spec_->cell_mass[c] == 0.0 && c + 1 < cumulative_.size()) ++c;

  const std::size_t ix = c / spec_->cells;
  const std::size_t iy = c % spec_->cells;
  const TorusGeometry geom(side_);
  AgentState a;
  a.x = geom.wrap(Vec2{(static_cast<double>(ix) + rng.uniform()) * cell_,
                       (static_cast<double>(iy) + rng.uniform()) * cell_});
  a.theta = spec_->heading ? wrap_angle(*spec_->heading) : sample_velocity(rng);

  const auto& mix = spec_->label_mix[c];
  const double v = rng.uniform() * (mix[0] + mix[1] + mix[2]);
  if (v < mix[0]) a.label = Label::S;
  else if (v < mix[0] + mix[1]) a.label = Label::I;
  else a.label = Label::R;
  // Guard against rounding picking an empty class.
  if (mix[index_of(a.label)] == 0.0) {
    for (Label l : kLabels) {
      if (mix[index_of(l)] > 0.0) { a.label = l; break; }
    }
  }
  return a;
}

std::vector<AgentState> sample_agents(const InitialSpec& spec, std::size_t n, double side,
                                      RandomStream& rng) {
  const InitialSampler draw(spec, side);
  std::vector<AgentState> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) agents.push_back(draw(rng));
  return agents;
}

EnsembleState sample_initial(const InitialSpec& spec, std::size_t n, double side,
                             RandomStream& rng) {
  return EnsembleState(sample_agents(spec, n, side, rng), side, 0.0);
}

}  // namespace epichaos
