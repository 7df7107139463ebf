#include "epichaos/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epichaos/stats.hpp"

namespace epichaos {

namespace {

std::size_t cell_index(const GridSpec& g, Label a, std::size_t ix, std::size_t iy,
                       std::size_t iv) noexcept {
  return ((index_of(a) * g.m + ix) * g.m + iy) * g.k + iv;
}

bool same_grid(const GridSpec& a, const GridSpec& b) noexcept {
  return a.m == b.m && a.k == b.k && a.side == b.side;
}

double overlap(double a0, double a1, double b0, double b1) noexcept {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

/// Overlap of angular arcs on the circle, both given as [c - w/2, c + w/2).
double arc_overlap(double c1, double w1, double c2, double w2) noexcept {
  double s = 0.0;
  for (int shift = -1; shift <= 1; ++shift) {
    const double c = c2 + shift * kTwoPi;
    s += overlap(c1 - 0.5 * w1, c1 + 0.5 * w1, c - 0.5 * w2, c + 0.5 * w2);
  }
  return s;
}

}  // namespace

double DensityGrid::mass() const noexcept {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_measure();
}

DensityGrid EmpiricalMarginal::density() const {
  DensityGrid out{grid, std::vector<double>(counts.size())};
  const double norm = 1.0 / (static_cast<double>(n) * grid.cell_measure());
  for (std::size_t q = 0; q < counts.size(); ++q) out.values[q] = static_cast<double>(counts[q]) * norm;
  return out;
}

EmpiricalMarginal empirical_marginal(std::span<const AgentState> agents, const GridSpec& grid,
                                     double t) {
  EmpiricalMarginal out{grid, agents.size(), t,
                        std::vector<std::int64_t>(3 * grid.m * grid.m * grid.k, 0)};
  for (const AgentState& a : agents) {
    ++out.counts[cell_index(grid, a.label, grid.spatial_index(a.x.x), grid.spatial_index(a.x.y),
                            grid.angular_index(a.theta))];
  }
  return out;
}

DensityGrid to_density(const KineticField& field) {
  return {field.grid(), std::vector<double>(field.values().begin(), field.values().end())};
}

DensityGrid project(const KineticField& field, const GridSpec& target) {
  const GridSpec& src = field.grid();
  if (src.side != target.side) throw std::invalid_argument("projection across different tori");
  const double hs = src.cell(), ht = target.cell();
  const double ws = src.angle_cell(), wt = target.angle_cell();

  // Fractions of each source cell falling into each target cell, per axis.
  struct Share {
    std::size_t target;
    double fraction;
  };
  std::vector<std::vector<Share>> xs(src.m), vs(src.k);
  for (std::size_t i = 0; i < src.m; ++i) {
    const double a0 = static_cast<double>(i) * hs, a1 = a0 + hs;
    for (std::size_t j = 0; j < target.m; ++j) {
      const double o = overlap(a0, a1, static_cast<double>(j) * ht, static_cast<double>(j + 1) * ht);
      if (o > 0.0) xs[i].push_back({j, o / hs});
    }
  }
  for (std::size_t i = 0; i < src.k; ++i) {
    for (std::size_t j = 0; j < target.k; ++j) {
      const double o = arc_overlap(src.angle(i), ws, target.angle(j), wt);
      if (o > 0.0) vs[i].push_back({j, o / ws});
    }
  }

  std::vector<double> mass(3 * target.m * target.m * target.k, 0.0);
  for (Label a : kLabels) {
    for (std::size_t ix = 0; ix < src.m; ++ix) {
      for (std::size_t iy = 0; iy < src.m; ++iy) {
        for (std::size_t iv = 0; iv < src.k; ++iv) {
          const double m = field.at(a, ix, iy, iv) * src.cell_measure();
          if (m == 0.0) continue;
          for (const Share& sx : xs[ix]) {
            for (const Share& sy : xs[iy]) {
              for (const Share& sv : vs[iv]) {
                mass[cell_index(target, a, sx.target, sy.target, sv.target)] +=
                    m * sx.fraction * sy.fraction * sv.fraction;
              }
            }
          }
        }
      }
    }
  }
  DensityGrid out{target, std::move(mass)};
  for (double& v : out.values) v /= target.cell_measure();
  return out;
}

double l1_distance(const DensityGrid& f, const DensityGrid& g) {
  if (!same_grid(f.grid, g.grid) || f.values.size() != g.values.size()) {
    throw std::invalid_argument("l1_distance: grids do not match");
  }
  double s = 0.0;
  for (std::size_t q = 0; q < f.values.size(); ++q) s += std::abs(f.values[q] - g.values[q]);
  return s * f.grid.cell_measure();
}

double l1_distance(const EmpiricalMarginal& f, const EmpiricalMarginal& g) {
  return l1_distance(f.density(), g.density());
}

double l1_distance(const EmpiricalMarginal& f, const KineticField& field) {
  const DensityGrid g = same_grid(f.grid, field.grid()) ? to_density(field) : project(field, f.grid);
  return l1_distance(f.density(), g);
}

double coupled_transport_cost(const CoupledEnsemble& state) noexcept {
  // The configurational term vanishes: both copies share one (x, v).
  std::size_t cost = 0;
  for (std::size_t i = 0; i < state.size(); ++i) cost += state.a(i) != state.b(i) ? 1 : 0;
  return static_cast<double>(cost) / static_cast<double>(state.size());
}

double binned_label_tv(const CoupledEnsemble& state, const GridSpec& grid) {
  const auto a = empirical_marginal(state.agents_a(), grid, state.time());
  const auto b = empirical_marginal(state.agents_b(), grid, state.time());
  std::int64_t diff = 0;
  for (std::size_t q = 0; q < a.counts.size(); ++q) diff += std::abs(a.counts[q] - b.counts[q]);
  return 0.5 * static_cast<double>(diff) / static_cast<double>(state.size());
}

std::vector<double> wasserstein_discrete_upper(const std::vector<CoupledSample>& run) {
  std::vector<double> out;
  out.reserve(run.size());
  for (const auto& s : run) out.push_back(s.mismatch);
  return out;
}

PairCorrelation::PairCorrelation(std::size_t cells, double side)
    : cells_(cells), side_(side), bins_(3 * cells * cells), one_(bins_, 0.0), two_(bins_ * bins_, 0.0) {
  if (cells == 0) throw std::invalid_argument("pair grid needs at least one cell");
}

std::size_t PairCorrelation::bin(const AgentState& a) const noexcept {
  const double h = side_ / static_cast<double>(cells_);
  const auto ix = std::min(cells_ - 1, static_cast<std::size_t>(a.x.x / h));
  const auto iy = std::min(cells_ - 1, static_cast<std::size_t>(a.x.y / h));
  return (index_of(a.label) * cells_ + ix) * cells_ + iy;
}

void PairCorrelation::add(std::span<const AgentState> agents) {
  const std::size_t n = agents.size();
  if (n < 2) throw std::invalid_argument("pair marginal needs N >= 2");
  std::vector<double> c(bins_, 0.0);
  for (const AgentState& a : agents) c[bin(a)] += 1.0;
  const double nd = static_cast<double>(n);
  const double pairs = nd * (nd - 1.0);
  for (std::size_t p = 0; p < bins_; ++p) {
    if (c[p] == 0.0) continue;
    one_[p] += c[p] / nd;
    for (std::size_t q = 0; q < bins_; ++q) {
      const double ordered = c[p] * c[q] - (p == q ? c[p] : 0.0);
      two_[p * bins_ + q] += ordered / pairs;
    }
  }
  ++configs_;
}

double PairCorrelation::gap() const {
  if (configs_ == 0) return 0.0;
  const double r = static_cast<double>(configs_);
  double s = 0.0;
  for (std::size_t p = 0; p < bins_; ++p) {
    for (std::size_t q = 0; q < bins_; ++q) {
      s += std::abs(two_[p * bins_ + q] / r - (one_[p] / r) * (one_[q] / r));
    }
  }
  return s;
}

double pair_marginal_factorization_gap(std::span<const AgentState> agents, std::size_t cells,
                                       double side) {
  PairCorrelation pc(cells, side);
  pc.add(agents);
  return pc.gap();
}

EnsembleSummary ensemble_aggregate(const std::vector<Series>& replicas) {
  if (replicas.size() < 2) throw std::invalid_argument("ensemble_aggregate needs >= 2 replicas");
  const std::vector<double>& times = replicas.front().times;
  for (const Series& s : replicas) {
    if (s.times != times || s.values.size() != times.size()) {
      throw std::invalid_argument("ensemble_aggregate: mismatched sample-time grids");
    }
  }
  EnsembleSummary out;
  out.times = times;
  out.replicas = replicas.size();
  std::vector<double> column(replicas.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t r = 0; r < replicas.size(); ++r) column[r] = replicas[r].values[k];
    const stats::MeanCi m = stats::mean_ci(column);
    out.mean.push_back(m.mean);
    out.variance.push_back(m.variance);
    out.ci_low.push_back(m.mean - m.half_width);
    out.ci_high.push_back(m.mean + m.half_width);
  }
  return out;
}

}  // namespace epichaos
