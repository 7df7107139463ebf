#include "epichaos/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace epichaos::oracles {

std::size_t encode(std::span<const Label> labels) {
  std::size_t s = 0;
  for (std::size_t i = labels.size(); i-- > 0;) s = 3 * s + index_of(labels[i]);
  return s;
}

std::vector<Label> decode(std::size_t state, std::size_t n) {
  std::vector<Label> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<Label>(state % 3);
    state /= 3;
  }
  return out;
}

LabelChainGenerator::LabelChainGenerator(std::size_t n, double lambda, double gamma) : n_(n) {
  if (n < 1 || n > 5) throw std::invalid_argument("label chain limited to 1 <= N <= 5");
  states_ = 1;
  for (std::size_t i = 0; i < n; ++i) states_ *= 3;
  q_.assign(states_ * states_, 0.0);
  for (std::size_t s = 0; s < states_; ++s) {
    const std::vector<Label> a = decode(s, n);
    std::size_t infected = 0;
    for (Label l : a) infected += l == Label::I ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Label> b = a;
      double r = 0.0;
      if (a[i] == Label::S && infected > 0) {
        b[i] = Label::I;
        r = lambda / static_cast<double>(n) * static_cast<double>(infected);
      } else if (a[i] == Label::I && gamma > 0.0) {
        b[i] = Label::R;
        r = gamma;
      }
      if (r > 0.0) {
        const std::size_t to = encode(b);
        q_[s * states_ + to] += r;
        q_[s * states_ + s] -= r;
      }
    }
  }
}

std::vector<double> LabelChainGenerator::evolve(std::span<const double> p0, double t) const {
  if (p0.size() != states_) throw std::invalid_argument("initial distribution has wrong size");
  double uniform_rate = 0.0;
  for (std::size_t s = 0; s < states_; ++s) uniform_rate = std::max(uniform_rate, -q_[s * states_ + s]);
  std::vector<double> term(p0.begin(), p0.end());
  if (uniform_rate == 0.0 || t == 0.0) return term;

  // term_k = p0 P^k with P = I + Q / uniform_rate.
  const double mu = uniform_rate * t;
  std::vector<double> out(states_, 0.0);
  std::vector<double> next(states_);
  double weight = std::exp(-mu);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < 100000; ++k) {
    for (std::size_t s = 0; s < states_; ++s) out[s] += weight * term[s];
    cumulative += weight;
    if (1.0 - cumulative < 1e-15 && static_cast<double>(k) > mu) break;
    for (std::size_t s = 0; s < states_; ++s) next[s] = term[s];
    for (std::size_t from = 0; from < states_; ++from) {
      if (term[from] == 0.0) continue;
      for (std::size_t to = 0; to < states_; ++to) {
        next[to] += term[from] * q_[from * states_ + to] / uniform_rate;
      }
    }
    term.swap(next);
    weight *= mu / static_cast<double>(k + 1);
  }
  return out;
}

std::vector<double> master_equation_solve(std::size_t n, double lambda, double gamma,
                                          std::span<const double> initial, double t) {
  if (n > 5) throw std::invalid_argument("master equation oracle limited to N <= 5");
  return LabelChainGenerator(n, lambda, gamma).evolve(initial, t);
}

std::vector<double> point_mass(std::span<const Label> labels) {
  std::size_t states = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) states *= 3;
  std::vector<double> p(states, 0.0);
  p[encode(labels)] = 1.0;
  return p;
}

SirCurve sir_ode_solve(double beta, double gamma, std::array<double, 3> initial, double horizon,
                       double dt) {
  using State = std::array<double, 3>;
  const auto rhs = [&](const State& y) {
    const double inf = beta * y[0] * y[1];
    const double rec = gamma * y[1];
    return State{-inf, inf - rec, rec};
  };
  const auto axpy = [](const State& y, double h, const State& k) {
    return State{y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]};
  };
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  SirCurve out;
  out.t.reserve(steps + 1);
  out.mass.reserve(steps + 1);
  State y = initial;
  out.t.push_back(0.0);
  out.mass.push_back(y);
  for (std::size_t n = 1; n <= steps; ++n) {
    const State k1 = rhs(y);
    const State k2 = rhs(axpy(y, 0.5 * dt, k1));
    const State k3 = rhs(axpy(y, 0.5 * dt, k2));
    const State k4 = rhs(axpy(y, dt, k3));
    for (int c = 0; c < 3; ++c) y[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    out.t.push_back(static_cast<double>(n) * dt);
    out.mass.push_back(y);
  }
  return out;
}

std::vector<double> direct_convolution(std::span<const double> density, std::size_t m, double side,
                                       double r0) {
  if (density.size() != m * m) throw std::invalid_argument("density grid size mismatch");
  const TorusGeometry geom(side);
  const double h = side / static_cast<double>(m);
  const auto centre = [&](std::size_t i) { return (static_cast<double>(i) + 0.5) * h; };
  std::vector<double> out(m * m, 0.0);
  for (std::size_t ix = 0; ix < m; ++ix) {
    for (std::size_t iy = 0; iy < m; ++iy) {
      const Vec2 target{centre(ix), centre(iy)};
      double s = 0.0;
      for (std::size_t jx = 0; jx < m; ++jx) {
        for (std::size_t jy = 0; jy < m; ++jy) {
          if (torus_distance(target, Vec2{centre(jx), centre(jy)}, geom) < r0) {
            s += density[jx * m + jy];
          }
        }
      }
      out[ix * m + iy] = s * h * h;
    }
  }
  return out;
}

}  // namespace epichaos::oracles
