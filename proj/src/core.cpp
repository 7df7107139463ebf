#include "epichaos/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace epichaos {

char label_char(Label a) noexcept {
  switch (a) {
    case Label::S: return 'S';
    case Label::I: return 'I';
    case Label::R: return 'R';
  }
  return '?';
}

Label label_from_char(char c) {
  switch (c) {
    case 'S': return Label::S;
    case 'I': return Label::I;
    case 'R': return Label::R;
    default: throw std::invalid_argument(std::string("unknown label '") + c + "'");
  }
}

TorusGeometry::TorusGeometry(double side) : side_(side) {
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw std::invalid_argument("torus side must be positive and finite");
  }
}

double TorusGeometry::wrap(double c) const noexcept {
  // fmod is exact, so canonical inputs come back unchanged.
  double w = std::fmod(c, side_);
  if (w < 0.0) w += side_;
  if (w >= side_) w = 0.0;
  return w;
}

double TorusGeometry::min_image(double d) const noexcept {
  d = std::fmod(d, side_);
  if (d > 0.5 * side_) d -= side_;
  else if (d < -0.5 * side_) d += side_;
  return d;
}

double TorusGeometry::distance(Vec2 a, Vec2 b) const noexcept {
  return std::hypot(min_image(a.x - b.x), min_image(a.y - b.y));
}

double TorusGeometry::max_distance() const noexcept { return side_ / std::numbers::sqrt2; }

double torus_distance(Vec2 a, Vec2 b, const TorusGeometry& geom) noexcept {
  return geom.distance(a, b);
}

bool in_range(Vec2 a, Vec2 b, double r0, const TorusGeometry& geom) noexcept {
  return geom.distance(a, b) < r0;
}

Vec2 AgentState::velocity() const noexcept { return {std::cos(theta), std::sin(theta)}; }

double wrap_angle(double theta) noexcept {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

AgentState advance_free(const AgentState& agent, double dt, const TorusGeometry& geom) noexcept {
  if (dt == 0.0) return agent;
  AgentState out = agent;
  out.x = geom.wrap(Vec2{agent.x.x + std::cos(agent.theta) * dt,
                         agent.x.y + std::sin(agent.theta) * dt});
  return out;
}

void ModelParams::validate() const {
  if (n < 1) throw std::invalid_argument("model.N: must be >= 1");
  if (!(side > 0.0)) throw std::invalid_argument("model.D: must be > 0");
  if (!(r0 > 0.0)) throw std::invalid_argument("model.R0: must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("model.lambda: must be >= 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("model.gamma: must be >= 0");
}

}  // namespace epichaos
