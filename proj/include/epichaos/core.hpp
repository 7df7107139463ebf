#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace epichaos {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Health state of an agent. The only transitions are S->I and I->R.
enum class Label : std::uint8_t { S = 0, I = 1, R = 2 };

inline constexpr std::array<Label, 3> kLabels{Label::S, Label::I, Label::R};

constexpr std::size_t index_of(Label a) noexcept { return static_cast<std::size_t>(a); }
char label_char(Label a) noexcept;
Label label_from_char(char c);

/// Recovery rule: I becomes R, every other label is left alone.
constexpr Label recovered(Label a) noexcept { return a == Label::I ? Label::R : a; }

/// Infection rule for the susceptible side of a contact: S becomes I.
constexpr Label infected(Label a) noexcept { return a == Label::S ? Label::I : a; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Flat square torus [0, D)^2.
class TorusGeometry {
 public:
  explicit TorusGeometry(double side);

  double side() const noexcept { return side_; }

  /// Canonical representative in [0, D). Idempotent.
  double wrap(double c) const noexcept;
  Vec2 wrap(Vec2 p) const noexcept { return {wrap(p.x), wrap(p.y)}; }

  /// Signed minimum-image difference, in [-D/2, D/2].
  double min_image(double d) const noexcept;

  double distance(Vec2 a, Vec2 b) const noexcept;
  double max_distance() const noexcept;

  friend bool operator==(const TorusGeometry&, const TorusGeometry&) = default;

 private:
  double side_;
};

double torus_distance(Vec2 a, Vec2 b, const TorusGeometry& geom) noexcept;

/// Contact indicator: true iff the torus distance is strictly below r0.
bool in_range(Vec2 a, Vec2 b, double r0, const TorusGeometry& geom) noexcept;

/// One agent: position on the torus, heading angle in [0, 2pi), label.
/// Storing the heading as an angle keeps |v| = 1 by construction.
struct AgentState {
  Vec2 x;
  double theta = 0.0;
  Label label = Label::S;

  Vec2 velocity() const noexcept;
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Free flight for dt along the current heading, wrapped onto the torus.
AgentState advance_free(const AgentState& agent, double dt, const TorusGeometry& geom) noexcept;

/// Canonical heading in [0, 2pi).
double wrap_angle(double theta) noexcept;

struct ModelParams {
  std::size_t n = 1;      // agent count
  double side = 1.0;      // torus side D
  double r0 = 0.1;        // contact radius
  double lambda = 1.0;    // infection rate
  double gamma = 0.5;     // recovery rate
  static constexpr double kJumpRate = 1.0;  // velocity randomization rate

  TorusGeometry geometry() const { return TorusGeometry(side); }

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

/// Per-label counts, indexed by Label.
struct LabelCounts {
  std::array<std::int64_t, 3> n{0, 0, 0};

  std::int64_t& operator[](Label a) noexcept { return n[index_of(a)]; }
  std::int64_t operator[](Label a) const noexcept { return n[index_of(a)]; }
  std::int64_t total() const noexcept { return n[0] + n[1] + n[2]; }
  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

}  // namespace epichaos
