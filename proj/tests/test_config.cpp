#include <doctest.h>

#include <algorithm>
#include <string>

#include "epichaos/config.hpp"

using namespace epichaos;

namespace {

const char* kMinimal = R"(
[model]
N = 50
D = 1
R0 = 0.1
lambda = 1
gamma = 0.5

[run]
T = 1
)";

bool mentions(const ConfigError& e, std::string_view needle) {
  return std::any_of(e.issues().begin(), e.issues().end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.model.n == 50);
  CHECK(c.model.r0 == 0.1);
  CHECK(c.horizon == 1.0);
  CHECK(c.grid.side == 1.0);
  CHECK(c.grid.m == 64);
  CHECK(c.kind == ExperimentKind::Particle);
  CHECK(c.initial.label_mix.front() == std::array<double, 3>{0.9, 0.1, 0.0});
  CHECK(c.scheme == InteractionScheme::PerAgent);
}

TEST_CASE("bad values name the offending key") {
  std::string text = kMinimal;
  text.replace(text.find("R0 = 0.1"), 8, "R0 = -0.1");
  try {
    parse_config(text);
    FAIL("accepted a negative radius");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "model.R0"));
    CHECK(std::string(e.what()).find("model.R0") != std::string::npos);
  }
}

TEST_CASE("sample times beyond the horizon") {
  const auto issues = issues_of(std::string(kMinimal) + "samples = 0 0.5 2.0\n");
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("run.samples") == 0);
  CHECK(issues[0].find("2") != std::string::npos);
}

TEST_CASE("every problem is reported at once") {
  const auto issues = issues_of(R"(
[model]
N = 10
D = 1
lambda = -1
gamma = 0.5
colour = red

[grid]
backend = fast

[run]
T = 1
scheme = round_robin
)");
  auto has = [&](std::string_view s) {
    return std::any_of(issues.begin(), issues.end(), [&](const std::string& i) { return i.find(s) == 0; });
  };
  CHECK(has("model.R0: required key is missing"));
  CHECK(has("model.lambda"));
  CHECK(has("model.colour: unknown key"));
  CHECK(has("grid.backend"));
  CHECK(has("run.scheme"));
  CHECK(issues.size() == 5);
}

TEST_CASE("malformed numbers and sections") {
  CHECK_FALSE(issues_of(std::string(kMinimal) + "replicas = many\n").empty());
  CHECK_FALSE(issues_of(std::string(kMinimal) + "seed = -3\n").empty());
  CHECK_FALSE(issues_of(std::string(kMinimal) + "[extra]\nx = 1\n").empty());
  CHECK_FALSE(issues_of(std::string(kMinimal) + "[initial]\nlabels = 0.5 0.5\n").empty());
  CHECK_FALSE(issues_of(std::string(kMinimal) + "[initial]\nlabels = 0.5 0.6 0\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("canonical text round-trips") {
  RunConfig c = parse_config(std::string(kMinimal) + R"(kind = couple
samples = 0 0.25 1
replicas = 7
seed = 18446744073709551615
scheme = pair_clock
study_N = 100 400

[grid]
M = 32
K = 8
dt = 0.002
backend = direct

[initial]
cells = 2
mass = 0.4 0.1 0.2 0.3
labels = 0.7 0.3 0 1 0 0 0.95 0.05 0 1 0 0
heading = 0.5
)");
  CHECK(c.kind == ExperimentKind::Couple);
  CHECK(c.seed.master == 18446744073709551615ull);
  CHECK(c.initial.cells == 2);
  CHECK(c.initial.heading == 0.5);
  const std::string text = to_text(c);
  const RunConfig back = parse_config(text);
  CHECK(to_text(back) == text);
  CHECK(back.grid == c.grid);
  CHECK(back.initial.label_mix == c.initial.label_mix);
  CHECK(back.samples == c.samples);
  CHECK(back.study_n == c.study_n);
  CHECK(back.backend == ConvolutionBackend::Direct);
}
