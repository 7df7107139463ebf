#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/initial.hpp"
#include "epichaos/kinetic_solver.hpp"
#include "epichaos/particle_process.hpp"
#include "epichaos/random.hpp"

namespace epichaos {

enum class ExperimentKind { Particle, Kinetic, MeanField, Couple, Study, Validate };

std::string_view to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_kind(std::string_view name);

struct RunConfig {
  ExperimentKind kind = ExperimentKind::Particle;
  ModelParams model;
  GridSpec grid;
  InitialSpec initial = InitialSpec::uniform({0.9, 0.1, 0.0});
  double horizon = 1.0;
  std::vector<double> samples;  // empty: {0, T}
  std::size_t replicas = 1;
  SeedSpec seed;
  InteractionScheme scheme = InteractionScheme::PerAgent;
  ConvolutionBackend backend = ConvolutionBackend::Spectral;
  std::size_t intensity_stride = 10;
  std::size_t histogram_cells = 0;  // per-cell counts in particle CSVs when > 0
  std::vector<std::size_t> study_n{100, 200, 400, 800};
  std::size_t threads = 1;
  std::filesystem::path out_dir = "out";
  std::filesystem::path cache_dir;  // empty: <out>/kinetic_cache

  SamplePlan plan() const { return {horizon, samples}; }
};

/// Every violated constraint, each as "<section>.<key>: <reason>".
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parses the INI-style schema with sections [model], [grid], [initial] and
/// [run]. Throws ConfigError listing every problem found.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& config);

}  // namespace epichaos
