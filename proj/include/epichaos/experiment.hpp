#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "epichaos/config.hpp"
#include "epichaos/kinetic_solver.hpp"

namespace epichaos {

struct ExperimentResult {
  int status = 0;                              // 0 ok, 1 a check failed
  std::vector<std::filesystem::path> files;    // relative to the output directory
};

/// Runs one experiment and writes its file set into config.out_dir. Progress
/// and PASS/FAIL lines go to log. Throws on unwritable output.
ExperimentResult run_experiment(const RunConfig& config, std::ostream& log);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Key of the kinetic solve a config needs: model (without N), grid,
/// intensity stride, backend, initial law and horizon.
std::uint64_t kinetic_cache_key(const RunConfig& config);

/// N_f history over [0, T], read from the cache directory or solved and stored.
IntensityHistory cached_history(const RunConfig& config, std::ostream& log);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
};

/// The oracle suite behind `epichaos validate`.
std::vector<ValidationCheck> run_validation(std::uint64_t seed);

}  // namespace epichaos
