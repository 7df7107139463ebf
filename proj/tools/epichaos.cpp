// epichaos <kind> --config <file> [--out <dir>] [--seed <u64>] [--replicas <n>] [--threads <n>]
#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "epichaos/config.hpp"
#include "epichaos/experiment.hpp"

int main(int argc, char** argv) {
  using namespace epichaos;

  CLI::App app{"Spatial SIR particle system, kinetic limit and their coupling"};
  std::string kind;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> threads;
  app.add_option("kind", kind, "particle | kinetic | meanfield | couple | study | validate")
      ->required()
      ->check(CLI::IsMember({"particle", "kinetic", "meanfield", "couple", "study", "validate"}));
  app.add_option("--config,-c", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out,-o", out_dir, "output directory");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--replicas", replicas, "replica count")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  RunConfig config;
  try {
    if (!config_path.empty()) {
      config = load_config(config_path);
    } else if (kind != "validate") {
      std::cerr << "error: --config is required for '" << kind << "'\n";
      return 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  config.kind = parse_kind(kind);
  if (out_dir) config.out_dir = *out_dir;
  if (seed) config.seed.master = *seed;
  if (replicas) config.replicas = *replicas;
  if (threads) config.threads = *threads;

  try {
    const ExperimentResult result = run_experiment(config, std::cout);
    fmt::print("wrote {} files to {}\n", result.files.size(), config.out_dir.string());
    return result.status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
