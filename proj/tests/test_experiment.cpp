#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epichaos/config.hpp"
#include "epichaos/experiment.hpp"

using namespace epichaos;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("epichaos_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small(ExperimentKind kind, const fs::path& out) {
  RunConfig c = parse_config(R"(
[model]
N = 60
D = 1
R0 = 0.15
lambda = 2
gamma = 0.5

[grid]
M = 16
K = 8
dt = 0.002

[run]
T = 0.5
samples = 0 0.25 0.5
replicas = 4
seed = 77
study_N = 20 40 80
)");
  c.kind = kind;
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_CASE("particle runs are reproducible across thread counts") {
  RunConfig c = small(ExperimentKind::Particle, scratch("p1"));
  c.histogram_cells = 2;
  std::ostringstream log;
  const ExperimentResult a = run_experiment(c, log);
  CHECK(a.status == 0);
  RunConfig d = c;
  d.out_dir = scratch("p2");
  d.threads = 2;
  run_experiment(d, log);
  for (const char* f : {"observations.csv", "summary.csv", "histogram.csv"}) {
    CAPTURE(f);
    CHECK(slurp(c.out_dir / f) == slurp(d.out_dir / f));
  }
  CHECK(slurp(c.out_dir / "observations.csv").starts_with("replica,time,S,I,R\n"));
  const RunConfig back = load_config(c.out_dir / "config.ini");
  CHECK(to_text(back) == to_text(c));
}

TEST_CASE("manifest lists every output file") {
  const RunConfig c = small(ExperimentKind::Couple, scratch("couple"));
  std::ostringstream log;
  const ExperimentResult r = run_experiment(c, log);
  const auto j = nlohmann::json::parse(slurp(c.out_dir / "manifest.json"));
  CHECK(j["kind"] == "couple");
  CHECK(j["seed"] == 77);
  std::vector<std::string> listed;
  for (const auto& f : j["files"]) {
    listed.push_back(f["path"]);
    const std::string body = slurp(c.out_dir / std::string(f["path"]));
    CHECK(f["bytes"] == body.size());
  }
  CHECK(listed == std::vector<std::string>{"config.ini", "coupled.csv", "summary.csv"});
  CHECK(r.files.back() == "manifest.json");
  // The kinetic solve is cached next to the outputs and reused.
  CHECK(fs::exists(c.out_dir / "kinetic_cache"));
  std::ostringstream again;
  run_experiment(c, again);
  CHECK(again.str().find("cache hit") != std::string::npos);
  CHECK(slurp(c.out_dir / "coupled.csv").find("replica,time,D_N,") == 0);
}

TEST_CASE("cache key ignores N and the seed") {
  RunConfig a = small(ExperimentKind::Couple, "x");
  RunConfig b = a;
  b.model.n = 1000;
  b.seed.master = 5;
  b.replicas = 9;
  CHECK(kinetic_cache_key(a) == kinetic_cache_key(b));
  b.model.lambda = 3.0;
  CHECK(kinetic_cache_key(a) != kinetic_cache_key(b));
}

TEST_CASE("kinetic, meanfield and study outputs") {
  std::ostringstream log;
  const RunConfig k = small(ExperimentKind::Kinetic, scratch("kin"));
  run_experiment(k, log);
  CHECK(fs::exists(k.out_dir / "field_002.bin"));
  CHECK(fs::exists(k.out_dir / "intensity.bin"));
  CHECK(slurp(k.out_dir / "masses.csv").starts_with("time,S,I,R,total\n"));

  const RunConfig m = small(ExperimentKind::MeanField, scratch("mf"));
  run_experiment(m, log);
  CHECK(slurp(m.out_dir / "summary.csv").starts_with("time,label,mean,variance,ci_low,ci_high,replicas\n"));

  const RunConfig s = small(ExperimentKind::Study, scratch("study"));
  run_experiment(s, log);
  for (const char* f : {"coupled_N20.csv", "coupled_N40.csv", "coupled_N80.csv", "study.csv", "slope.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(s.out_dir / f));
  }
}

TEST_CASE("command line") {
  const char* cli = std::getenv("EPICHAOS_CLI");
  if (cli == nullptr) {
    MESSAGE("EPICHAOS_CLI not set; skipping");
    return;
  }
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ini") << "[model]\nN = 10\nD = 1\nR0 = -1\nlambda = 1\ngamma = 1\n[run]\nT = 1\n";
  const auto sh = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  CHECK(sh("particle --config " + (dir / "bad.ini").string()) == 2);
  CHECK(slurp(dir / "log.txt").find("model.R0") != std::string::npos);
  CHECK(sh("particle") == 2);
  CHECK(sh("bogus") != 0);
  CHECK(sh("validate --out " + (dir / "val").string()) == 0);
  CHECK(slurp(dir / "val" / "validation.csv").starts_with("check,passed,value,tolerance\n"));
  CHECK(slurp(dir / "log.txt").find("FAIL") == std::string::npos);
}
