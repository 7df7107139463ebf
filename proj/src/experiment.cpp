#include "epichaos/experiment.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "epichaos/coupling.hpp"
#include "epichaos/nonlinear_process.hpp"
#include "epichaos/observables.hpp"
#include "epichaos/oracles.hpp"
#include "epichaos/parallel.hpp"
#include "epichaos/particle_process.hpp"
#include "epichaos/stats.hpp"

#ifndef EPICHAOS_VERSION
#define EPICHAOS_VERSION "unknown"
#endif

namespace epichaos {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
}

/// Accumulates a CSV in memory; written once the experiment is done.
struct Csv {
  std::string text;
  explicit Csv(std::string_view header) : text(header) { text += '\n'; }
  template <class... Args>
  void row(fmt::format_string<Args...> f, Args&&... args) {
    text += fmt::format(f, std::forward<Args>(args)...);
    text += '\n';
  }
};

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const fs::path& name, std::string_view body) {
    write_text(dir_ / name, body);
    files_.push_back(name);
  }
  void csv(const fs::path& name, const Csv& c) { text(name, c.text); }
  template <class Writer>
  void binary(const fs::path& name, Writer&& w) {
    std::ofstream out(dir_ / name, std::ios::binary);
    w(out);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", (dir_ / name).string()));
    files_.push_back(name);
  }

  const fs::path& dir() const noexcept { return dir_; }
  const std::vector<fs::path>& files() const noexcept { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

double fraction(const LabelCounts& c, Label a, std::size_t n) {
  return static_cast<double>(c[a]) / static_cast<double>(n);
}

/// Mean, variance and 95% interval per sample time. One replica gives a
/// zero-width interval.
EnsembleSummary summarize(const std::vector<Series>& replicas) {
  if (replicas.size() >= 2) return ensemble_aggregate(replicas);
  EnsembleSummary s;
  s.times = replicas.front().times;
  s.mean = s.ci_low = s.ci_high = replicas.front().values;
  s.variance.assign(s.times.size(), 0.0);
  s.replicas = 1;
  return s;
}

std::vector<Series> column(const std::vector<std::vector<Observation>>& runs, Label a,
                           std::size_t n) {
  std::vector<Series> out;
  for (const auto& run : runs) {
    Series s;
    for (const auto& o : run) {
      s.times.push_back(o.t);
      s.values.push_back(fraction(o.counts, a, n));
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_label_runs(Output& out, const std::vector<std::vector<Observation>>& runs,
                      std::size_t n) {
  Csv obs("replica,time,S,I,R");
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& o : runs[r]) {
      obs.row("{},{},{},{},{}", r, o.t, o.counts[Label::S], o.counts[Label::I], o.counts[Label::R]);
    }
  }
  out.csv("observations.csv", obs);

  Csv sum("time,label,mean,variance,ci_low,ci_high,replicas");
  std::array<EnsembleSummary, 3> per_label;
  for (Label a : kLabels) per_label[index_of(a)] = summarize(column(runs, a, n));
  for (std::size_t k = 0; k < per_label[0].times.size(); ++k) {
    for (Label a : kLabels) {
      const auto& s = per_label[index_of(a)];
      sum.row("{},{},{},{},{},{},{}", s.times[k], label_char(a), s.mean[k], s.variance[k],
              s.ci_low[k], s.ci_high[k], s.replicas);
    }
  }
  out.csv("summary.csv", sum);
}

ExperimentResult particle_experiment(const RunConfig& c, Output& out, std::ostream& log) {
  const SamplePlan plan = c.plan();
  std::vector<std::vector<Observation>> runs(c.replicas);
  std::vector<std::string> histograms(c.replicas);
  const std::size_t hc = c.histogram_cells;

  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    RandomStream rng(c.seed.child(r));
    EnsembleState state = sample_initial(c.initial, c.model.n, c.model.side, rng);
    EnsembleObserver hist;
    if (hc > 0) {
      hist = [&, r](std::size_t, const EnsembleState& s) {
        const double h = c.model.side / static_cast<double>(hc);
        std::vector<std::int64_t> counts(3 * hc * hc, 0);
        for (const AgentState& a : s.agents()) {
          const auto ix = std::min(hc - 1, static_cast<std::size_t>(a.x.x / h));
          const auto iy = std::min(hc - 1, static_cast<std::size_t>(a.x.y / h));
          ++counts[(index_of(a.label) * hc + ix) * hc + iy];
        }
        for (Label l : kLabels) {
          for (std::size_t ix = 0; ix < hc; ++ix) {
            for (std::size_t iy = 0; iy < hc; ++iy) {
              histograms[r] += fmt::format("{},{},{},{},{},{}\n", r, s.time(), label_char(l), ix,
                                           iy, counts[(index_of(l) * hc + ix) * hc + iy]);
            }
          }
        }
      };
    }
    runs[r] = run(state, c.model, plan, c.scheme, rng, hist);
  });
  log << fmt::format("particle: {} replicas of N={} to T={}\n", c.replicas, c.model.n, c.horizon);

  write_label_runs(out, runs, c.model.n);
  if (hc > 0) {
    Csv h("replica,time,label,ix,iy,count");
    for (const auto& part : histograms) h.text += part;
    out.csv("histogram.csv", h);
  }
  return {};
}

constexpr std::string_view kGnuplot = R"(# gnuplot -e "dir='<output dir>'" plot.gp
if (!exists("dir")) dir = "."
set datafile separator ","
set key autotitle columnhead
set xlabel "t"
set ylabel "mass"
set term pngcairo size 900,600
set output dir."/masses.png"
plot for [c=2:4] dir."/masses.csv" using 1:c with lines
)";

ExperimentResult kinetic_experiment(const RunConfig& c, Output& out, std::ostream& log) {
  GridSpec grid = c.grid;
  grid.side = c.model.side;
  const KineticField f0 = project_initial(c.initial, grid);
  const KineticSolution sol = solve(f0, c.model, grid, c.horizon, c.plan().resolved(),
                                    {c.backend, true, c.intensity_stride});
  log << fmt::format("kinetic: {} steps on {}x{}x{}, {} clamps\n", sol.steps, grid.m, grid.m,
                     grid.k, sol.clamps);

  Csv masses("time,S,I,R,total");
  for (std::size_t s = 0; s < sol.snapshots.size(); ++s) {
    const KineticField& f = sol.snapshots[s].field;
    const auto m = f.label_masses();
    masses.row("{},{},{},{},{}", f.time(), m[0], m[1], m[2], f.mass());
    out.binary(fmt::format("field_{:03}.bin", s), [&](std::ostream& os) { write_field(os, f); });
  }
  out.csv("masses.csv", masses);
  out.binary("intensity.bin", [&](std::ostream& os) { write_history(os, sol.history); });
  out.text("plot.gp", kGnuplot);
  return {};
}

ExperimentResult meanfield_experiment(const RunConfig& c, Output& out, std::ostream& log) {
  const FieldOracle oracle(cached_history(c, log));
  const SamplePlan plan = c.plan();
  std::vector<std::vector<Observation>> runs(c.replicas);
  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    runs[r] = run_ensemble(c.model.n, c.initial, oracle, c.model, plan, c.seed.child(r)).observations;
  });
  log << fmt::format("meanfield: {} replicas of N={} to T={}\n", c.replicas, c.model.n, c.horizon);
  write_label_runs(out, runs, c.model.n);
  return {};
}

std::vector<std::vector<CoupledSample>> coupled_runs(const RunConfig& c, const FieldOracle& oracle,
                                                     std::size_t n, SeedSpec seed) {
  ModelParams params = c.model;
  params.n = n;
  const SamplePlan plan = c.plan();
  std::vector<std::vector<CoupledSample>> runs(c.replicas);
  parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    RandomStream rng(seed.child(r));
    runs[r] = run_coupled(c.initial, oracle, params, plan, rng);
  });
  return runs;
}

Csv coupled_csv(const std::vector<std::vector<CoupledSample>>& runs) {
  Csv csv("replica,time,D_N,S_A,I_A,R_A,S_B,I_B,R_B");
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& s : runs[r]) {
      csv.row("{},{},{},{},{},{},{},{},{}", r, s.t, s.mismatch, s.a[Label::S], s.a[Label::I],
              s.a[Label::R], s.b[Label::S], s.b[Label::I], s.b[Label::R]);
    }
  }
  return csv;
}

EnsembleSummary mismatch_summary(const std::vector<std::vector<CoupledSample>>& runs) {
  std::vector<Series> series;
  for (const auto& run : runs) {
    Series s;
    for (const auto& x : run) {
      s.times.push_back(x.t);
      s.values.push_back(x.mismatch);
    }
    series.push_back(std::move(s));
  }
  return summarize(series);
}

ExperimentResult couple_experiment(const RunConfig& c, Output& out, std::ostream& log) {
  const FieldOracle oracle(cached_history(c, log));
  const auto runs = coupled_runs(c, oracle, c.model.n, c.seed);
  out.csv("coupled.csv", coupled_csv(runs));

  const EnsembleSummary s = mismatch_summary(runs);
  Csv sum("time,mean_D_N,variance,ci_low,ci_high,bound,replicas");
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double bound = mismatch_bound(s.times[k], c.model.lambda, c.model.n);
    sum.row("{},{},{},{},{},{},{}", s.times[k], s.mean[k], s.variance[k], s.ci_low[k], s.ci_high[k],
            bound, s.replicas);
    log << fmt::format("t={:<8} E[D_N]={:.6f}  ci_high={:.6f}  bound={:.6f}\n", s.times[k], s.mean[k],
                       s.ci_high[k], bound);
  }
  out.csv("summary.csv", sum);
  return {};
}

ExperimentResult study_experiment(const RunConfig& c, Output& out, std::ostream& log) {
  const FieldOracle oracle(cached_history(c, log));
  Csv study("N,time,mean_D_N,variance,ci_low,ci_high,bound,replicas");
  std::vector<double> times;
  std::vector<std::vector<double>> means;  // [N][time]
  for (std::size_t n : c.study_n) {
    const auto runs = coupled_runs(c, oracle, n, c.seed.child(n));
    out.csv(fmt::format("coupled_N{}.csv", n), coupled_csv(runs));
    const EnsembleSummary s = mismatch_summary(runs);
    times = s.times;
    means.push_back(s.mean);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      study.row("{},{},{},{},{},{},{},{}", n, s.times[k], s.mean[k], s.variance[k], s.ci_low[k],
                s.ci_high[k], mismatch_bound(s.times[k], c.model.lambda, n), s.replicas);
    }
    log << fmt::format("study: N={} E[D_N(T)]={:.6g}\n", n, s.mean.back());
  }
  out.csv("study.csv", study);

  Csv slope("time,slope,intercept,slope_se,ci_low,ci_high");
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> x, y;
    for (std::size_t q = 0; q < c.study_n.size(); ++q) {
      if (means[q][k] <= 0.0) continue;
      x.push_back(std::log(static_cast<double>(c.study_n[q])));
      y.push_back(std::log(means[q][k]));
    }
    if (x.size() < 2) continue;
    const stats::LinearFit fit = stats::linear_fit(x, y);
    slope.row("{},{},{},{},{},{}", times[k], fit.slope, fit.intercept, fit.slope_se, fit.slope_ci_low,
              fit.slope_ci_high);
    if (k + 1 == times.size()) {
      log << fmt::format("study: slope of log E[D_N(T)] vs log N = {:.4f} [{:.4f}, {:.4f}]\n",
                         fit.slope, fit.slope_ci_low, fit.slope_ci_high);
    }
  }
  out.csv("slope.csv", slope);
  return {};
}

ExperimentResult validate_experiment(const RunConfig& c, Output& out, std::ostream& log) {
  const auto checks = run_validation(c.seed.master);
  Csv csv("check,passed,value,tolerance");
  ExperimentResult result;
  for (const auto& ch : checks) {
    log << fmt::format("{} {} (value {:.6g}, tolerance {:.6g})\n", ch.passed ? "PASS" : "FAIL", ch.name,
                       ch.value, ch.tolerance);
    csv.row("{},{},{},{}", ch.name, ch.passed ? 1 : 0, ch.value, ch.tolerance);
    if (!ch.passed) result.status = 1;
  }
  out.csv("validation.csv", csv);
  return result;
}

void write_manifest(const RunConfig& c, Output& out) {
  nlohmann::ordered_json j;
  j["program"] = "epichaos";
  j["version"] = EPICHAOS_VERSION;
  j["kind"] = std::string(to_string(c.kind));
  j["seed"] = c.seed.master;
  j["config"] = to_text(c);
  auto& files = j["files"];
  files = nlohmann::json::array();
  std::vector<fs::path> names = out.files();
  std::sort(names.begin(), names.end());
  for (const fs::path& name : names) {
    const std::string body = read_file(out.dir() / name);
    files.push_back({{"path", name.generic_string()},
                     {"bytes", body.size()},
                     {"fnv1a", fmt::format("{:016x}", fnv1a(body))}});
  }
  write_text(out.dir() / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

std::uint64_t kinetic_cache_key(const RunConfig& c) {
  RunConfig k;
  k.model = c.model;
  k.model.n = 1;
  k.grid = c.grid;
  k.intensity_stride = c.intensity_stride;
  k.backend = c.backend;
  k.initial = c.initial;
  k.horizon = c.horizon;
  return fnv1a(to_text(k));
}

IntensityHistory cached_history(const RunConfig& c, std::ostream& log) {
  const fs::path dir = c.cache_dir.empty() ? c.out_dir / "kinetic_cache" : c.cache_dir;
  const fs::path file = dir / fmt::format("{:016x}.nf", kinetic_cache_key(c));
  if (fs::exists(file)) {
    std::ifstream in(file, std::ios::binary);
    log << fmt::format("kinetic cache hit: {}\n", file.string());
    return read_history(in);
  }
  GridSpec grid = c.grid;
  grid.side = c.model.side;
  KineticSolution sol = solve(project_initial(c.initial, grid), c.model, grid, c.horizon, {},
                              {c.backend, true, c.intensity_stride});
  log << fmt::format("kinetic solve: {} steps, stored {}\n", sol.steps, file.string());
  fs::create_directories(dir);
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    write_history(os, sol.history);
    if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
  }
  fs::rename(tmp, file);
  return std::move(sol.history);
}

std::vector<ValidationCheck> run_validation(std::uint64_t seed) {
  std::vector<ValidationCheck> checks;
  const auto check = [&](std::string name, double value, double tol, bool ok) {
    checks.push_back({std::move(name), ok, value, tol});
  };
  const SeedSpec base{seed, 0};

  {  // two agents, one infected, every pair in contact
    const std::vector<Label> start{Label::S, Label::I};
    const auto p = oracles::master_equation_solve(2, 1.0, 0.0, oracles::point_mass(start), 1.0);
    const std::vector<Label> both{Label::I, Label::I};
    const double err = std::abs(p[oracles::encode(both)] - (1.0 - std::exp(-0.5)));
    check("master_equation_two_agents", err, 1e-10, err <= 1e-10);
  }

  {  // particle labels against the 27-state chain
    const ModelParams params{3, 1.0, 1.0, 1.0, 1.0};
    const std::vector<Label> start{Label::S, Label::S, Label::I};
    const auto p = oracles::master_equation_solve(3, 1.0, 1.0, oracles::point_mass(start), 1.0);
    const std::size_t replicas = 20000;
    std::vector<std::int64_t> counts(p.size(), 0);
    RandomStream rng(base.child(1));
    for (std::size_t r = 0; r < replicas; ++r) {
      auto agents = sample_agents(InitialSpec::uniform({1, 0, 0}), 3, 1.0, rng);
      for (std::size_t i = 0; i < 3; ++i) agents[i].label = start[i];
      EnsembleState state(std::move(agents), 1.0);
      run(state, params, {1.0, {1.0}}, InteractionScheme::PerAgent, rng);
      std::vector<Label> labels;
      for (std::size_t i = 0; i < 3; ++i) labels.push_back(state.label(i));
      ++counts[oracles::encode(labels)];
    }
    const double pv = stats::chi_square_p(counts, p);
    check("particle_vs_master_equation_chi2_p", pv, 1e-3, pv >= 1e-3);
  }

  {  // backends and the literal sum
    const std::size_t m = 32;
    RandomStream rng(base.child(2));
    std::vector<double> density(m * m);
    for (double& v : density) v = rng.uniform();
    const auto direct = IntensityOperator(m, 1.0, 0.15, ConvolutionBackend::Direct).apply(density);
    const auto spectral = IntensityOperator(m, 1.0, 0.15, ConvolutionBackend::Spectral).apply(density);
    const auto literal = oracles::direct_convolution(density, m, 1.0, 0.15);
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t q = 0; q < m * m; ++q) {
      d1 = std::max(d1, std::abs(direct.values[q] - spectral.values[q]));
      d2 = std::max(d2, std::abs(direct.values[q] - literal[q]));
    }
    check("convolution_direct_vs_spectral", d1, 1e-10, d1 <= 1e-10);
    check("convolution_direct_vs_literal_sum", d2, 1e-12, d2 <= 1e-12);
  }

  {  // homogeneous field against the SIR ODE
    const ModelParams params{100, 1.0, 0.2, 1.0, 0.5};
    const GridSpec grid{16, 8, 1e-3, 1.0};
    const KineticField f0 = project_initial(InitialSpec::uniform({0.9, 0.1, 0.0}), grid);
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);
    KineticSolver solver(params, grid);
    const double beta = params.lambda * solver.intensity().stencil_area() / (params.side * params.side);
    const auto sol = solver.solve(f0, 1.0, times);
    const auto ode = oracles::sir_ode_solve(beta, params.gamma, {0.9, 0.1, 0.0}, 1.0, 1e-4);
    double err = 0.0, drift = 0.0;
    for (const auto& snap : sol.snapshots) {
      const auto m = snap.field.label_masses();
      const auto idx = static_cast<std::size_t>(std::llround(snap.field.time() / 1e-4));
      for (int a = 0; a < 3; ++a) err = std::max(err, std::abs(m[a] - ode.mass[idx][a]));
      drift = std::max(drift, std::abs(snap.field.mass() - 1.0));
    }
    check("kinetic_homogeneous_vs_sir_ode", err, 1e-5, err <= 1e-5);
    check("kinetic_mass_drift", drift, 1e-10, drift <= 1e-10);
    check("kinetic_positivity_clamps", static_cast<double>(sol.clamps), 0.0, sol.clamps == 0);
  }

  {  // RK4 order: halving dt divides the error by about 16
    const auto at = [](double dt) {
      return oracles::sir_ode_solve(2.0, 0.5, {0.9, 0.1, 0.0}, 5.0, dt).mass.back()[1];
    };
    const double ref = at(0.00625);
    const double ratio = std::abs(at(0.1) - ref) / std::abs(at(0.05) - ref);
    check("sir_ode_fourth_order_ratio", ratio, 16.0, ratio > 12.0 && ratio < 20.0);
  }

  {  // coupled mismatch counter against a recount
    const ModelParams params{60, 1.0, 0.2, 1.0, 0.5};
    const GridSpec grid{16, 8, 1e-3, 1.0};
    const InitialSpec f0 = InitialSpec::uniform({0.9, 0.1, 0.0});
    const auto sol = solve(project_initial(f0, grid), params, grid, 1.0, {});
    const FieldOracle oracle(sol.history);
    RandomStream rng(base.child(3));
    CoupledEnsemble state(sample_agents(f0, params.n, 1.0, rng), 1.0);
    double worst = 0.0;
    run_coupled(state, oracle, params, {1.0, {0.25, 0.5, 0.75, 1.0}}, rng,
                [&](std::size_t, const CoupledEnsemble& s) {
                  worst = std::max(worst, std::abs(coupled_transport_cost(s) - mismatch_fraction(s)));
                });
    check("coupling_mismatch_recount", worst, 0.0, worst == 0.0);
  }
  return checks;
}

ExperimentResult run_experiment(const RunConfig& config, std::ostream& log) {
  Output out(config.out_dir);
  ExperimentResult result;
  switch (config.kind) {
    case ExperimentKind::Particle: result = particle_experiment(config, out, log); break;
    case ExperimentKind::Kinetic: result = kinetic_experiment(config, out, log); break;
    case ExperimentKind::MeanField: result = meanfield_experiment(config, out, log); break;
    case ExperimentKind::Couple: result = couple_experiment(config, out, log); break;
    case ExperimentKind::Study: result = study_experiment(config, out, log); break;
    case ExperimentKind::Validate: result = validate_experiment(config, out, log); break;
  }
  out.text("config.ini", to_text(config));
  write_manifest(config, out);
  result.files = out.files();
  result.files.push_back("manifest.json");
  return result;
}

}  // namespace epichaos
