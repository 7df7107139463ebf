#include "epichaos/config.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace epichaos {

namespace pt = boost::property_tree;

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Particle: return "particle";
    case ExperimentKind::Kinetic: return "kinetic";
    case ExperimentKind::MeanField: return "meanfield";
    case ExperimentKind::Couple: return "couple";
    case ExperimentKind::Study: return "study";
    case ExperimentKind::Validate: return "validate";
  }
  return "?";
}

ExperimentKind parse_kind(std::string_view name) {
  for (auto k : {ExperimentKind::Particle, ExperimentKind::Kinetic, ExperimentKind::MeanField,
                 ExperimentKind::Couple, ExperimentKind::Study, ExperimentKind::Validate}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument(fmt::format("unknown experiment kind '{}'", name));
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  return fmt::format("invalid configuration:\n  {}", fmt::join(issues, "\n  "));
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"model", {"N", "D", "R0", "lambda", "gamma"}},
      {"grid", {"M", "K", "dt", "nf_stride", "backend"}},
      {"initial", {"cells", "mass", "labels", "heading"}},
      {"run", {"kind", "T", "samples", "replicas", "seed", "scheme", "study_N", "threads",
               "histogram_cells", "out", "cache"}},
  };
  return s;
}

/// Reads typed values out of the tree, collecting problems instead of throwing.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::vector<std::string> issues;

  std::optional<std::string> raw(const std::string& path) const {
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  }

  std::optional<double> number(const std::string& path, bool required) {
    const auto text = raw(path);
    if (!text) {
      if (required) issues.push_back(path + ": required key is missing");
      return std::nullopt;
    }
    const auto v = parse_list(path, *text);
    if (!v) return std::nullopt;
    if (v->size() != 1) {
      issues.push_back(path + ": expected a single number");
      return std::nullopt;
    }
    return v->front();
  }

  std::optional<std::size_t> count(const std::string& path, bool required) {
    const auto v = number(path, required);
    if (!v) return std::nullopt;
    if (*v < 0 || *v != std::floor(*v)) {
      issues.push_back(path + ": expected a non-negative integer");
      return std::nullopt;
    }
    return static_cast<std::size_t>(*v);
  }

  std::optional<std::vector<double>> list(const std::string& path) {
    const auto text = raw(path);
    if (!text) return std::nullopt;
    return parse_list(path, *text);
  }

  std::optional<std::vector<double>> parse_list(const std::string& path, const std::string& text) {
    std::vector<double> out;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
      if (p == end) break;
      double v;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) {
        issues.push_back(fmt::format("{}: cannot parse '{}' as a number", path, text));
        return std::nullopt;
      }
      out.push_back(v);
      p = next;
    }
    return out;
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  {
    std::istringstream is{std::string(text)};
    try {
      pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError({fmt::format("line {}: {}", e.line(), e.message())});
    }
  }

  Reader r(tree);
  for (const auto& [section, body] : tree) {
    const auto known = schema().find(section);
    if (known == schema().end()) {
      r.issues.push_back(section + ": unknown section");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!known->second.contains(key)) r.issues.push_back(section + "." + key + ": unknown key");
    }
  }

  RunConfig c;
  if (auto k = r.raw("run.kind")) {
    try {
      c.kind = parse_kind(*k);
    } catch (const std::invalid_argument& e) {
      r.issues.push_back(std::string("run.kind: ") + e.what());
    }
  }

  // [model]
  if (auto v = r.count("model.N", true)) {
    c.model.n = *v;
    if (*v < 1) r.issues.push_back("model.N: must be >= 1");
  }
  if (auto v = r.number("model.D", true)) {
    c.model.side = *v;
    if (!(*v > 0)) r.issues.push_back("model.D: must be > 0");
  }
  if (auto v = r.number("model.R0", true)) {
    c.model.r0 = *v;
    if (!(*v > 0)) r.issues.push_back("model.R0: must be > 0");
  }
  if (auto v = r.number("model.lambda", true)) {
    c.model.lambda = *v;
    if (!(*v >= 0)) r.issues.push_back("model.lambda: must be >= 0");
  }
  if (auto v = r.number("model.gamma", true)) {
    c.model.gamma = *v;
    if (!(*v >= 0)) r.issues.push_back("model.gamma: must be >= 0");
  }

  // [grid]
  c.grid.side = c.model.side;
  if (auto v = r.count("grid.M", false)) {
    c.grid.m = *v;
    if (*v < 4) r.issues.push_back("grid.M: must be >= 4");
  }
  if (auto v = r.count("grid.K", false)) {
    c.grid.k = *v;
    if (*v < 4) r.issues.push_back("grid.K: must be >= 4");
  }
  if (auto v = r.number("grid.dt", false)) {
    c.grid.dt = *v;
    if (!(*v > 0)) r.issues.push_back("grid.dt: must be > 0");
  }
  if (auto v = r.count("grid.nf_stride", false)) {
    c.intensity_stride = *v;
    if (*v < 1) r.issues.push_back("grid.nf_stride: must be >= 1");
  }
  if (auto v = r.raw("grid.backend")) {
    if (*v == "spectral") c.backend = ConvolutionBackend::Spectral;
    else if (*v == "direct") c.backend = ConvolutionBackend::Direct;
    else r.issues.push_back("grid.backend: expected 'spectral' or 'direct'");
  }

  // [initial]
  if (auto v = r.count("initial.cells", false)) {
    if (*v < 1) r.issues.push_back("initial.cells: must be >= 1");
    else c.initial.cells = *v;
  }
  const std::size_t ncell = c.initial.cells * c.initial.cells;
  if (auto v = r.list("initial.mass")) {
    c.initial.cell_mass = *v;
    if (v->size() != ncell) {
      r.issues.push_back(fmt::format("initial.mass: expected {} entries, got {}", ncell, v->size()));
    }
  } else {
    c.initial.cell_mass.assign(ncell, 1.0 / static_cast<double>(ncell));
  }
  {
    std::vector<double> labels{0.9, 0.1, 0.0};
    if (auto v = r.list("initial.labels")) labels = *v;
    c.initial.label_mix.clear();
    if (labels.size() == 3) {
      c.initial.label_mix.assign(ncell, {labels[0], labels[1], labels[2]});
    } else if (labels.size() == 3 * ncell) {
      for (std::size_t q = 0; q < ncell; ++q) {
        c.initial.label_mix.push_back({labels[3 * q], labels[3 * q + 1], labels[3 * q + 2]});
      }
    } else {
      r.issues.push_back(fmt::format("initial.labels: expected 3 or {} numbers", 3 * ncell));
    }
  }
  if (auto v = r.raw("initial.heading")) {
    if (*v != "uniform") {
      if (auto h = r.number("initial.heading", false)) c.initial.heading = *h;
    }
  }
  if (r.issues.empty()) {
    try {
      c.initial.validate();
    } catch (const std::invalid_argument& e) {
      r.issues.push_back(e.what());
    }
  }

  // [run]
  if (auto v = r.number("run.T", true)) {
    c.horizon = *v;
    if (!(*v >= 0)) r.issues.push_back("run.T: must be >= 0");
  }
  if (auto v = r.list("run.samples")) {
    c.samples = *v;
    for (double s : *v) {
      if (!(s >= 0.0) || s > c.horizon) {
        r.issues.push_back(fmt::format("run.samples: {} lies outside [0, T={}]", s, c.horizon));
      }
    }
    if (!std::is_sorted(v->begin(), v->end())) r.issues.push_back("run.samples: must be sorted");
  }
  if (auto v = r.count("run.replicas", false)) {
    c.replicas = *v;
    if (*v < 1) r.issues.push_back("run.replicas: must be >= 1");
  }
  if (auto v = r.raw("run.seed")) {
    std::uint64_t s = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), s);
    if (ec != std::errc{} || p != v->data() + v->size()) {
      r.issues.push_back("run.seed: expected an unsigned 64-bit integer");
    }
    c.seed.master = s;
  }
  if (auto v = r.raw("run.scheme")) {
    if (*v == "per_agent") c.scheme = InteractionScheme::PerAgent;
    else if (*v == "pair_clock") c.scheme = InteractionScheme::PairClock;
    else r.issues.push_back("run.scheme: expected 'per_agent' or 'pair_clock'");
  }
  if (auto v = r.list("run.study_N")) {
    c.study_n.clear();
    for (double n : *v) {
      if (n < 2 || n != std::floor(n)) r.issues.push_back("run.study_N: entries must be integers >= 2");
      else c.study_n.push_back(static_cast<std::size_t>(n));
    }
  }
  if (auto v = r.count("run.threads", false)) c.threads = std::max<std::size_t>(1, *v);
  if (auto v = r.count("run.histogram_cells", false)) c.histogram_cells = *v;
  if (auto v = r.raw("run.out")) c.out_dir = *v;
  if (auto v = r.raw("run.cache")) c.cache_dir = *v;

  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({fmt::format("cannot read config file '{}'", path.string())});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& c) {
  std::string s;
  auto line = [&](std::string_view key, const auto& value) {
    s += fmt::format("{} = {}\n", key, value);
  };
  s += "[model]\n";
  line("N", c.model.n);
  line("D", c.model.side);
  line("R0", c.model.r0);
  line("lambda", c.model.lambda);
  line("gamma", c.model.gamma);
  s += "\n[grid]\n";
  line("M", c.grid.m);
  line("K", c.grid.k);
  line("dt", c.grid.dt);
  line("nf_stride", c.intensity_stride);
  line("backend", c.backend == ConvolutionBackend::Spectral ? "spectral" : "direct");
  s += "\n[initial]\n";
  line("cells", c.initial.cells);
  line("mass", fmt::format("{}", fmt::join(c.initial.cell_mass, " ")));
  std::vector<double> labels;
  bool same = true;
  for (const auto& mix : c.initial.label_mix) {
    same = same && mix == c.initial.label_mix.front();
    labels.insert(labels.end(), mix.begin(), mix.end());
  }
  if (same && !c.initial.label_mix.empty()) {
    labels.assign(c.initial.label_mix.front().begin(), c.initial.label_mix.front().end());
  }
  line("labels", fmt::format("{}", fmt::join(labels, " ")));
  if (c.initial.heading) line("heading", *c.initial.heading);
  else line("heading", "uniform");
  s += "\n[run]\n";
  line("kind", to_string(c.kind));
  line("T", c.horizon);
  if (!c.samples.empty()) line("samples", fmt::format("{}", fmt::join(c.samples, " ")));
  line("replicas", c.replicas);
  line("seed", c.seed.master);
  line("scheme", c.scheme == InteractionScheme::PerAgent ? "per_agent" : "pair_clock");
  line("study_N", fmt::format("{}", fmt::join(c.study_n, " ")));
  line("histogram_cells", c.histogram_cells);
  line("out", c.out_dir.string());
  if (!c.cache_dir.empty()) line("cache", c.cache_dir.string());
  return s;
}

}  // namespace epichaos
