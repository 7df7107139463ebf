#include "epichaos/kinetic_solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace epichaos {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t wrap_index(long i, std::size_t m) noexcept {
  const long mm = static_cast<long>(m);
  long r = i % mm;
  if (r < 0) r += mm;
  return static_cast<std::size_t>(r);
}

double overlap(double a0, double a1, double b0, double b1) noexcept {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

std::size_t GridSpec::spatial_index(double coord) const noexcept {
  const auto i = static_cast<long>(std::floor(coord / cell()));
  return wrap_index(i, m);
}

std::size_t GridSpec::angular_index(double theta) const noexcept {
  const auto i = static_cast<long>(std::floor(theta / angle_cell() + 0.5));
  return wrap_index(i, k);
}

void GridSpec::validate() const {
  if (m < 4) throw std::invalid_argument("grid.M: must be >= 4");
  if (k < 4) throw std::invalid_argument("grid.K: must be >= 4");
  if (!(dt > 0.0)) throw std::invalid_argument("grid.dt: must be > 0");
  if (!(side > 0.0)) throw std::invalid_argument("grid.D: must be > 0");
}

KineticField::KineticField(GridSpec grid, double t)
    : grid_(grid), t_(t), values_(3 * grid.m * grid.m * grid.k, 0.0) {
  grid_.validate();
}

double KineticField::mass() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_measure();
}

std::array<double, 3> KineticField::label_masses() const noexcept {
  const std::size_t block = grid_.m * grid_.m * grid_.k;
  std::array<double, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    double s = 0.0;
    for (std::size_t q = 0; q < block; ++q) s += values_[a * block + q];
    out[a] = s * grid_.cell_measure();
  }
  return out;
}

std::vector<double> KineticField::spatial_density(Label a) const {
  const std::size_t m = grid_.m, k = grid_.k;
  const double dv = grid_.angle_cell();
  std::vector<double> rho(m * m, 0.0);
  for (std::size_t ix = 0; ix < m; ++ix) {
    for (std::size_t iy = 0; iy < m; ++iy) {
      const double* f = &values_[index(a, ix, iy, 0)];
      double s = 0.0;
      for (std::size_t iv = 0; iv < k; ++iv) s += f[iv];
      rho[ix * m + iy] = s * dv;
    }
  }
  return rho;
}

std::vector<double> KineticField::label_sum() const {
  const std::size_t block = grid_.m * grid_.m * grid_.k;
  std::vector<double> out(block);
  for (std::size_t q = 0; q < block; ++q) {
    out[q] = values_[q] + values_[block + q] + values_[2 * block + q];
  }
  return out;
}

KineticField project_initial(const InitialSpec& spec, const GridSpec& grid) {
  spec.validate();
  KineticField field(grid, 0.0);
  const std::size_t m = grid.m, k = grid.k, m0 = spec.cells;
  const double h = grid.cell();
  const double c0 = grid.side / static_cast<double>(m0);
  const std::size_t heading_cell = spec.heading ? grid.angular_index(wrap_angle(*spec.heading)) : 0;

  for (std::size_t ix = 0; ix < m; ++ix) {
    const double x0 = static_cast<double>(ix) * h, x1 = x0 + h;
    for (std::size_t iy = 0; iy < m; ++iy) {
      const double y0 = static_cast<double>(iy) * h, y1 = y0 + h;
      std::array<double, 3> cell_mass{};
      const auto jx0 = static_cast<std::size_t>(std::floor(x0 / c0));
      const auto jy0 = static_cast<std::size_t>(std::floor(y0 / c0));
      for (std::size_t jx = jx0; jx < m0 && static_cast<double>(jx) * c0 < x1; ++jx) {
        const double ox = overlap(x0, x1, static_cast<double>(jx) * c0,
                                  static_cast<double>(jx + 1) * c0);
        for (std::size_t jy = jy0; jy < m0 && static_cast<double>(jy) * c0 < y1; ++jy) {
          const double oy = overlap(y0, y1, static_cast<double>(jy) * c0,
                                    static_cast<double>(jy + 1) * c0);
          const std::size_t c = jx * m0 + jy;
          const double w = spec.cell_mass[c] * ox * oy / (c0 * c0);
          for (std::size_t a = 0; a < 3; ++a) cell_mass[a] += w * spec.label_mix[c][a];
        }
      }
      for (Label a : kLabels) {
        const double mass = cell_mass[index_of(a)];
        if (spec.heading) {
          field.at(a, ix, iy, heading_cell) = mass / grid.cell_measure();
        } else {
          const double density = mass / (h * h * kTwoPi);
          for (std::size_t iv = 0; iv < k; ++iv) field.at(a, ix, iy, iv) = density;
        }
      }
    }
  }
  return field;
}

// ---------------------------------------------------------------------------

struct IntensityOperator::Spectral {
  std::size_t m;
  std::size_t half;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  std::vector<std::complex<double>> kernel;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  explicit Spectral(std::size_t m_) : m(m_), half(m_ / 2 + 1) {
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(m * m);
    spec = fftw_alloc_complex(m * half);
    const int n = static_cast<int>(m);
    forward = fftw_plan_dft_r2c_2d(n, n, real, spec, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_2d(n, n, spec, real, FFTW_ESTIMATE);
  }
  ~Spectral() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
    fftw_free(real);
    fftw_free(spec);
  }
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  void transform_in(std::span<const double> x) {
    std::copy(x.begin(), x.end(), real);
    fftw_execute(forward);
  }
};

IntensityOperator::IntensityOperator(std::size_t m, double side, double r0,
                                     ConvolutionBackend backend)
    : m_(m), side_(side), backend_(backend) {
  if (m == 0) throw std::invalid_argument("intensity grid must be non-empty");
  const TorusGeometry geom(side);
  const double h = side / static_cast<double>(m);
  const Vec2 origin{0.5 * h, 0.5 * h};
  for (std::size_t di = 0; di < m; ++di) {
    for (std::size_t dj = 0; dj < m; ++dj) {
      const Vec2 c{(static_cast<double>(di) + 0.5) * h, (static_cast<double>(dj) + 0.5) * h};
      if (in_range(origin, c, r0, geom)) {
        stencil_.emplace_back(static_cast<int>(di), static_cast<int>(dj));
      }
    }
  }
  if (backend_ == ConvolutionBackend::Spectral) {
    spectral_ = std::make_unique<Spectral>(m);
    std::vector<double> kernel(m * m, 0.0);
    for (auto [di, dj] : stencil_) kernel[static_cast<std::size_t>(di) * m + dj] = h * h;
    spectral_->transform_in(kernel);
    spectral_->kernel.resize(m * spectral_->half);
    for (std::size_t q = 0; q < spectral_->kernel.size(); ++q) {
      spectral_->kernel[q] = {spectral_->spec[q][0], spectral_->spec[q][1]};
    }
  }
}

IntensityOperator::~IntensityOperator() = default;
IntensityOperator::IntensityOperator(IntensityOperator&&) noexcept = default;
IntensityOperator& IntensityOperator::operator=(IntensityOperator&&) noexcept = default;

double IntensityOperator::stencil_area() const noexcept {
  const double h = side_ / static_cast<double>(m_);
  return static_cast<double>(stencil_.size()) * h * h;
}

InfectionIntensity IntensityOperator::apply(std::span<const double> density) const {
  if (density.size() != m_ * m_) throw std::invalid_argument("density grid size mismatch");
  InfectionIntensity out{m_, side_, std::vector<double>(m_ * m_, 0.0)};
  const std::size_t m = m_;

  if (backend_ == ConvolutionBackend::Direct) {
    const double h = side_ / static_cast<double>(m);
    for (std::size_t ix = 0; ix < m; ++ix) {
      for (std::size_t iy = 0; iy < m; ++iy) {
        double s = 0.0;
        for (auto [di, dj] : stencil_) {
          s += density[((ix + static_cast<std::size_t>(di)) % m) * m +
                       (iy + static_cast<std::size_t>(dj)) % m];
        }
        out.values[ix * m + iy] = s * h * h;
      }
    }
    return out;
  }

  Spectral& sp = *spectral_;
  sp.transform_in(density);
  for (std::size_t q = 0; q < sp.kernel.size(); ++q) {
    const std::complex<double> z = std::complex<double>(sp.spec[q][0], sp.spec[q][1]) * sp.kernel[q];
    sp.spec[q][0] = z.real();
    sp.spec[q][1] = z.imag();
  }
  fftw_execute(sp.inverse);
  const double norm = 1.0 / static_cast<double>(m * m);
  for (std::size_t q = 0; q < m * m; ++q) out.values[q] = std::max(0.0, sp.real[q] * norm);
  return out;
}

InfectionIntensity IntensityOperator::operator()(const KineticField& field) const {
  return apply(field.spatial_density(Label::I));
}

InfectionIntensity infection_intensity(const KineticField& field, double r0,
                                       ConvolutionBackend backend) {
  const IntensityOperator op(field.grid().m, field.grid().side, r0, backend);
  return op(field);
}

// ---------------------------------------------------------------------------

void transport_step(KineticField& field, double dt) {
  const GridSpec& g = field.grid();
  const std::size_t m = g.m, k = g.k;
  const double h = g.cell();
  constexpr double kSnap = 1e-12;

  struct Shift {
    std::size_t nx, ny;
    double fx, fy;
  };
  std::vector<Shift> shifts(k);
  for (std::size_t iv = 0; iv < k; ++iv) {
    auto split = [&](double s, std::size_t& n, double& f) {
      double fl = std::floor(s);
      f = s - fl;
      if (f < kSnap) f = 0.0;
      else if (f > 1.0 - kSnap) { f = 0.0; fl += 1.0; }
      n = wrap_index(static_cast<long>(fl), m);
    };
    const double theta = g.angle(iv);
    split(std::cos(theta) * dt / h, shifts[iv].nx, shifts[iv].fx);
    split(std::sin(theta) * dt / h, shifts[iv].ny, shifts[iv].fy);
  }

  // Departure point of node (ix, iy) is (ix - nx - fx, iy - ny - fy).
  std::vector<double> out(field.values().size());
  const std::span<const double> in = field.values();
  for (Label a : kLabels) {
    for (std::size_t ix = 0; ix < m; ++ix) {
      for (std::size_t iy = 0; iy < m; ++iy) {
        const std::size_t dst = field.index(a, ix, iy, 0);
        for (std::size_t iv = 0; iv < k; ++iv) {
          const Shift& s = shifts[iv];
          const std::size_t x0 = (ix + m - s.nx) % m, x1 = (x0 + m - 1) % m;
          const std::size_t y0 = (iy + m - s.ny) % m, y1 = (y0 + m - 1) % m;
          const double f00 = in[field.index(a, x0, y0, iv)];
          const double f10 = in[field.index(a, x1, y0, iv)];
          const double f01 = in[field.index(a, x0, y1, iv)];
          const double f11 = in[field.index(a, x1, y1, iv)];
          out[dst + iv] = (1.0 - s.fx) * ((1.0 - s.fy) * f00 + s.fy * f01) +
                          s.fx * ((1.0 - s.fy) * f10 + s.fy * f11);
        }
      }
    }
  }
  std::copy(out.begin(), out.end(), field.values().begin());
}

void scattering_step(KineticField& field, double dt) {
  const GridSpec& g = field.grid();
  const std::size_t k = g.k;
  const double keep = std::exp(-dt);
  const double relax = -std::expm1(-dt);
  std::span<double> v = field.values();
  for (std::size_t base = 0; base < v.size(); base += k) {
    double mean = 0.0;
    for (std::size_t iv = 0; iv < k; ++iv) mean += v[base + iv];
    mean /= static_cast<double>(k);
    for (std::size_t iv = 0; iv < k; ++iv) v[base + iv] = keep * v[base + iv] + relax * mean;
  }
}

namespace {

/// Coefficients of the frozen-intensity linear reaction flow over dt.
struct ReactionCoefficients {
  double s_keep;   // e^{-a dt}
  double i_keep;   // e^{-gamma dt}
  double s_to_i;   // a * int_0^dt e^{-a s} e^{-gamma (dt - s)} ds
};

ReactionCoefficients reaction_coefficients(double a, double gamma, double dt) noexcept {
  ReactionCoefficients c;
  c.s_keep = std::exp(-a * dt);
  c.i_keep = std::exp(-gamma * dt);
  const double d = a - gamma;
  double phi;
  if (std::abs(d) * dt < 1e-8) {
    phi = dt * c.i_keep * (1.0 - 0.5 * d * dt);
  } else {
    phi = c.i_keep * (-std::expm1(-d * dt)) / d;
  }
  c.s_to_i = a * phi;
  return c;
}

}  // namespace

void reaction_step(KineticField& field, const InfectionIntensity& nf, const ModelParams& params,
                   double dt) {
  const GridSpec& g = field.grid();
  if (nf.m != g.m) throw std::invalid_argument("intensity grid does not match field grid");
  const std::size_t m = g.m, k = g.k;
  for (std::size_t ix = 0; ix < m; ++ix) {
    for (std::size_t iy = 0; iy < m; ++iy) {
      const ReactionCoefficients c =
          reaction_coefficients(params.lambda * nf.at(ix, iy), params.gamma, dt);
      double* fs = &field.at(Label::S, ix, iy, 0);
      double* fi = &field.at(Label::I, ix, iy, 0);
      double* fr = &field.at(Label::R, ix, iy, 0);
      for (std::size_t iv = 0; iv < k; ++iv) {
        const double s = fs[iv], i = fi[iv];
        const double s_new = s * c.s_keep;
        const double i_new = i * c.i_keep + s * c.s_to_i;
        const double s_out = s - s_new;
        const double i_in = i + s_out;
        const double i_out = std::max(0.0, i_in - i_new);
        fs[iv] = s_new;
        fi[iv] = i_in - i_out;
        fr[iv] += i_out;
      }
    }
  }
}

std::size_t clamp_negatives(KineticField& field) noexcept {
  std::size_t n = 0;
  for (double& v : field.values()) {
    if (v < 0.0) {
      v = 0.0;
      ++n;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------

KineticSolver::KineticSolver(ModelParams params, GridSpec grid, SolverOptions options)
    : params_(params),
      grid_(grid),
      options_(options),
      intensity_(grid.m, grid.side, params.r0, options.backend) {
  grid_.validate();
  params_.validate();
  if (options_.intensity_stride == 0) options_.intensity_stride = 1;
}

void KineticSolver::react(KineticField& field, double dt) {
  if (!options_.reactions) return;
  const std::size_t m = grid_.m;
  const std::vector<double> rho_s = field.spatial_density(Label::S);
  const std::vector<double> rho_i = field.spatial_density(Label::I);
  const InfectionIntensity nf0 = intensity_.apply(rho_i);

  // Predict the I density at the sub-interval midpoint from the local flow.
  std::vector<double> rho_mid(m * m);
  for (std::size_t q = 0; q < m * m; ++q) {
    const ReactionCoefficients c =
        reaction_coefficients(params_.lambda * nf0.values[q], params_.gamma, 0.5 * dt);
    rho_mid[q] = rho_i[q] * c.i_keep + rho_s[q] * c.s_to_i;
  }
  const InfectionIntensity nf_mid = intensity_.apply(rho_mid);
  reaction_step(field, nf_mid, params_, dt);
  clamps_ += clamp_negatives(field);
}

void KineticSolver::advance(KineticField& field) {
  const double dt = grid_.dt;
  react(field, 0.5 * dt);
  scattering_step(field, 0.5 * dt);
  clamps_ += clamp_negatives(field);
  transport_step(field, dt);
  clamps_ += clamp_negatives(field);
  scattering_step(field, 0.5 * dt);
  clamps_ += clamp_negatives(field);
  react(field, 0.5 * dt);
  field.set_time(field.time() + dt);
}

KineticSolution KineticSolver::solve(KineticField initial, double horizon,
                                     std::vector<double> snapshot_times) {
  if (initial.grid() != grid_) throw std::invalid_argument("initial field grid mismatch");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
  const double dt = grid_.dt;
  const auto to_steps = [&](double t, const char* what) {
    const double q = t / dt;
    const double r = std::round(q);
    if (std::abs(r * dt - t) > 1e-9) {
      throw std::invalid_argument(std::string(what) + " is not a multiple of dt");
    }
    return static_cast<std::size_t>(r);
  };
  const std::size_t total = to_steps(horizon, "horizon");
  std::vector<std::size_t> snap_steps;
  for (double t : snapshot_times) {
    if (t < 0.0 || t > horizon + 1e-9) throw std::invalid_argument("snapshot time outside [0, T]");
    snap_steps.push_back(to_steps(t, "snapshot time"));
  }
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

  KineticSolution out;
  KineticField field = std::move(initial);
  field.set_time(0.0);
  std::size_t next_snap = 0;
  const std::size_t clamps_before = clamps_;

  auto record = [&](std::size_t step) {
    const double t = static_cast<double>(step) * dt;
    field.set_time(t);
    const bool want_history = step % options_.intensity_stride == 0 || step == total;
    const bool want_snap = next_snap < snap_steps.size() && snap_steps[next_snap] == step;
    if (!want_history && !want_snap) return;
    InfectionIntensity nf = intensity_(field);
    if (want_history) {
      out.history.times.push_back(t);
      out.history.grids.push_back(nf);
    }
    if (want_snap) {
      out.snapshots.push_back({field, std::move(nf)});
      ++next_snap;
    }
  };

  record(0);
  for (std::size_t step = 1; step <= total; ++step) {
    advance(field);
    record(step);
  }
  out.steps = total;
  out.clamps = clamps_ - clamps_before;
  return out;
}

KineticSolution solve(const KineticField& initial, const ModelParams& params,
                      const GridSpec& grid, double horizon, std::vector<double> snapshot_times,
                      SolverOptions options) {
  KineticSolver solver(params, grid, options);
  return solver.solve(initial, horizon, std::move(snapshot_times));
}

// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume little endian");

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("truncated binary file");
  return v;
}

void expect_magic(std::istream& is, const char* magic) {
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0) throw std::runtime_error("bad file magic");
}

}  // namespace

void write_field(std::ostream& os, const KineticField& field) {
  const GridSpec& g = field.grid();
  os.write("EPIFLD01", 8);
  put(os, static_cast<std::uint32_t>(g.m));
  put(os, static_cast<std::uint32_t>(g.k));
  put(os, g.side);
  put(os, field.time());
  os.write("SIR\0", 4);
  const auto v = field.values();
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

KineticField read_field(std::istream& is, double dt) {
  expect_magic(is, "EPIFLD01");
  GridSpec g;
  g.m = get<std::uint32_t>(is);
  g.k = get<std::uint32_t>(is);
  g.side = get<double>(is);
  g.dt = dt;
  const double t = get<double>(is);
  char order[4];
  is.read(order, 4);
  if (!is || std::memcmp(order, "SIR\0", 4) != 0) throw std::runtime_error("bad label order");
  KineticField field(g, t);
  auto v = field.values();
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated field file");
  return field;
}

void write_history(std::ostream& os, const IntensityHistory& history) {
  if (history.grids.empty()) throw std::invalid_argument("empty intensity history");
  const std::size_t m = history.grids.front().m;
  os.write("EPINF001", 8);
  put(os, static_cast<std::uint32_t>(m));
  put(os, static_cast<std::uint32_t>(history.grids.size()));
  put(os, history.grids.front().side);
  for (std::size_t r = 0; r < history.grids.size(); ++r) {
    put(os, history.times[r]);
    os.write(reinterpret_cast<const char*>(history.grids[r].values.data()),
             static_cast<std::streamsize>(m * m * sizeof(double)));
  }
}

IntensityHistory read_history(std::istream& is) {
  expect_magic(is, "EPINF001");
  const std::size_t m = get<std::uint32_t>(is);
  const std::size_t count = get<std::uint32_t>(is);
  const double side = get<double>(is);
  IntensityHistory h;
  for (std::size_t r = 0; r < count; ++r) {
    h.times.push_back(get<double>(is));
    InfectionIntensity g{m, side, std::vector<double>(m * m)};
    is.read(reinterpret_cast<char*>(g.values.data()),
            static_cast<std::streamsize>(m * m * sizeof(double)));
    if (!is) throw std::runtime_error("truncated intensity history");
    h.grids.push_back(std::move(g));
  }
  return h;
}

}  // namespace epichaos
