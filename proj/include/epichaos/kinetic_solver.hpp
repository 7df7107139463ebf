#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epichaos/core.hpp"
#include "epichaos/initial.hpp"

namespace epichaos {

/// Discretization of torus x circle: m x m spatial cells of side h = D/m and
/// k angular cells. Angular cell iv is centred on 2 pi iv / k.
struct GridSpec {
  std::size_t m = 64;
  std::size_t k = 16;
  double dt = 1e-3;
  double side = 1.0;

  double cell() const noexcept { return side / static_cast<double>(m); }
  double angle_cell() const noexcept { return kTwoPi / static_cast<double>(k); }
  double angle(std::size_t iv) const noexcept { return angle_cell() * static_cast<double>(iv); }
  /// Measure of one phase-space cell, h^2 * (2 pi / k).
  double cell_measure() const noexcept { return cell() * cell() * angle_cell(); }

  /// Half-open binning: spatial [left, right), angular [c - w/2, c + w/2).
  std::size_t spatial_index(double coord) const noexcept;
  std::size_t angular_index(double theta) const noexcept;

  void validate() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// f(x, v, a, t) as a density per unit (area x angle), laid out
/// row-major [a][ix][iy][iv] with labels ordered S, I, R.
class KineticField {
 public:
  explicit KineticField(GridSpec grid, double t = 0.0);

  const GridSpec& grid() const noexcept { return grid_; }
  double time() const noexcept { return t_; }
  void set_time(double t) noexcept { t_ = t; }

  std::size_t index(Label a, std::size_t ix, std::size_t iy, std::size_t iv) const noexcept {
    return ((index_of(a) * grid_.m + ix) * grid_.m + iy) * grid_.k + iv;
  }
  double& at(Label a, std::size_t ix, std::size_t iy, std::size_t iv) noexcept {
    return values_[index(a, ix, iy, iv)];
  }
  double at(Label a, std::size_t ix, std::size_t iy, std::size_t iv) const noexcept {
    return values_[index(a, ix, iy, iv)];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double mass() const noexcept;
  std::array<double, 3> label_masses() const noexcept;

  /// Angle-integrated density of one label, row-major [ix][iy].
  std::vector<double> spatial_density(Label a) const;

  /// Label-summed field, [ix][iy][iv].
  std::vector<double> label_sum() const;

 private:
  GridSpec grid_;
  double t_;
  std::vector<double> values_;
};

/// Discretizes f0 onto the grid (exact cell overlaps; headings uniform or
/// concentrated in the angular cell holding the fixed heading).
KineticField project_initial(const InitialSpec& spec, const GridSpec& grid);

/// N_f on the spatial grid, sampled at cell centres, row-major [ix][iy].
struct InfectionIntensity {
  std::size_t m = 0;
  double side = 1.0;
  std::vector<double> values;

  double at(std::size_t ix, std::size_t iy) const noexcept { return values[ix * m + iy]; }
};

enum class ConvolutionBackend { Direct, Spectral };

/// Periodic convolution of a spatial density with the disc indicator of
/// radius r0. A cell is in the disc iff its centre is strictly within r0 of
/// the reference cell centre (torus metric). Both backends share the stencil
/// and the h^2 cell-area quadrature.
class IntensityOperator {
 public:
  IntensityOperator(std::size_t m, double side, double r0,
                    ConvolutionBackend backend = ConvolutionBackend::Spectral);
  ~IntensityOperator();
  IntensityOperator(IntensityOperator&&) noexcept;
  IntensityOperator& operator=(IntensityOperator&&) noexcept;

  /// density is row-major [ix][iy], size m*m.
  InfectionIntensity apply(std::span<const double> density) const;
  InfectionIntensity operator()(const KineticField& field) const;

  const std::vector<std::pair<int, int>>& stencil() const noexcept { return stencil_; }
  /// Disc area as seen by the quadrature, |stencil| h^2.
  double stencil_area() const noexcept;
  ConvolutionBackend backend() const noexcept { return backend_; }

 private:
  struct Spectral;
  std::size_t m_;
  double side_;
  ConvolutionBackend backend_;
  std::vector<std::pair<int, int>> stencil_;
  std::unique_ptr<Spectral> spectral_;
};

InfectionIntensity infection_intensity(const KineticField& field, double r0,
                                       ConvolutionBackend backend = ConvolutionBackend::Spectral);

/// Free transport over dt: semi-Lagrangian, bilinear at departure points.
void transport_step(KineticField& field, double dt);

/// Exact solution of d/dt f = <f>_angle - f over dt, per cell and label.
void scattering_step(KineticField& field, double dt);

/// Exact solution over dt of the local reaction system with N_f frozen:
///   S' = -lambda Nf S,  I' = lambda Nf S - gamma I,  R' = gamma I.
/// The per-cell label sum is conserved.
void reaction_step(KineticField& field, const InfectionIntensity& nf, const ModelParams& params,
                   double dt);

/// Zeroes negative entries; returns how many there were.
std::size_t clamp_negatives(KineticField& field) noexcept;

struct FieldSnapshot {
  KineticField field;
  InfectionIntensity intensity;
};

/// N_f sampled on a time grid; drives the nonlinear process.
struct IntensityHistory {
  std::vector<double> times;
  std::vector<InfectionIntensity> grids;
};

struct SolverOptions {
  ConvolutionBackend backend = ConvolutionBackend::Spectral;
  bool reactions = true;
  /// N_f is recorded every this many steps (and at T).
  std::size_t intensity_stride = 10;
};

struct KineticSolution {
  std::vector<FieldSnapshot> snapshots;
  IntensityHistory history;
  std::size_t clamps = 0;
  std::size_t steps = 0;
};

/// Strang-split solver: half reaction, half scattering, full transport,
/// half scattering, half reaction. Each half reaction freezes N_f at the
/// midpoint of its sub-interval (predicted from the local linear flow).
class KineticSolver {
 public:
  KineticSolver(ModelParams params, GridSpec grid, SolverOptions options = {});

  void advance(KineticField& field);
  KineticSolution solve(KineticField initial, double horizon, std::vector<double> snapshot_times);

  const IntensityOperator& intensity() const noexcept { return intensity_; }
  std::size_t clamps() const noexcept { return clamps_; }

 private:
  void react(KineticField& field, double dt);

  ModelParams params_;
  GridSpec grid_;
  SolverOptions options_;
  IntensityOperator intensity_;
  std::size_t clamps_ = 0;
};

KineticSolution solve(const KineticField& initial, const ModelParams& params,
                      const GridSpec& grid, double horizon, std::vector<double> snapshot_times,
                      SolverOptions options = {});

/// Binary snapshot: 8-byte magic "EPIFLD01", uint32 m, uint32 k, f64 D, f64 t,
/// 4-byte label order "SIR\0", then 3*m*m*k little-endian f64 values in
/// [a][ix][iy][iv] order.
void write_field(std::ostream& os, const KineticField& field);
KineticField read_field(std::istream& is, double dt = 1e-3);

/// Binary N_f history: magic "EPINF001", uint32 m, uint32 count, f64 D,
/// then per record f64 t followed by m*m f64 values.
void write_history(std::ostream& os, const IntensityHistory& history);
IntensityHistory read_history(std::istream& is);

}  // namespace epichaos
