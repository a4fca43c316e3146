#pragma once

// Lyapunov spectra by repeated re-orthonormalisation of a tangent frame,
// attractor classification from the exponent signs, and parameter scans.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "l96/integrator.hpp"
#include "l96/model.hpp"

namespace l96 {

struct LyapunovOptions {
  double dt = 1.0 / 64.0;
  double transient = 500.0;
  double horizon = 5000.0;
  double renorm_interval = 0.5;
  // Estimates at horizon/2 and horizon must agree to
  // max(convergence_tol, convergence_rel * |lambda|).
  double convergence_tol = 5e-3;
  double convergence_rel = 0.25;

  void validate() const;
};

struct LyapunovSpectrum {
  std::vector<double> exponents;  // descending
  double horizon = 0.0;
  double renorm_interval = 0.0;
  bool converged = true;           // every exponent settled
  std::vector<bool> settled;       // half-horizon and full estimates agree, per exponent
  StateVec final_state;
};

LyapunovSpectrum lyapunov_spectrum(const SystemConfig& cfg, const StateVec& x0, int k,
                                   const LyapunovOptions& opts = {});

enum class AttractorKind { Equilibrium, Periodic, QuasiPeriodic, Chaotic, Unclassified };

struct AttractorClass {
  AttractorKind kind = AttractorKind::Unclassified;
  int torus_dim = 0;  // set for QuasiPeriodic
  LyapunovSpectrum evidence;

  // E / P / Q2 / Q3 / C / U
  std::string code() const;
};

inline constexpr double kDefaultZeroTol = 5e-3;
inline constexpr int kMaxTorusDim = 3;

AttractorClass classify(const LyapunovSpectrum& spectrum, double tol_zero = kDefaultZeroTol);

// Deterministic cold start: x_F + 1e-3 e_1.
StateVec cold_start(const SystemConfig& cfg);

// x_F plus independent normal offsets of standard deviation `amplitude`.
StateVec random_start(const SystemConfig& cfg, std::uint64_t seed, double amplitude = 1e-3);

// x_F plus the mode a cos(2 pi j l / n), used to seed near a wave-l attractor.
StateVec wave_start(const SystemConfig& cfg, int l, double amplitude = 0.1);

struct ScanPoint {
  double F = 0.0;
  double G = 0.0;
  AttractorClass cls;
  int wave = 0;  // dominant wave number of the final state, 0 if flat
  std::string error;
};

enum class SweepDirection { None, IncreasingF, Up, Down };

std::string_view to_string(SweepDirection d);

struct ScanResult {
  std::vector<double> F_axis;
  std::vector<double> G_axis;
  // F-scans: one entry per F. F x G scans: column-major, index f * |G| + g.
  std::vector<ScanPoint> points;
  bool warm_start = false;
  SweepDirection lineage = SweepDirection::None;
  std::optional<double> chaos_onset;

  const ScanPoint& at(std::size_t f, std::size_t g) const { return points[f * G_axis.size() + g]; }
};

struct ScanOptions {
  int exponents = 3;
  double tol_zero = kDefaultZeroTol;
  // Spectrum settings for the first point of every sweep.
  LyapunovOptions first;
  // Settings for warm-started points; `transient` may be shorter here.
  LyapunovOptions warm;
  // Added to x_1 of every warm start to break cyclic symmetry.
  double warm_kick = 1e-4;
  int threads = 1;
};

// Evenly spaced values including both ends.
std::vector<double> linspace(double lo, double hi, int steps);

ScanResult scan_F(const SystemConfig& tmpl, double F_lo, double F_hi, int steps, bool warm_start,
                  const ScanOptions& opts = {});

// Columns of fixed F are swept along G (upwards or downwards) with warm starts;
// columns are independent and may run on `opts.threads` workers.
ScanResult scan_FG(const SystemConfig& tmpl, double F_lo, double F_hi, double G_lo, double G_hi,
                   int F_steps, int G_steps, SweepDirection direction, const ScanOptions& opts = {});

}  // namespace l96
