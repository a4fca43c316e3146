#pragma once

// Travelling-wave diagnostics on states and trajectories.

#include <optional>
#include <string_view>
#include <vector>

#include "l96/integrator.hpp"
#include "l96/model.hpp"

namespace l96 {

struct WaveNumber {
  int l = 0;
  // Another mode matched the winning magnitude; the smaller index was kept.
  bool degenerate = false;
};

// Dominant spatial Fourier mode 1 <= m <= n/2 of the mean-removed snapshot.
// Throws UndefinedWave for a flat state.
WaveNumber dominant_wave(const StateVec& x);

int wave_number(const StateVec& x);

// Period of the oscillation of x_1: mean spacing of upward crossings of its
// time mean, refined at the autocorrelation peak. Throws NotPeriodic when the
// crossing spacing does not repeat to within 1%.
double measure_period(const Trajectory& traj);

// Offset from x_F of the linear travelling wave born at F_H(l, n):
//   P_j(t) = sqrt((F - F_H)/n) cos(omega0 t + 2 pi j l/n),  j = 0..n-1.
StateVec linearized_wave(int l, int n, double F, double t);

// Half peak-to-peak amplitude of x_j on the cycle born at a supercritical
// F_H(l, n), to leading order in F - F_H: 2 sqrt(f (F - F_H) / (-omega0 ell1 n)).
// Throws PreOnset below F_H and DegenerateHopf for a subcritical crossing.
double onset_amplitude(int l, int n, double F);

enum class Drift { DecreasingJ, IncreasingJ, None };

std::string_view to_string(Drift d);

// Propagation direction from the lag of the neighbour cross-correlation.
Drift drift_direction(const Trajectory& traj);

struct HovmollerRow {
  double t;
  double j;  // sector position, 1-based; fractional when interpolated
  double x;
};

struct HovmollerTable {
  std::vector<HovmollerRow> rows;
  int subdivisions = 1;
  Drift drift = Drift::None;
};

// Long-format space-time table. With subdivisions > 1, values between
// neighbouring sectors are linearly interpolated (wrapping x_n -> x_1).
HovmollerTable hovmoller(const Trajectory& traj, int subdivisions = 1);

struct WaveDiagnostics {
  int l = 0;
  std::optional<double> period;
  double amplitude = 0.0;
  Drift drift = Drift::None;
};

WaveDiagnostics diagnose(const Trajectory& traj);

}  // namespace l96
