#include "l96/waves.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "l96/errors.hpp"
#include "l96/spectral.hpp"

namespace l96 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJitter = 0.01;

double sample_spacing(const Trajectory& traj) {
  if (traj.size() < 2) throw InvalidArgument("trajectory needs at least two samples");
  return traj.times[1] - traj.times[0];
}

std::vector<double> upward_mean_crossings(const std::vector<double>& s, double t0, double h) {
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = s[i] - mean;
    const double b = s[i + 1] - mean;
    if (a < 0.0 && b >= 0.0) out.push_back(t0 + h * (static_cast<double>(i) + a / (a - b)));
  }
  return out;
}

// Mean-removed autocorrelation of s at integer lag, normalised by overlap.
double autocorrelation(const std::vector<double>& s, double mean, std::size_t lag) {
  double acc = 0.0;
  const std::size_t m = s.size() - lag;
  for (std::size_t i = 0; i < m; ++i) acc += (s[i] - mean) * (s[i + lag] - mean);
  return acc / static_cast<double>(m);
}

}  // namespace

WaveNumber dominant_wave(const StateVec& x) {
  const auto n = static_cast<int>(x.size());
  if (n < 2) throw InvalidArgument("wave number needs n >= 2");
  const double mean = x.mean();
  std::vector<double> mag(n / 2 + 1, 0.0);
  for (int m = 1; m <= n / 2; ++m) {
    std::complex<double> acc{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      acc += (x[j] - mean) * std::polar(1.0, -2.0 * kPi * static_cast<double>((m * j) % n) / n);
    }
    mag[m] = std::abs(acc);
  }
  const auto best = std::max_element(mag.begin() + 1, mag.end());
  const double scale = (x.array() - mean).abs().maxCoeff();
  if (!(scale > 1e-14 * (1.0 + std::abs(mean))) || *best <= 1e-12 * scale) {
    throw UndefinedWave("state has no spatial variation; wave number undefined");
  }
  // Magnitudes within rounding of the maximum count as ties; keep the smallest.
  WaveNumber w{0, false};
  for (int m = 1; m <= n / 2; ++m) {
    if (mag[m] < *best * (1.0 - 1e-9)) continue;
    if (w.l == 0) {
      w.l = m;
    } else {
      w.degenerate = true;
    }
  }
  return w;
}

int wave_number(const StateVec& x) { return dominant_wave(x).l; }

double measure_period(const Trajectory& traj) {
  const double h = sample_spacing(traj);
  const std::vector<double> s = traj.coordinate(0);
  const std::vector<double> cross = upward_mean_crossings(s, traj.times.front(), h);
  if (cross.size() < 4) throw NotPeriodic("too few mean crossings to estimate a period");

  std::vector<double> gaps(cross.size() - 1);
  for (std::size_t i = 0; i + 1 < cross.size(); ++i) gaps[i] = cross[i + 1] - cross[i];

  // Allow several crossings per cycle: look for the smallest group size p
  // whose sliding sums of p consecutive gaps are constant.
  std::optional<double> coarse;
  const std::size_t max_group = std::min<std::size_t>(8, gaps.size() / 3);
  for (std::size_t p = 1; p <= max_group && !coarse; ++p) {
    std::vector<double> sums;
    for (std::size_t k = 0; k + p <= gaps.size(); ++k) {
      sums.push_back(std::accumulate(gaps.begin() + static_cast<long>(k),
                                     gaps.begin() + static_cast<long>(k + p), 0.0));
    }
    const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
    const double avg = std::accumulate(sums.begin(), sums.end(), 0.0) / static_cast<double>(sums.size());
    if ((*hi - *lo) <= kJitter * avg) coarse = avg;
  }
  if (!coarse) throw NotPeriodic("crossing spacing does not repeat within 1%");

  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  const auto lag_lo = static_cast<std::size_t>(std::max(1.0, std::floor(0.9 * *coarse / h)));
  const auto lag_hi = static_cast<std::size_t>(std::ceil(1.1 * *coarse / h));
  if (lag_hi + 2 >= s.size() / 2) return *coarse;

  std::size_t best = lag_lo;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
    const double r = autocorrelation(s, mean, lag);
    if (r > best_val) {
      best_val = r;
      best = lag;
    }
  }
  if (best == lag_lo || best == lag_hi) return *coarse;
  const double rm = autocorrelation(s, mean, best - 1);
  const double rp = autocorrelation(s, mean, best + 1);
  const double denom = rm - 2.0 * best_val + rp;
  const double shift = denom < 0.0 ? 0.5 * (rm - rp) / denom : 0.0;
  return h * (static_cast<double>(best) + shift);
}

StateVec linearized_wave(int l, int n, double F, double t) {
  const double FH = hopf_value(l, n);
  if (F < FH) throw PreOnset("F is below the Hopf value of this wave");
  const double amp = std::sqrt((F - FH) / n);
  const double w = omega0(l, n);
  StateVec p(n);
  for (int j = 0; j < n; ++j) {
    p[j] = amp * std::cos(w * t + 2.0 * kPi * static_cast<double>((static_cast<long long>(j) * l) % n) / n);
  }
  return p;
}

double onset_amplitude(int l, int n, double F) {
  const double FH = hopf_value(l, n);
  if (F < FH) throw PreOnset("F is below the Hopf value of this wave");
  const double ell1 = first_lyapunov_coeff(l, n);
  if (!(ell1 < 0.0)) throw DegenerateHopf("no stable cycle near onset of a subcritical Hopf point");
  const double growth = f_g(l, n).f * (F - FH);
  if (!(growth >= 0.0)) throw PreOnset("x_F is still stable in this mode");
  return 2.0 * std::sqrt(growth / (-omega0(l, n) * ell1 * n));
}

std::string_view to_string(Drift d) {
  switch (d) {
    case Drift::DecreasingJ: return "decreasing_j";
    case Drift::IncreasingJ: return "increasing_j";
    case Drift::None: return "none";
  }
  return "none";
}

Drift drift_direction(const Trajectory& traj) {
  const double h = sample_spacing(traj);
  const int n = traj.dimension();
  if (n < 2) return Drift::None;
  const std::size_t len = traj.size();

  std::vector<std::vector<double>> series(n);
  bool varies = false;
  for (int j = 0; j < n; ++j) {
    series[j] = traj.coordinate(j);
    const double mean = std::accumulate(series[j].begin(), series[j].end(), 0.0) / static_cast<double>(len);
    for (double& v : series[j]) {
      v -= mean;
      if (std::abs(v) > 1e-12) varies = true;
    }
  }
  if (!varies) return Drift::None;

  double window = 5.0;
  try {
    window = 0.5 * measure_period(traj);
  } catch (const NotPeriodic&) {
  }
  const auto max_lag = static_cast<long>(std::min<double>(window / h, static_cast<double>(len) / 4.0));
  if (max_lag < 1) return Drift::None;

  long best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto& a = series[j];
      const auto& b = series[(j + 1) % n];
      for (std::size_t i = 0; i < len; ++i) {
        const long k = static_cast<long>(i) + lag;
        if (k < 0 || k >= static_cast<long>(len)) continue;
        acc += a[i] * b[static_cast<std::size_t>(k)];
      }
    }
    acc /= static_cast<double>(len - static_cast<std::size_t>(std::labs(lag)));
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  // x_{j+1}(t + lag) best matches x_j(t): a negative lag means sector j+1
  // sees the pattern first, so it moves towards smaller j.
  if (best_lag < 0) return Drift::DecreasingJ;
  if (best_lag > 0) return Drift::IncreasingJ;
  return Drift::None;
}

HovmollerTable hovmoller(const Trajectory& traj, int subdivisions) {
  if (subdivisions < 1) throw InvalidArgument("subdivisions must be >= 1");
  HovmollerTable table;
  table.subdivisions = subdivisions;
  const int n = traj.dimension();
  table.rows.reserve(traj.size() * static_cast<std::size_t>(n * subdivisions));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const StateVec& x = traj.states[i];
    for (int j = 0; j < n; ++j) {
      const double next = x[(j + 1) % n];
      for (int s = 0; s < subdivisions; ++s) {
        const double frac = static_cast<double>(s) / subdivisions;
        table.rows.push_back({traj.times[i], j + 1 + frac, (1.0 - frac) * x[j] + frac * next});
      }
    }
  }
  if (traj.size() >= 2) table.drift = drift_direction(traj);
  return table;
}

WaveDiagnostics diagnose(const Trajectory& traj) {
  if (traj.empty()) throw InvalidArgument("empty trajectory");
  WaveDiagnostics d;
  try {
    d.l = wave_number(traj.states.back());
  } catch (const UndefinedWave&) {
    d.l = 0;
  }
  try {
    d.period = measure_period(traj);
  } catch (const NotPeriodic&) {
    d.period.reset();
  }
  const std::vector<double> s = traj.coordinate(0);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  d.amplitude = 0.5 * (*hi - *lo);
  d.drift = traj.size() >= 2 ? drift_direction(traj) : Drift::None;
  return d;
}

}  // namespace l96
