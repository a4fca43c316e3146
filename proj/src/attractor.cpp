#include "l96/attractor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "l96/errors.hpp"
#include "l96/waves.hpp"

namespace l96 {

void LyapunovOptions::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(transient >= 0.0)) throw InvalidArgument("transient must be >= 0");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(renorm_interval >= dt)) throw InvalidArgument("renormalisation interval must be >= dt");
}

namespace {

// Modified Gram-Schmidt; returns the column norms (diagonal of R).
Eigen::VectorXd orthonormalize(Eigen::MatrixXd& Q) {
  Eigen::VectorXd r(Q.cols());
  for (Eigen::Index c = 0; c < Q.cols(); ++c) {
    for (Eigen::Index p = 0; p < c; ++p) Q.col(c) -= Q.col(p).dot(Q.col(c)) * Q.col(p);
    r[c] = Q.col(c).norm();
    Q.col(c) /= r[c];
  }
  return r;
}

}  // namespace

LyapunovSpectrum lyapunov_spectrum(const SystemConfig& cfg, const StateVec& x0, int k,
                                   const LyapunovOptions& opts) {
  cfg.validate();
  opts.validate();
  if (k < 1 || k > cfg.n) throw InvalidArgument("number of exponents must satisfy 1 <= k <= n");

  IntegrationSpec spec;
  spec.dt = opts.dt;
  spec.transient = opts.transient;
  spec.t_end = opts.transient + opts.horizon;
  // Only the final state is of interest; keep a single sample.
  spec.sample_every = std::max<int>(1, static_cast<int>(std::llround(opts.horizon / opts.dt)));

  const double half = opts.transient + 0.5 * opts.horizon;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd at_half = Eigen::VectorXd::Zero(k);
  bool half_recorded = false;
  double last_t = 0.0;

  const Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(cfg.n, k);
  const Trajectory traj = integrate_with_tangent(
      cfg, x0, Q0, spec, opts.renorm_interval,
      [&](double t, const StateVec&, Eigen::MatrixXd& Q) {
        const Eigen::VectorXd r = orthonormalize(Q);
        if (t > opts.transient + 1e-9) sums += r.array().log().matrix();
        if (!half_recorded && t >= half - 1e-9) {
          at_half = sums;
          half_recorded = true;
        }
        last_t = t;
      });

  const double averaged = last_t - opts.transient;
  const double averaged_half = half - opts.transient;
  LyapunovSpectrum out;
  out.horizon = averaged;
  out.renorm_interval = opts.renorm_interval;
  out.final_state = traj.states.back();
  out.exponents.resize(k);
  for (int i = 0; i < k; ++i) out.exponents[i] = sums[i] / averaged;
  std::vector<double> first_half(k);
  for (int i = 0; i < k; ++i) first_half[i] = at_half[i] / averaged_half;
  std::sort(first_half.begin(), first_half.end(), std::greater<>());
  std::sort(out.exponents.begin(), out.exponents.end(), std::greater<>());
  out.settled.resize(k);
  for (int i = 0; i < k; ++i) {
    const double diff = std::abs(out.exponents[i] - first_half[i]);
    out.settled[i] =
        diff <= std::max(opts.convergence_tol, opts.convergence_rel * std::abs(out.exponents[i]));
  }
  out.converged = std::all_of(out.settled.begin(), out.settled.end(), [](bool b) { return b; });
  return out;
}

std::string AttractorClass::code() const {
  switch (kind) {
    case AttractorKind::Equilibrium: return "E";
    case AttractorKind::Periodic: return "P";
    case AttractorKind::QuasiPeriodic: return "Q" + std::to_string(torus_dim);
    case AttractorKind::Chaotic: return "C";
    case AttractorKind::Unclassified: return "U";
  }
  return "U";
}

AttractorClass classify(const LyapunovSpectrum& spectrum, double tol_zero) {
  AttractorClass c;
  c.evidence = spectrum;
  if (spectrum.exponents.empty()) return c;
  const auto& ex = spectrum.exponents;
  // A settled positive leading exponent is enough for chaos; the trailing
  // ones may still wander.
  const bool lead_settled = spectrum.settled.empty() ? spectrum.converged : spectrum.settled.front();
  if (ex.front() > tol_zero && lead_settled) {
    c.kind = AttractorKind::Chaotic;
    return c;
  }
  if (!spectrum.converged) return c;
  if (ex.front() > tol_zero) {
    c.kind = AttractorKind::Chaotic;
    return c;
  }
  const auto neutral = std::count_if(ex.begin(), ex.end(),
                                     [&](double v) { return std::abs(v) <= tol_zero; });
  if (neutral == 0) {
    c.kind = AttractorKind::Equilibrium;
  } else if (neutral == 1) {
    c.kind = AttractorKind::Periodic;
  } else if (neutral <= kMaxTorusDim) {
    c.kind = AttractorKind::QuasiPeriodic;
    c.torus_dim = static_cast<int>(neutral);
  }
  return c;
}

StateVec cold_start(const SystemConfig& cfg) {
  StateVec x = equilibrium(cfg);
  x[0] += 1e-3;
  return x;
}

StateVec random_start(const SystemConfig& cfg, std::uint64_t seed, double amplitude) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, amplitude);
  StateVec x = equilibrium(cfg);
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] += normal(rng);
  return x;
}

StateVec wave_start(const SystemConfig& cfg, int l, double amplitude) {
  cfg.validate();
  if (l < 0 || 2 * l > cfg.n) throw InvalidArgument("wave number must satisfy 0 <= l <= n/2");
  StateVec x = equilibrium(cfg);
  for (int j = 0; j < cfg.n; ++j) {
    x[j] += amplitude * std::cos(2.0 * std::numbers::pi * j * l / cfg.n);
  }
  return x;
}

std::string_view to_string(SweepDirection d) {
  switch (d) {
    case SweepDirection::None: return "none";
    case SweepDirection::IncreasingF: return "increasing_F";
    case SweepDirection::Up: return "up";
    case SweepDirection::Down: return "down";
  }
  return "none";
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 2) throw InvalidArgument("a scan needs at least 2 steps");
  std::vector<double> v(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
  return v;
}

namespace {

// One scan point; on failure the point is marked U and the seed is reset.
ScanPoint evaluate(const SystemConfig& cfg, StateVec& seed, bool first, const ScanOptions& opts) {
  ScanPoint p;
  p.F = cfg.F;
  p.G = cfg.G;
  // A warm start sitting on x_F would never leave it once x_F turns unstable.
  if ((seed - equilibrium(cfg)).norm() < 1e-6) {
    seed = cold_start(cfg);
  } else if (!first) {
    // Same for symmetric states (waves with n/l integer live in an invariant
    // subspace), so every warm start gets a small asymmetric kick.
    seed[0] += opts.warm_kick;
  }
  try {
    const int k = std::min(opts.exponents, cfg.n);
    const LyapunovSpectrum s = lyapunov_spectrum(cfg, seed, k, first ? opts.first : opts.warm);
    p.cls = classify(s, opts.tol_zero);
    try {
      p.wave = wave_number(s.final_state);
    } catch (const UndefinedWave&) {
      p.wave = 0;
    }
    seed = s.final_state;
  } catch (const std::exception& e) {
    p.cls = AttractorClass{};
    p.error = e.what();
    seed = cold_start(cfg);
  }
  return p;
}

}  // namespace

ScanResult scan_F(const SystemConfig& tmpl, double F_lo, double F_hi, int steps, bool warm_start,
                  const ScanOptions& opts) {
  tmpl.validate();
  ScanResult res;
  res.F_axis = linspace(F_lo, F_hi, steps);
  res.G_axis = {tmpl.G};
  res.warm_start = warm_start;
  res.lineage = warm_start ? SweepDirection::IncreasingF : SweepDirection::None;
  SystemConfig cfg = tmpl;
  StateVec seed;
  for (std::size_t i = 0; i < res.F_axis.size(); ++i) {
    cfg.F = res.F_axis[i];
    const bool first = i == 0 || !warm_start;
    if (first) seed = cold_start(cfg);
    res.points.push_back(evaluate(cfg, seed, first, opts));
    if (!res.chaos_onset && res.points.back().cls.kind == AttractorKind::Chaotic) {
      res.chaos_onset = cfg.F;
    }
  }
  return res;
}

ScanResult scan_FG(const SystemConfig& tmpl, double F_lo, double F_hi, double G_lo, double G_hi,
                   int F_steps, int G_steps, SweepDirection direction, const ScanOptions& opts) {
  tmpl.validate();
  if (direction != SweepDirection::Up && direction != SweepDirection::Down) {
    throw InvalidArgument("F x G scans sweep G either up or down");
  }
  ScanResult res;
  res.F_axis = linspace(F_lo, F_hi, F_steps);
  res.G_axis = linspace(G_lo, G_hi, G_steps);
  res.warm_start = true;
  res.lineage = direction;
  res.points.resize(res.F_axis.size() * res.G_axis.size());

  const auto column = [&](std::size_t f) {
    SystemConfig cfg = tmpl;
    cfg.F = res.F_axis[f];
    const std::size_t ng = res.G_axis.size();
    StateVec seed;
    for (std::size_t step = 0; step < ng; ++step) {
      const std::size_t g = direction == SweepDirection::Up ? step : ng - 1 - step;
      cfg.G = res.G_axis[g];
      if (step == 0) seed = cold_start(cfg);
      res.points[f * ng + g] = evaluate(cfg, seed, step == 0, opts);
    }
  };

  const int workers = std::max(1, std::min<int>(opts.threads, static_cast<int>(res.F_axis.size())));
  if (workers == 1) {
    for (std::size_t f = 0; f < res.F_axis.size(); ++f) column(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < res.F_axis.size(); f = next++) column(f);
      });
    }
  }

  for (std::size_t f = 0; f < res.F_axis.size() && !res.chaos_onset; ++f) {
    for (std::size_t g = 0; g < res.G_axis.size(); ++g) {
      if (res.at(f, g).cls.kind == AttractorKind::Chaotic) {
        res.chaos_onset = res.F_axis[f];
        break;
      }
    }
  }
  return res;
}

}  // namespace l96
