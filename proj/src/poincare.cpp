#include "l96/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "l96/attractor.hpp"
#include "l96/errors.hpp"
#include "l96/waves.hpp"

namespace l96 {

namespace {

constexpr double kPi = std::numbers::pi;

struct Hermite {
  double h00, h10, h01, h11;
};

Hermite hermite_basis(double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return {2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2};
}

}  // namespace

void Section::validate(int n) const {
  if (coordinate < 0 || coordinate >= n) {
    throw InvalidArgument("section coordinate " + std::to_string(coordinate) +
                          " outside 0.." + std::to_string(n - 1));
  }
  if (!std::isfinite(level)) throw InvalidArgument("section level must be finite");
}

std::vector<Crossing> detect_crossings(const Trajectory& traj, const Section& s) {
  std::vector<Crossing> out;
  if (traj.size() < 2) return out;
  s.validate(traj.dimension());
  const int k = s.coordinate;
  const bool have_derivs = traj.derivatives.size() == traj.size();

  const auto derivative = [&](std::size_t i) -> StateVec {
    if (have_derivs) return traj.derivatives[i];
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(i + 1, traj.size() - 1);
    return (traj.states[b] - traj.states[a]) / (traj.times[b] - traj.times[a]);
  };

  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double a = traj.states[i][k] - s.level;
    const double b = traj.states[i + 1][k] - s.level;
    const bool up = a < 0.0 && b >= 0.0;
    const bool down = a > 0.0 && b <= 0.0;
    const bool take = (s.direction == CrossingDirection::Up && up) ||
                      (s.direction == CrossingDirection::Down && down) ||
                      (s.direction == CrossingDirection::Both && (up || down));
    if (!take) continue;

    const double h = traj.times[i + 1] - traj.times[i];
    const StateVec d0 = derivative(i);
    const StateVec d1 = derivative(i + 1);
    const auto value = [&](double u) {
      const Hermite w = hermite_basis(u);
      return w.h00 * a + w.h10 * h * d0[k] + w.h01 * b + w.h11 * h * d1[k];
    };
    // Bracketed root of the interpolant: bisection, safe for any cubic shape.
    double lo = 0.0;
    double hi = 1.0;
    double u = 0.5;
    for (int it = 0; it < 200; ++it) {
      u = 0.5 * (lo + hi);
      const double v = value(u);
      if (std::abs(v) <= 1e-12 || hi - lo < 1e-16) break;
      if ((v < 0.0) == (a < 0.0)) {
        lo = u;
      } else {
        hi = u;
      }
    }
    const Hermite w = hermite_basis(u);
    StateVec x = w.h00 * traj.states[i] + w.h10 * h * d0 + w.h01 * traj.states[i + 1] +
                 w.h11 * h * d1;
    out.push_back({traj.times[i] + u * h, std::move(x)});
  }
  return out;
}

ReturnMap::ReturnMap(const SystemConfig& cfg, const Section& section, double dt, double max_time)
    : cfg_(cfg), section_(section), dt_(dt), max_time_(max_time) {
  cfg_.validate();
  section_.validate(cfg_.n);
  if (!(dt_ > 0.0)) throw InvalidArgument("dt must be positive");
}

double ReturnMap::signed_distance(const StateVec& x) const {
  const double d = x[section_.coordinate] - section_.level;
  return section_.direction == CrossingDirection::Down ? -d : d;
}

bool ReturnMap::crossed(double before, double after) const {
  if (section_.direction == CrossingDirection::Both) {
    return (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0);
  }
  return before < 0.0 && after >= 0.0;
}

StateVec ReturnMap::next(const StateVec& x0, ReturnLeg* leg) const {
  Rk4Stepper stepper(cfg_);
  const double limit = divergence_limit(cfg_, x0);
  const auto max_steps = static_cast<long>(std::ceil(max_time_ / dt_));
  // Ignore the crossing we may be sitting on.
  const long min_steps = 10;
  StateVec x = x0;
  StateVec y(x0.size());
  double before = signed_distance(x);
  for (long step = 0; step < max_steps; ++step) {
    y = x;
    stepper.step(y, dt_);
    check_divergence(y, limit, static_cast<double>(step + 1) * dt_);
    const double after = signed_distance(y);
    if (step + 1 >= min_steps && crossed(before, after)) {
      // Illinois false position on the length of the final partial step.
      double ta = 0.0, fa = before;
      double tb = dt_, fb = after;
      double tau = dt_;
      StateVec z = y;
      int side = 0;
      for (int it = 0; it < 100; ++it) {
        tau = (ta * fb - tb * fa) / (fb - fa);
        z = x;
        stepper.step(z, tau);
        const double fz = signed_distance(z);
        if (std::abs(fz) <= 1e-13 * (1.0 + std::abs(section_.level)) || tb - ta < 1e-15) break;
        if ((fz < 0.0) == (fa < 0.0)) {
          ta = tau;
          fa = fz;
          if (side == -1) fb *= 0.5;
          side = -1;
        } else {
          tb = tau;
          fb = fz;
          if (side == 1) fa *= 0.5;
          side = 1;
        }
      }
      if (leg != nullptr) *leg = {step, dt_, tau};
      z[section_.coordinate] = section_.level;
      return z;
    }
    x = y;
    before = after;
  }
  throw NoCycle("no return to the section within " + std::to_string(max_time_) + " time units");
}

std::vector<std::complex<double>> PeriodicOrbit::nontrivial() const {
  std::vector<std::complex<double>> out;
  for (std::size_t i = 0; i < floquet.size(); ++i) {
    if (static_cast<int>(i) != trivial) out.push_back(floquet[i]);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  return out;
}

int PeriodicOrbit::unstable_count(double tol) const {
  const auto mus = nontrivial();
  return static_cast<int>(
      std::count_if(mus.begin(), mus.end(), [&](const auto& m) { return std::abs(m) > 1.0 + tol; }));
}

Eigen::MatrixXd monodromy(const SystemConfig& cfg, const StateVec& anchor,
                          const std::vector<ReturnLeg>& legs) {
  Rk4Stepper stepper(cfg, cfg.n);
  StateVec x = anchor;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(cfg.n, cfg.n);
  for (const ReturnLeg& leg : legs) {
    for (long s = 0; s < leg.full_steps; ++s) stepper.step(x, Q, leg.dt);
    if (leg.tail > 0.0) stepper.step(x, Q, leg.tail);
  }
  return Q;
}

namespace {

StateVec expand(const Eigen::VectorXd& z, const Section& s) {
  StateVec x(z.size() + 1);
  for (Eigen::Index i = 0, j = 0; i < x.size(); ++i) {
    x[i] = i == s.coordinate ? s.level : z[j++];
  }
  return x;
}

Eigen::VectorXd reduce(const StateVec& x, const Section& s) {
  Eigen::VectorXd z(x.size() - 1);
  for (Eigen::Index i = 0, j = 0; i < x.size(); ++i) {
    if (i != s.coordinate) z[j++] = x[i];
  }
  return z;
}

StateVec iterate(const ReturnMap& map, const StateVec& x, int m, std::vector<ReturnLeg>* legs) {
  StateVec y = x;
  for (int r = 0; r < m; ++r) {
    ReturnLeg leg;
    y = map.next(y, &leg);
    if (legs != nullptr) legs->push_back(leg);
  }
  return y;
}

int closing_returns(const ReturnMap& map, const StateVec& y0, int max_returns) {
  std::vector<double> dist;
  StateVec y = y0;
  for (int m = 1; m <= max_returns; ++m) {
    y = map.next(y);
    dist.push_back((y - y0).norm());
  }
  const double best = *std::min_element(dist.begin(), dist.end());
  const double slack = 1e-9 * (1.0 + y0.norm());
  for (int m = 1; m <= max_returns; ++m) {
    if (dist[m - 1] <= 2.0 * best + slack) return m;
  }
  return max_returns;
}

// Index of the multiplier whose eigenvector is most aligned with the flow.
int trivial_multiplier(const Eigen::ComplexEigenSolver<Eigen::MatrixXcd>& es, const StateVec& flow) {
  const auto& mus = es.eigenvalues();
  const Eigen::VectorXcd f = flow.cast<std::complex<double>>();
  const double fn = f.norm();
  int best = -1;
  double best_align = -1.0;
  for (Eigen::Index i = 0; i < mus.size(); ++i) {
    if (std::abs(mus[i] - 1.0) > 0.05) continue;
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    const double align = std::abs(v.dot(f)) / (v.norm() * fn);
    if (align > best_align) {
      best_align = align;
      best = static_cast<int>(i);
    }
  }
  if (best >= 0) return best;
  Eigen::Index closest = 0;
  (mus.array() - 1.0).abs().minCoeff(&closest);
  return static_cast<int>(closest);
}

template <class Residual>
std::pair<Eigen::VectorXd, double> newton(const Residual& residual, const Eigen::VectorXd& z0,
                                          const CycleOptions& opts) {
  Eigen::VectorXd z = z0;
  Eigen::VectorXd r = residual(z);
  double rnorm = r.norm();
  const Eigen::Index dim = z.size();
  for (int it = 0; it < opts.max_iterations && rnorm > opts.tolerance; ++it) {
    Eigen::MatrixXd J(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      Eigen::VectorXd zp = z;
      const double h = opts.fd_step * std::max(1.0, std::abs(z[c]));
      zp[c] += h;
      J.col(c) = (residual(zp) - r) / h;
    }
    const Eigen::VectorXd delta = J.colPivHouseholderQr().solve(-r);
    if (!delta.allFinite()) break;
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-3; alpha *= 0.5) {
      const Eigen::VectorXd trial = z + alpha * delta;
      Eigen::VectorXd rt;
      try {
        rt = residual(trial);
      } catch (const std::runtime_error&) {
        continue;
      }
      if (rt.norm() < rnorm) {
        z = trial;
        r = rt;
        rnorm = rt.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return {z, rnorm};
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const SystemConfig& cfg, const StateVec& guess,
                                  const Section& section, const CycleOptions& opts) {
  cfg.validate();
  section.validate(cfg.n);
  if (guess.size() != cfg.n) throw InvalidArgument("guess length does not match n");
  if (cfg.n < 2) throw InvalidArgument("periodic orbits need n >= 2");
  const ReturnMap map(cfg, section, opts.dt, opts.max_return_time);

  const StateVec start = map.next(guess);
  int m = opts.returns > 0 ? opts.returns : closing_returns(map, start, opts.max_returns);

  const auto residual = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return reduce(iterate(map, expand(z, section), m, nullptr), section) - z;
  };

  auto [z, rnorm] = newton(residual, reduce(start, section), opts);
  if (opts.returns == 0 && m > 1 && rnorm <= opts.tolerance) {
    // A slowly converging guess can make a cycle look longer than it is;
    // drop to the smallest return count the converged point closes with.
    const StateVec anchor = expand(z, section);
    const double tol = 1e-6 * (1.0 + anchor.norm());
    StateVec y = anchor;
    for (int d = 1; d < m; ++d) {
      y = map.next(y);
      if (m % d == 0 && (y - anchor).norm() <= tol) {
        m = d;
        std::tie(z, rnorm) = newton(residual, z, opts);
        break;
      }
    }
  }
  if (!(rnorm <= opts.tolerance)) {
    throw NoCycle("Newton iteration on the return map did not converge (residual " +
                  std::to_string(rnorm) + ")");
  }

  PeriodicOrbit orbit;
  orbit.anchor = expand(z, section);
  orbit.returns = m;
  orbit.residual = rnorm;
  std::vector<ReturnLeg> legs;
  iterate(map, orbit.anchor, m, &legs);
  orbit.period = std::accumulate(legs.begin(), legs.end(), 0.0,
                                 [](double acc, const ReturnLeg& l) { return acc + l.time(); });

  const Eigen::MatrixXd M = monodromy(cfg, orbit.anchor, legs);
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M.cast<std::complex<double>>());
  orbit.floquet.assign(es.eigenvalues().begin(), es.eigenvalues().end());
  orbit.trivial = trivial_multiplier(es, vector_field(cfg, orbit.anchor));

  // Time mean of the section coordinate, sampled along the stored legs.
  {
    Rk4Stepper stepper(cfg);
    StateVec x = orbit.anchor;
    double acc = 0.0;
    double weight = 0.0;
    for (const ReturnLeg& leg : legs) {
      for (long s = 0; s < leg.full_steps; ++s) {
        const double before = x[section.coordinate];
        stepper.step(x, leg.dt);
        acc += 0.5 * (before + x[section.coordinate]) * leg.dt;
        weight += leg.dt;
      }
      if (leg.tail > 0.0) {
        const double before = x[section.coordinate];
        stepper.step(x, leg.tail);
        acc += 0.5 * (before + x[section.coordinate]) * leg.tail;
        weight += leg.tail;
      }
    }
    orbit.section_mean = acc / weight;
  }
  try {
    orbit.wave_number = wave_number(orbit.anchor);
  } catch (const UndefinedWave&) {
    orbit.wave_number.reset();
  }
  return orbit;
}

std::string_view to_string(CycleBifurcationKind k) {
  switch (k) {
    case CycleBifurcationKind::Fold: return "fold";
    case CycleBifurcationKind::PeriodDoubling: return "period_doubling";
    case CycleBifurcationKind::NeimarkSacker: return "neimark_sacker";
  }
  return "fold";
}

CycleBifurcationKind classify_crossing(std::complex<double> mu) {
  const double arg = std::abs(std::arg(mu));
  if (arg < 0.1) return CycleBifurcationKind::Fold;
  if (std::abs(arg - kPi) < 0.1) return CycleBifurcationKind::PeriodDoubling;
  return CycleBifurcationKind::NeimarkSacker;
}

namespace {

BranchPoint to_point(double F, const PeriodicOrbit& o) {
  return {F, o.period, o.stable(), o.returns, o.nontrivial()};
}

std::complex<double> nearest_to_unit_circle(const PeriodicOrbit& o) {
  const auto mus = o.nontrivial();
  return *std::min_element(mus.begin(), mus.end(), [](const auto& a, const auto& b) {
    return std::abs(std::abs(a) - 1.0) < std::abs(std::abs(b) - 1.0);
  });
}

class Tracker {
 public:
  Tracker(const SystemConfig& tmpl, const TrackOptions& opts) : tmpl_(tmpl), opts_(opts) {}

  std::optional<PeriodicOrbit> solve(double F, const StateVec& guess, int returns, Section& section) {
    SystemConfig cfg = tmpl_;
    cfg.F = F;
    CycleOptions co = opts_.cycle;
    co.returns = returns;
    try {
      PeriodicOrbit orbit = find_periodic_orbit(cfg, guess, section, co);
      if (returns > 1 && collapsed(cfg, orbit, section)) return std::nullopt;
      return orbit;
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
  }

  // True when a proper divisor of the return count already closes the orbit,
  // i.e. Newton slid onto a cycle of lower period.
  bool collapsed(const SystemConfig& cfg, const PeriodicOrbit& orbit, const Section& section) const {
    const ReturnMap map(cfg, section, opts_.cycle.dt, opts_.cycle.max_return_time);
    const double tol = 1e-5 * (1.0 + orbit.anchor.norm());
    StateVec y = orbit.anchor;
    for (int d = 1; d < orbit.returns; ++d) {
      y = map.next(y);
      if (orbit.returns % d == 0 && (y - orbit.anchor).norm() <= tol) return true;
    }
    return false;
  }

 const TrackOptions& options() const { return opts_; }

 private:
  SystemConfig tmpl_;
  TrackOptions opts_;
};

// Newton on the doubled return map from the anchor displaced along the
// eigenvector of the multiplier nearest -1; larger kicks are tried until the
// solution no longer collapses onto the period-one cycle.
std::optional<PeriodicOrbit> switch_to_doubled(const SystemConfig& cfg, const PeriodicOrbit& orbit,
                                               Section& section, Tracker& tracker) {
  const ReturnMap map(cfg, section, tracker.options().cycle.dt,
                      tracker.options().cycle.max_return_time);
  std::vector<ReturnLeg> legs;
  try {
    iterate(map, orbit.anchor, orbit.returns, &legs);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
  const Eigen::MatrixXd M = monodromy(cfg, orbit.anchor, legs);
  const Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  Eigen::Index best = 0;
  (es.eigenvalues().array() + 1.0).abs().minCoeff(&best);
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  v[section.coordinate] = 0.0;
  if (!(v.norm() > 0.0)) return std::nullopt;
  v.normalize();

  const double scale = 1.0 + orbit.anchor.norm();
  for (const double eps : {1e-2, 3e-2, 1e-1, 3e-1}) {
    for (const double sign : {1.0, -1.0}) {
      const StateVec guess = orbit.anchor + sign * eps * scale * v;
      auto doubled = tracker.solve(cfg.F, guess, 2 * orbit.returns, section);
      if (!doubled) continue;
      try {
        const StateVec half = iterate(map, doubled->anchor, orbit.returns, nullptr);
        if ((half - doubled->anchor).norm() > 1e-5 * scale) return doubled;
      } catch (const std::runtime_error&) {
      }
    }
  }
  return std::nullopt;
}

}  // namespace

Branch track_cycle_bifurcations(const SystemConfig& tmpl, double F_lo, double F_hi,
                                const TrackOptions& opts) {
  tmpl.validate();
  if (!(F_hi > F_lo)) throw InvalidArgument("F range must be increasing");
  if (!(opts.step > 0.0) || !(opts.min_step > 0.0)) throw InvalidArgument("steps must be positive");

  SystemConfig cfg = tmpl;
  cfg.F = F_lo;
  IntegrationSpec settle;
  settle.dt = opts.cycle.dt;
  settle.transient = opts.settle_time;
  settle.t_end = opts.settle_time + 50.0;
  const Trajectory warm = integrate(cfg, cold_start(cfg), settle);

  Branch branch;
  if (opts.section) {
    branch.section = *opts.section;
  } else {
    const std::vector<double> s0 = warm.coordinate(0);
    branch.section = {0, std::accumulate(s0.begin(), s0.end(), 0.0) / static_cast<double>(s0.size()),
                      CrossingDirection::Up};
  }

  Tracker tracker(tmpl, opts);
  CycleOptions first_opts = opts.cycle;
  PeriodicOrbit orbit;
  try {
    orbit = find_periodic_orbit(cfg, warm.states.back(), branch.section, first_opts);
  } catch (const std::runtime_error& e) {
    throw NoCycle(std::string("no periodic orbit at the start of the range: ") + e.what());
  }
  double F = F_lo;
  branch.points.push_back(to_point(F, orbit));

  double h = opts.step;
  while (F < F_hi - 1e-12) {
    const double F_next = std::min(F + h, F_hi);
    std::optional<PeriodicOrbit> next = tracker.solve(F_next, orbit.anchor, orbit.returns, branch.section);
    if (!next) {
      // The section may have become tangent to the orbit, which changes the
      // number of crossings per period. Retry with the section re-levelled on
      // the current orbit and with the return count re-detected, accepting
      // only a cycle whose period continues the branch.
      Section relevel = branch.section;
      relevel.level = orbit.section_mean;
      const std::pair<Section, int> attempts[] = {
          {relevel, orbit.returns}, {branch.section, 0}, {relevel, 0}};
      for (const auto& [sec, returns] : attempts) {
        Section trial = sec;
        auto candidate = tracker.solve(F_next, orbit.anchor, returns, trial);
        if (candidate && std::abs(candidate->period - orbit.period) <= 0.05 * orbit.period) {
          next = candidate;
          branch.section = trial;
          break;
        }
      }
    }
    if (!next) {
      h *= 0.5;
      if (h < opts.min_step) {
        branch.events.push_back({CycleBifurcationKind::Fold, F, nearest_to_unit_circle(orbit)});
        branch.terminated = true;
        break;
      }
      continue;
    }

    if (next->unstable_count() != orbit.unstable_count()) {
      double Fa = F, Fb = F_next;
      PeriodicOrbit a = orbit, b = *next;
      while (Fb - Fa > opts.bisection_width) {
        const double Fm = 0.5 * (Fa + Fb);
        auto mid = tracker.solve(Fm, a.anchor, a.returns, branch.section);
        if (!mid) break;
        if (mid->unstable_count() == a.unstable_count()) {
          Fa = Fm;
          a = *mid;
        } else {
          Fb = Fm;
          b = *mid;
        }
      }
      const bool losing = b.unstable_count() > a.unstable_count();
      const std::complex<double> mu = nearest_to_unit_circle(losing ? b : a);
      const CycleBifurcationKind kind = classify_crossing(mu);
      branch.events.push_back({kind, 0.5 * (Fa + Fb), mu});

      if (kind == CycleBifurcationKind::PeriodDoubling && losing && a.stable() &&
          opts.follow_period_doubling) {
        SystemConfig c2 = tmpl;
        c2.F = F_next;
        if (auto doubled = switch_to_doubled(c2, *next, branch.section, tracker)) next = doubled;
      }
    }

    F = F_next;
    orbit = *next;
    branch.points.push_back(to_point(F, orbit));
    h = std::min(opts.step, 2.0 * h);
  }
  return branch;
}

}  // namespace l96
