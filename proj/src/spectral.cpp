#include "l96/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>

#include "l96/errors.hpp"

namespace l96 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHopfHopfTol = 1e-12;
constexpr double kTieTol = 1e-12;

void require_crossing(int l, int n) {
  if (!is_crossing_index(l, n)) {
    throw NoCrossing("eigenpair l = " + std::to_string(l) + " of n = " + std::to_string(n) +
                     " does not cross the imaginary axis (need 0 < l < n/2, l != n/3)");
  }
}

// cos and sin of 2 pi k / n, exact at multiples of a twelfth turn where the
// value is 0, +-1/2 or +-1 so that e.g. F_H(1, 6) comes out as exactly 1.
double cos_turn(long long k, long long n) {
  const long long r = ((k % n) + n) % n;
  if ((12 * r) % n == 0) {
    switch ((12 * r) / n) {
      case 0: return 1.0;
      case 2: case 10: return 0.5;
      case 3: case 9: return 0.0;
      case 4: case 8: return -0.5;
      case 6: return -1.0;
      default: break;
    }
  }
  return std::cos(2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
}

double sin_turn(long long k, long long n) { return cos_turn(n - 4 * k, 4 * n); }

void require_index(int j, int n) {
  if (n < 1 || j < 0 || j >= n) {
    throw InvalidArgument("eigen index " + std::to_string(j) + " out of range for n = " +
                          std::to_string(n));
  }
}

}  // namespace

FG f_g(int l, int n) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  return {cos_turn(l, n) - cos_turn(2LL * l, n), -sin_turn(l, n) - sin_turn(2LL * l, n)};
}

std::complex<double> eigenvalue(int j, const SystemConfig& cfg) {
  cfg.validate();
  require_index(j, cfg.n);
  const auto [f, g] = f_g(j, cfg.n);
  const double diffusion = 2.0 * cfg.G * (1.0 - cos_turn(j, cfg.n));
  return {-1.0 - diffusion + cfg.F * f, cfg.F * g};
}

Eigen::VectorXcd eigenvector(int j, int n) {
  require_index(j, n);
  Eigen::VectorXcd v(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    // Reduce j*k mod n first so large powers of rho stay exact.
    const double angle = -2.0 * kPi * static_cast<double>((static_cast<long long>(j) * k) % n) / n;
    v[k] = std::polar(scale, angle);
  }
  return v;
}

bool is_crossing_index(int l, int n) { return n >= 1 && l > 0 && 2 * l < n && 3 * l != n; }

double hopf_value(int l, int n) {
  require_crossing(l, n);
  return 1.0 / f_g(l, n).f;
}

double hopf_value(int l, int n, double G) {
  require_crossing(l, n);
  return (1.0 + 2.0 * G * (1.0 - cos_turn(l, n))) / f_g(l, n).f;
}

HopfValueBounds hopf_value_bounds(int n) {
  if (n < 4) throw UnsupportedDimension("Hopf value bounds need n >= 4");
  HopfValueBounds b{};
  b.F_max = n == 7 ? 1.0 / f_g(2, 7).f : 1.0 / f_g(1, n).f;
  if (n == 4 || n == 6) {
    b.F_min = -0.5;
  } else {
    const int r = n / 3;
    b.F_min = 1.0 / f_g(r + 1, n).f;
  }
  return b;
}

double omega0(int l, int n) {
  require_crossing(l, n);
  return 1.0 / std::tan(kPi * l / n);
}

double lyapunov_numerator(double y) {
  return 5.0 * std::cos(y) + 8.0 * std::cos(2.0 * y) - 2.0 * std::cos(3.0 * y) - 8.0;
}

double first_lyapunov_coeff(int l, int n) {
  require_crossing(l, n);
  const double a = kPi * l / n;
  const double s3 = std::sin(3.0 * a);
  const double denom = 4.0 * std::cos(2.0 * a) - 4.0 * std::cos(4.0 * a) + 9.0;
  return 4.0 / n * std::tan(a) * s3 * s3 * lyapunov_numerator(2.0 * a) / denom;
}

double critical_angle() {
  static const double root = [] {
    double lo = 0.4;
    double hi = 0.7;
    if (!(lyapunov_numerator(lo) > 0.0 && lyapunov_numerator(hi) < 0.0)) {
      throw std::logic_error("critical_angle: bisection bracket does not straddle the root");
    }
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (lyapunov_numerator(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

double critical_ratio() { return critical_angle() / (2.0 * kPi); }

std::string_view to_string(Criticality c) {
  return c == Criticality::Subcritical ? "subcritical" : "supercritical";
}

Criticality criticality(int l, int n) {
  const double ell1 = first_lyapunov_coeff(l, n);
  if (ell1 == 0.0) {
    throw DegenerateHopf("first Lyapunov coefficient vanishes for l = " + std::to_string(l) +
                         ", n = " + std::to_string(n));
  }
  return ell1 > 0.0 ? Criticality::Subcritical : Criticality::Supercritical;
}

bool hopf_hopf_check(int l1, int l2, int n) {
  if (l1 == l2 || !is_crossing_index(l1, n) || !is_crossing_index(l2, n)) return false;
  const double s = cos_turn(l1, n) + cos_turn(l2, n);
  return std::abs(s - 0.5) <= kHopfHopfTol;
}

double bifurcation_value(const BifurcationRecord& r) {
  return std::visit(
      [](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, HopfPoint>) {
          return p.F_H;
        } else {
          return p.F_HH;
        }
      },
      r);
}

std::vector<BifurcationRecord> enumerate_bifurcations(int n) {
  if (n < 4) throw UnsupportedDimension("bifurcation enumeration needs n >= 4");
  std::vector<int> indices;
  for (int l = 1; 2 * l < n; ++l) {
    if (is_crossing_index(l, n)) indices.push_back(l);
  }
  std::vector<bool> merged(indices.size(), false);
  std::vector<BifurcationRecord> out;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    if (merged[a]) continue;
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      if (!merged[b] && hopf_hopf_check(indices[a], indices[b], n)) {
        merged[a] = merged[b] = true;
        out.emplace_back(HopfHopfPoint{indices[a], indices[b], n, hopf_value(indices[a], n)});
        break;
      }
    }
    if (!merged[a]) {
      const int l = indices[a];
      const double ell1 = first_lyapunov_coeff(l, n);
      out.emplace_back(HopfPoint{l, n, hopf_value(l, n), omega0(l, n), ell1, criticality(l, n)});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    const double fx = bifurcation_value(x);
    const double fy = bifurcation_value(y);
    const bool px = fx > 0.0;
    const bool py = fy > 0.0;
    if (px != py) return px;
    return fx < fy;
  });
  return out;
}

FirstBifurcation first_bifurcation_index(int n) {
  if (n < 4) throw UnsupportedDimension("first bifurcation index needs n >= 4");
  double best = -std::numeric_limits<double>::infinity();
  for (int l = 1; 3 * l < n; ++l) best = std::max(best, f_g(l, n).f);
  FirstBifurcation fb;
  for (int l = 1; 3 * l < n; ++l) {
    if (f_g(l, n).f >= best - kTieTol) fb.indices.push_back(l);
  }
  return fb;
}

AsymptoticLimits asymptotic_limits() {
  const double y = std::acos(0.25);
  return {2.0 * kPi * std::tan(0.5 * y), 2.0 * kPi / y};
}

double onset_period(int l, int n) {
  require_crossing(l, n);
  return 2.0 * kPi * std::tan(kPi * l / n);
}

double hopf_line(int l, int n, double F) {
  require_crossing(l, n);
  if (F == 0.0) throw ExcludedParameter("Hopf lines exclude F = 0, where kappa_l vanishes");
  return (F * f_g(l, n).f - 1.0) / (2.0 * (1.0 - cos_turn(l, n)));
}

void NormalFormCoefficients::validate() const {
  if (sigma != 1 && sigma != -1) throw InvalidArgument("sigma must be +1 or -1");
}

NormalFormCoefficients n12_normal_form() { return {1, 1.414, 1.258, -0.200, 0.678}; }

NsSlopes ns_tangent_slopes(const NormalFormCoefficients& c) {
  c.validate();
  if (c.delta == 2.0 || c.theta == 0.5) {
    throw DegenerateUnfolding("tangent slopes need delta != 2 and theta != 1/2");
  }
  return {(1.0 - c.delta) / (2.0 - c.delta), (1.0 - c.theta) / (1.0 - 2.0 * c.theta)};
}

}  // namespace l96
