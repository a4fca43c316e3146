#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "l96/errors.hpp"
#include "l96/model.hpp"
#include "l96/spectral.hpp"
#include "oracles.hpp"

using namespace l96;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("f and g") {
  const FG a = f_g(1, 4);
  CHECK(a.f == doctest::Approx(1.0));
  CHECK(a.g == doctest::Approx(-1.0));
  const FG z = f_g(0, 9);
  CHECK(z.f == 0.0);
  CHECK(z.g == 0.0);
  CHECK(std::abs(f_g(2, 6).f) < 1e-15);
}

TEST_CASE("eigenvalues at special indices") {
  CHECK(eigenvalue(0, {7, 3.0, 0.0}) == std::complex<double>(-1.0, 0.0));
  const auto half = eigenvalue(4, {8, 2.5, 0.0});
  CHECK(half.real() == doctest::Approx(-6.0));
  CHECK(std::abs(half.imag()) < 1e-14);
  const auto third = eigenvalue(3, {9, 2.5, 0.4});
  CHECK(third.real() == doctest::Approx(-1.0 - 3 * 0.4));
  CHECK_THROWS_AS(eigenvalue(9, {9, 1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(eigenvector(-1, 9), InvalidArgument);
}

TEST_CASE("eigenvectors diagonalise the jacobian at x_F") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> F(-5, 10), G(-0.3, 0.5);
  for (int n = 4; n <= 16; ++n) {
    const SystemConfig cfg{n, F(rng), G(rng)};
    const Eigen::MatrixXcd J = jacobian(cfg, equilibrium(cfg)).cast<std::complex<double>>();
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXcd v = eigenvector(j, n);
      CHECK(std::abs(v.norm() - 1.0) < 1e-14);
      CHECK((J * v - eigenvalue(j, cfg) * v).norm() <= 1e-12);
      if (j > 0) {
        CHECK((v - eigenvector(n - j, n).conjugate()).norm() < 1e-14);
        CHECK(std::abs(eigenvalue(j, cfg) - std::conj(eigenvalue(n - j, cfg))) < 1e-12);
      }
    }
    CHECK((eigenvector(0, n).array() - 1.0 / std::sqrt(double(n))).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("trace identity") {
  for (int n = 4; n <= 30; ++n) {
    const SystemConfig cfg{n, 4.2, 0.13};
    std::complex<double> sum = 0;
    for (int j = 0; j < n; ++j) sum += eigenvalue(j, cfg);
    CHECK_MESSAGE(std::abs(sum - std::complex<double>(-n * (1 + 2 * 0.13), 0)) < 1e-10, "n=" << n << " sum=" << sum.real());
  }
}

TEST_CASE("Hopf values") {
  CHECK(hopf_value(1, 4) == 1.0);
  CHECK(hopf_value(1, 5) == doctest::Approx(0.8944272).epsilon(1e-7));
  CHECK(hopf_value(8, 36) == doctest::Approx(0.898198).epsilon(1e-6));
  CHECK_THROWS_AS(hopf_value(2, 6), NoCrossing);
  CHECK_THROWS_AS(hopf_value(2, 4), NoCrossing);
  CHECK_THROWS_AS(hopf_value(0, 5), NoCrossing);
  // With diffusion the Hopf value is where Re kappa_l vanishes.
  for (int n = 5; n <= 20; ++n) {
    for (int l = 1; 2 * l < n; ++l) {
      if (!is_crossing_index(l, n)) continue;
      const double FH = hopf_value(l, n, 0.17);
      CHECK(std::abs(eigenvalue(l, {n, FH, 0.17}).real()) < 1e-12);
      // Transversal crossing: d Re kappa_l / dF = f(l, n) is non-zero.
      CHECK(std::abs(f_g(l, n).f) > 1e-3);
    }
  }
}

TEST_CASE("Hopf value bounds") {
  const auto b4 = hopf_value_bounds(4);
  CHECK(b4.F_min == -0.5);
  CHECK(b4.F_max == 1.0);
  CHECK(hopf_value_bounds(7).F_max == doctest::Approx(1.0 / f_g(2, 7).f));
  CHECK_THROWS_AS(hopf_value_bounds(3), UnsupportedDimension);
  for (int n = 4; n <= 100; ++n) {
    const auto b = hopf_value_bounds(n);
    for (int l = 1; 2 * l < n; ++l) {
      if (!is_crossing_index(l, n)) continue;
      const double FH = hopf_value(l, n);
      const bool lower = FH >= b.F_min - 1e-12 && FH < -0.5;
      const bool upper = FH >= 8.0 / 9.0 && FH <= b.F_max + 1e-12;
      CHECK_MESSAGE((lower || upper), "n=" << n << " l=" << l << " F_H=" << FH);
    }
  }
}

TEST_CASE("omega0") {
  CHECK(omega0(1, 4) == doctest::Approx(1.0));
  CHECK(omega0(1, 5) == doctest::Approx(1.3763819).epsilon(1e-7));
  for (int n = 4; n <= 40; ++n) {
    for (int l = 1; 2 * l < n; ++l) {
      if (!is_crossing_index(l, n)) continue;
      const double w = std::abs(eigenvalue(n - l, {n, hopf_value(l, n), 0.0}).imag());
      CHECK(std::abs(w - omega0(l, n)) < 1e-12);
      CHECK(omega0(l, n) > 0.0);
    }
  }
}

TEST_CASE("first Lyapunov coefficient") {
  CHECK(first_lyapunov_coeff(1, 4) == doctest::Approx(-8.0 / 13.0).epsilon(1e-14));
  // l/n = 1/3 excluded as an index but the closed form vanishes there.
  const double y = 2.0 * kPi / 3.0;
  CHECK(std::abs(std::sin(1.5 * y)) < 1e-15);

  SUBCASE("agrees with the invariant formula evaluated by dense linear algebra") {
    for (int n = 4; n <= 40; ++n) {
      for (int l = 1; 2 * l < n; ++l) {
        if (!is_crossing_index(l, n)) continue;
        const double a = first_lyapunov_coeff(l, n);
        const double b = oracle::ell1_brute_force(l, n);
        CHECK_MESSAGE(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)), "l=" << l << " n=" << n);
      }
    }
  }
  SUBCASE("agrees with the two-part form") {
    for (int n = 4; n <= 60; ++n) {
      for (int l = 1; 2 * l < n; ++l) {
        if (!is_crossing_index(l, n)) continue;
        CHECK(std::abs(first_lyapunov_coeff(l, n) - oracle::ell1_from_parts(l, n)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("critical ratio") {
  CHECK(lyapunov_numerator(0.0) == doctest::Approx(3.0));
  CHECK(lyapunov_numerator(kPi) == doctest::Approx(-3.0));
  CHECK(critical_angle() == doctest::Approx(0.5545380).epsilon(1e-6));
  CHECK(std::abs(critical_ratio() - 0.08825746) < 1e-7);

  // Exactly one sign change of the numerator on (0, pi), at the critical angle.
  int changes = 0;
  double prev = lyapunov_numerator(1e-6);
  for (int i = 1; i <= 100000; ++i) {
    const double cur = lyapunov_numerator(kPi * i / 100000.0 - 1e-9);
    if ((cur > 0) != (prev > 0)) ++changes;
    prev = cur;
  }
  CHECK(changes == 1);
  CHECK(lyapunov_numerator(critical_angle() - 1e-9) > 0);
  CHECK(lyapunov_numerator(critical_angle() + 1e-9) < 0);
}

TEST_CASE("criticality") {
  CHECK(criticality(1, 12) == Criticality::Subcritical);
  CHECK(criticality(1, 4) == Criticality::Supercritical);
  for (int n = 4; n <= 100; ++n) {
    for (int l = 1; 2 * l < n; ++l) {
      if (!is_crossing_index(l, n)) continue;
      const bool sub = criticality(l, n) == Criticality::Subcritical;
      CHECK(sub == (static_cast<double>(l) / n < critical_ratio()));
    }
    const FirstBifurcation first = first_bifurcation_index(n);
    if (!first.is_hopf_hopf()) CHECK(criticality(first.primary(), n) == Criticality::Supercritical);
  }
}

TEST_CASE("Hopf-Hopf condition") {
  CHECK(hopf_hopf_check(2, 3, 12));
  CHECK(hopf_hopf_check(1, 3, 10));
  CHECK_FALSE(hopf_hopf_check(1, 2, 12));
  for (int n = 4; n <= 60; ++n) {
    for (int a = 1; 2 * a < n; ++a) {
      for (int b = 1; 2 * b < n; ++b) CHECK(hopf_hopf_check(a, b, n) == hopf_hopf_check(b, a, n));
    }
  }
}

TEST_CASE("enumeration of bifurcations") {
  SUBCASE("n = 4") {
    const auto recs = enumerate_bifurcations(4);
    REQUIRE(recs.size() == 1);
    const auto& h = std::get<HopfPoint>(recs[0]);
    CHECK(h.l == 1);
    CHECK(h.F_H == 1.0);
  }
  SUBCASE("n = 12") {
    const auto recs = enumerate_bifurcations(12);
    bool hh = false, l1 = false;
    for (const auto& r : recs) {
      if (const auto* p = std::get_if<HopfHopfPoint>(&r)) {
        hh = hh || (p->l1 == 2 && p->l2 == 3 && std::abs(p->F_HH - 1.0) < 1e-12);
      } else {
        const auto& h = std::get<HopfPoint>(r);
        l1 = l1 || (h.l == 1 && std::abs(h.F_H - 2.732051) < 1e-6);
      }
    }
    CHECK(hh);
    CHECK(l1);
  }
  SUBCASE("n = 10") {
    bool hh = false;
    for (const auto& r : enumerate_bifurcations(10)) {
      if (const auto* p = std::get_if<HopfHopfPoint>(&r)) hh = hh || (p->l1 == 1 && p->l2 == 3 && std::abs(p->F_HH - 2.0) < 1e-12);
    }
    CHECK(hh);
  }
  SUBCASE("ordering and counting") {
    for (int n = 4; n <= 120; ++n) {
      const auto recs = enumerate_bifurcations(n);
      int slots = 0;
      std::set<int> seen;
      for (const auto& r : recs) {
        if (const auto* p = std::get_if<HopfHopfPoint>(&r)) {
          slots += 2;
          CHECK(hopf_hopf_check(p->l1, p->l2, n));
          seen.insert(p->l1);
          seen.insert(p->l2);
        } else {
          slots += 1;
          seen.insert(std::get<HopfPoint>(r).l);
        }
      }
      const int expected = static_cast<int>(std::ceil(n / 2.0 - 1.0)) - (n % 3 == 0 ? 1 : 0);
      CHECK(slots == expected);
      CHECK(static_cast<int>(seen.size()) == expected);
      bool negatives = false;
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const double v = bifurcation_value(recs[i]);
        if (v < 0) negatives = true;
        CHECK_FALSE((negatives && v > 0));
        if (i > 0 && (v > 0) == (bifurcation_value(recs[i - 1]) > 0)) CHECK(v >= bifurcation_value(recs[i - 1]));
      }
    }
  }
  CHECK_THROWS_AS(enumerate_bifurcations(3), UnsupportedDimension);
}

TEST_CASE("first bifurcation index") {
  CHECK(first_bifurcation_index(7).indices == std::vector<int>{1});
  CHECK(first_bifurcation_index(36).indices == std::vector<int>{8});
  CHECK(first_bifurcation_index(12).indices == std::vector<int>{2, 3});
  CHECK(first_bifurcation_index(12).is_hopf_hopf());
  for (int n = 4; n <= 200; ++n) {
    if (n == 7) continue;
    const int l = first_bifurcation_index(n).primary();
    CHECK(6 * l >= n);
    CHECK(4 * l <= n);
  }
  CHECK(200.0 / first_bifurcation_index(200).primary() == doctest::Approx(4.767).epsilon(0.05 / 4.767));
}

TEST_CASE("asymptotic limits") {
  const auto a = asymptotic_limits();
  CHECK(std::abs(a.period - 4.867) <= 1e-3);
  CHECK(std::abs(a.ratio - 4.767) <= 1e-3);
  // 2 pi l1(n) / n approaches arccos(1/4), with |error| bounded by about pi/n.
  for (int n = 4; n <= 200; ++n) {
    const double angle = 2.0 * kPi * first_bifurcation_index(n).primary() / n;
    if (n != 7) CHECK(std::abs(angle - std::acos(0.25)) <= 2.0 * kPi / n);
  }
  CHECK(onset_period(1, 4) == doctest::Approx(2.0 * kPi));
}

TEST_CASE("Hopf lines") {
  for (double F : {0.3, 1.0, 2.5, -1.2}) {
    CHECK(hopf_line(2, 12, F) == doctest::Approx(F - 1.0));
    CHECK(hopf_line(3, 12, F) == doctest::Approx((F - 1.0) / 2.0));
  }
  CHECK_THROWS_AS(hopf_line(2, 12, 0.0), ExcludedParameter);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> N(5, 40);
  std::uniform_real_distribution<double> U(0.2, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = N(rng);
    std::uniform_int_distribution<int> L(1, (n - 1) / 2);
    const int l = L(rng);
    if (!is_crossing_index(l, n)) continue;
    const double F = U(rng);
    CHECK(std::abs(eigenvalue(l, {n, F, hopf_line(l, n, F)}).real()) < 1e-12);
  }
}

TEST_CASE("NS tangent slopes") {
  const auto s = ns_tangent_slopes(n12_normal_form());
  CHECK(std::abs(s.slope2 - -0.3477) <= 1e-3);
  CHECK(std::abs(s.slope3 - 0.2265) <= 1e-3);
  NormalFormCoefficients zero;
  const auto z = ns_tangent_slopes(zero);
  CHECK(z.slope2 == 0.5);
  CHECK(z.slope3 == 1.0);
  NormalFormCoefficients other = n12_normal_form();
  other.Theta = 5.0;
  other.Delta = -3.0;
  CHECK(ns_tangent_slopes(other).slope2 == s.slope2);
  CHECK(ns_tangent_slopes(other).slope3 == s.slope3);
  NormalFormCoefficients bad;
  bad.delta = 2.0;
  CHECK_THROWS_AS(ns_tangent_slopes(bad), DegenerateUnfolding);
  bad.delta = 0.0;
  bad.theta = 0.5;
  CHECK_THROWS_AS(ns_tangent_slopes(bad), DegenerateUnfolding);
  bad.theta = 0.0;
  bad.sigma = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
