#pragma once

// Closed-form spectral theory of the circulant Jacobian at the trivial
// equilibrium x_F = (F, ..., F): eigenpairs, Hopf and Hopf-Hopf points,
// the first Lyapunov coefficient and the large-n limits of the first
// travelling wave.

#include <complex>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "l96/model.hpp"

namespace l96 {

struct FG {
  double f;
  double g;
};

// f(l,n) = cos(2 pi l/n) - cos(4 pi l/n),  g(l,n) = -sin(2 pi l/n) - sin(4 pi l/n).
FG f_g(int l, int n);

// kappa_j = -1 - 2G (1 - cos(2 pi j/n)) + F f(j,n) + i F g(j,n).
std::complex<double> eigenvalue(int j, const SystemConfig& cfg);

// (1, rho, rho^2, ..., rho^{n-1}) / sqrt(n) with rho = exp(-2 pi i j/n).
Eigen::VectorXcd eigenvector(int j, int n);

// True when eigenpair l can cross the imaginary axis: 0 < l < n/2, l != n/3.
bool is_crossing_index(int l, int n);

double hopf_value(int l, int n);

// Hopf value of eigenpair l on the unfolded family at diffusion G.
double hopf_value(int l, int n, double G);

struct HopfValueBounds {
  double F_min;
  double F_max;
};

HopfValueBounds hopf_value_bounds(int n);

// Imaginary part at the crossing, cot(pi l/n).
double omega0(int l, int n);

double first_lyapunov_coeff(int l, int n);

// Numerator of the Lyapunov coefficient as a function of y = 2 pi l/n.
double lyapunov_numerator(double y);

// Root y0 of lyapunov_numerator in (0, pi).
double critical_angle();

// y0 / (2 pi): Hopf points with l/n below this ratio are subcritical.
double critical_ratio();

enum class Criticality { Subcritical, Supercritical };

std::string_view to_string(Criticality c);

Criticality criticality(int l, int n);

bool hopf_hopf_check(int l1, int l2, int n);

struct HopfPoint {
  int l = 0;
  int n = 0;
  double F_H = 0.0;
  double omega0 = 0.0;
  double ell1 = 0.0;
  Criticality criticality = Criticality::Supercritical;
};

struct HopfHopfPoint {
  int l1 = 0;
  int l2 = 0;
  int n = 0;
  double F_HH = 0.0;
};

using BifurcationRecord = std::variant<HopfPoint, HopfHopfPoint>;

double bifurcation_value(const BifurcationRecord& r);

// All bifurcations of x_F for dimension n. Positive values first in
// ascending order, then negative values in ascending order.
std::vector<BifurcationRecord> enumerate_bifurcations(int n);

struct FirstBifurcation {
  // One index for a Hopf point; two (ascending) for a Hopf-Hopf point.
  std::vector<int> indices;

  bool is_hopf_hopf() const { return indices.size() > 1; }
  int primary() const { return indices.front(); }
};

FirstBifurcation first_bifurcation_index(int n);

struct AsymptoticLimits {
  double period;        // T_inf = 2 pi tan(arccos(1/4) / 2)
  double ratio;         // lim n / l1(n) = 2 pi / arccos(1/4)
};

AsymptoticLimits asymptotic_limits();

// Travelling-wave period at onset, 2 pi tan(pi l/n).
double onset_period(int l, int n);

// G on the Hopf line of eigenpair l: (F f(l,n) - 1) / (2 (1 - cos(2 pi l/n))).
double hopf_line(int l, int n, double F);

struct NormalFormCoefficients {
  int sigma = 1;
  double theta = 0.0;
  double delta = 0.0;
  double Theta = 0.0;
  double Delta = 0.0;

  void validate() const;
};

// Published Hopf-Hopf normal form coefficients for n = 12 at (F, G) = (1, 0).
NormalFormCoefficients n12_normal_form();

struct NsSlopes {
  double slope2;  // T_2: (1 - delta) / (2 - delta)
  double slope3;  // T_3: (1 - theta) / (1 - 2 theta)
};

NsSlopes ns_tangent_slopes(const NormalFormCoefficients& c);

}  // namespace l96
