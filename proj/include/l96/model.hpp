#pragma once

// Lorenz-96 ring with optional Laplacian diffusion:
//
//   dx_j/dt = x_{j-1} (x_{j+1} - x_{j-2}) - x_j + G (x_{j-1} - 2 x_j + x_{j+1}) + F
//
// with cyclic indices. Indices are 0-based everywhere in this library; the
// 1-based sector numbering x_1..x_n maps to x[0]..x[n-1].

#include <span>

#include <Eigen/Dense>

namespace l96 {

using StateVec = Eigen::VectorXd;

struct SystemConfig {
  int n = 4;
  double F = 0.0;
  double G = 0.0;

  void validate() const;
};

inline int wrap_index(int j, int n) {
  const int r = j % n;
  return r < 0 ? r + n : r;
}

// Raw kernel used by the integrators. `x` and `out` must both have length n
// and must not alias.
void vector_field(const SystemConfig& cfg, std::span<const double> x,
                  std::span<double> out);

StateVec vector_field(const SystemConfig& cfg, const StateVec& x);

Eigen::MatrixXd jacobian(const SystemConfig& cfg, const StateVec& x);

StateVec equilibrium(const SystemConfig& cfg);

double energy(const StateVec& x);

// Largest eigenvalue of the symmetric circulant formed by the linear part,
// -1 - 2G (1 - cos(2 pi j / n)) maximised over j.
double linear_part_max_eigenvalue(int n, double G);

// Radius beyond which the energy strictly decreases. Throws
// NoTrappingGuarantee for G <= -1/4.
double trapping_radius(const SystemConfig& cfg);

// Cyclic shift (sigma x)_j = x_{j-1}.
StateVec cyclic_shift(const StateVec& x, int by = 1);

}  // namespace l96
