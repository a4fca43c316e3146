#include "l96/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "l96/errors.hpp"

namespace l96 {

void SystemConfig::validate() const {
  if (n < 1) throw InvalidArgument("dimension n must be >= 1, got " + std::to_string(n));
  if (!std::isfinite(F) || !std::isfinite(G)) throw InvalidArgument("F and G must be finite");
}

namespace {

void check_length(const SystemConfig& cfg, Eigen::Index len) {
  if (len != cfg.n) {
    throw InvalidArgument("state has length " + std::to_string(len) + " but n = " +
                          std::to_string(cfg.n));
  }
}

}  // namespace

void vector_field(const SystemConfig& cfg, std::span<const double> x, std::span<double> out) {
  const int n = cfg.n;
  const double F = cfg.F;
  const double G = cfg.G;
  if (n == 1) {
    out[0] = -x[0] + F;
    return;
  }
  for (int j = 0; j < n; ++j) {
    const int im1 = j == 0 ? n - 1 : j - 1;
    const int ip1 = j == n - 1 ? 0 : j + 1;
    const int im2 = j >= 2 ? j - 2 : j - 2 + n;
    out[j] = x[im1] * (x[ip1] - x[im2]) - x[j] + G * (x[im1] - 2.0 * x[j] + x[ip1]) + F;
  }
}

StateVec vector_field(const SystemConfig& cfg, const StateVec& x) {
  cfg.validate();
  check_length(cfg, x.size());
  StateVec out(cfg.n);
  vector_field(cfg, std::span<const double>(x.data(), x.size()),
               std::span<double>(out.data(), out.size()));
  return out;
}

Eigen::MatrixXd jacobian(const SystemConfig& cfg, const StateVec& x) {
  cfg.validate();
  check_length(cfg, x.size());
  const int n = cfg.n;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  // Accumulate so that coinciding wrapped indices (n < 4) add up correctly.
  for (int j = 0; j < n; ++j) {
    const int im1 = wrap_index(j - 1, n);
    const int ip1 = wrap_index(j + 1, n);
    const int im2 = wrap_index(j - 2, n);
    J(j, im1) += x[ip1] - x[im2];
    J(j, ip1) += x[im1];
    J(j, im2) -= x[im1];
    J(j, j) -= 1.0;
    J(j, im1) += cfg.G;
    J(j, j) -= 2.0 * cfg.G;
    J(j, ip1) += cfg.G;
  }
  return J;
}

StateVec equilibrium(const SystemConfig& cfg) {
  cfg.validate();
  return StateVec::Constant(cfg.n, cfg.F);
}

double energy(const StateVec& x) { return 0.5 * x.squaredNorm(); }

double linear_part_max_eigenvalue(int n, double G) {
  double best = -1.0;  // j = 0
  for (int j = 1; j < n; ++j) {
    const double lam = -1.0 - 2.0 * G * (1.0 - std::cos(2.0 * std::numbers::pi * j / n));
    if (lam > best) best = lam;
  }
  return best;
}

double trapping_radius(const SystemConfig& cfg) {
  cfg.validate();
  if (cfg.G <= -0.25) {
    throw NoTrappingGuarantee("no trapping region is guaranteed for G <= -1/4 (G = " +
                              std::to_string(cfg.G) + ")");
  }
  const double lam_max = linear_part_max_eigenvalue(cfg.n, cfg.G);
  return -std::sqrt(static_cast<double>(cfg.n)) * std::abs(cfg.F) / lam_max;
}

StateVec cyclic_shift(const StateVec& x, int by) {
  const int n = static_cast<int>(x.size());
  StateVec out(n);
  for (int j = 0; j < n; ++j) out[wrap_index(j + by, n)] = x[j];
  return out;
}

}  // namespace l96
