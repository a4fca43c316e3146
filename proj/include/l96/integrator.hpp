#pragma once

// Fixed-step classical RK4 for the Lorenz-96 family, optionally co-stepping
// a frame of tangent vectors through the variational equation dQ/dt = J(x) Q.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "l96/model.hpp"

namespace l96 {

struct IntegrationSpec {
  double dt = 1.0 / 64.0;
  double t_end = 1000.0;
  double transient = 500.0;
  int sample_every = 1;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVec> states;
  // dx/dt at each sample; used for Hermite interpolation of section crossings.
  std::vector<StateVec> derivatives;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  // Series of one coordinate across all samples.
  std::vector<double> coordinate(int j) const;
};

// out = J(x) v without forming J.
void tangent_product(const SystemConfig& cfg, std::span<const double> x,
                     std::span<const double> v, std::span<double> out);

// Magnitude bound used by the divergence guard for a run started at x0.
double divergence_limit(const SystemConfig& cfg, const StateVec& x0);

// Reusable RK4 workspace; stepping is allocation-free after construction.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(const SystemConfig& cfg, int frame_columns = 0);

  const SystemConfig& config() const { return cfg_; }

  void step(StateVec& x, double dt);
  void step(StateVec& x, Eigen::MatrixXd& frame, double dt);

 private:
  void frame_rhs(const StateVec& x, const Eigen::MatrixXd& frame, Eigen::MatrixXd& out);

  SystemConfig cfg_;
  StateVec k1_, k2_, k3_, k4_, tmp_;
  Eigen::MatrixXd K1_, K2_, K3_, K4_, Qtmp_;
};

StateVec rk4_step(const SystemConfig& cfg, const StateVec& x, double dt);

// Throws Divergence if any entry is non-finite or exceeds `limit` in magnitude.
void check_divergence(const StateVec& x, double limit, double t);

Trajectory integrate(const SystemConfig& cfg, const StateVec& x0, const IntegrationSpec& spec);

// Called every `checkpoint_interval` time units (transient included) with the
// current time, state and frame; the hook may rewrite the frame in place.
using FrameHook = std::function<void(double t, const StateVec& x, Eigen::MatrixXd& frame)>;

Trajectory integrate_with_tangent(const SystemConfig& cfg, const StateVec& x0,
                                  const Eigen::MatrixXd& Q0, const IntegrationSpec& spec,
                                  double checkpoint_interval, const FrameHook& hook);

}  // namespace l96
