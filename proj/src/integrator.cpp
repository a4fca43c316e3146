#include "l96/integrator.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

#include "l96/errors.hpp"

namespace l96 {

void IntegrationSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(transient >= 0.0)) throw InvalidArgument("transient must be >= 0");
  if (!(t_end > transient)) throw InvalidArgument("t_end must exceed the transient");
  if (sample_every < 1) throw InvalidArgument("sample_every must be >= 1");
}

std::vector<double> Trajectory::coordinate(int j) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s[j]);
  return out;
}

void tangent_product(const SystemConfig& cfg, std::span<const double> x,
                     std::span<const double> v, std::span<double> out) {
  const int n = cfg.n;
  const double G = cfg.G;
  if (n == 1) {
    out[0] = -v[0];
    return;
  }
  for (int j = 0; j < n; ++j) {
    const int im1 = j == 0 ? n - 1 : j - 1;
    const int ip1 = j == n - 1 ? 0 : j + 1;
    const int im2 = j >= 2 ? j - 2 : j - 2 + n;
    out[j] = v[im1] * (x[ip1] - x[im2]) + x[im1] * (v[ip1] - v[im2]) - v[j] +
             G * (v[im1] - 2.0 * v[j] + v[ip1]);
  }
}

double divergence_limit(const SystemConfig& cfg, const StateVec& x0) {
  if (cfg.G <= -0.25) return std::numeric_limits<double>::infinity();
  return 10.0 * std::max({trapping_radius(cfg), x0.norm(), 1.0});
}

void check_divergence(const StateVec& x, double limit, double t) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j]) || std::abs(x[j]) > limit) {
      std::ostringstream msg;
      msg << "trajectory diverged at t = " << t << " (|x_" << j << "| = " << std::abs(x[j])
          << ", limit " << limit << ")";
      throw Divergence(msg.str());
    }
  }
}

namespace {

std::span<const double> cspan(const StateVec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> mspan(StateVec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

Rk4Stepper::Rk4Stepper(const SystemConfig& cfg, int frame_columns) : cfg_(cfg) {
  cfg_.validate();
  const int n = cfg_.n;
  for (StateVec* v : {&k1_, &k2_, &k3_, &k4_, &tmp_}) v->resize(n);
  if (frame_columns > 0) {
    for (Eigen::MatrixXd* m : {&K1_, &K2_, &K3_, &K4_, &Qtmp_}) m->resize(n, frame_columns);
  }
}

void Rk4Stepper::step(StateVec& x, double dt) {
  const double h2 = 0.5 * dt;
  vector_field(cfg_, cspan(x), mspan(k1_));
  tmp_ = x + h2 * k1_;
  vector_field(cfg_, cspan(tmp_), mspan(k2_));
  tmp_ = x + h2 * k2_;
  vector_field(cfg_, cspan(tmp_), mspan(k3_));
  tmp_ = x + dt * k3_;
  vector_field(cfg_, cspan(tmp_), mspan(k4_));
  x += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

void Rk4Stepper::frame_rhs(const StateVec& x, const Eigen::MatrixXd& frame, Eigen::MatrixXd& out) {
  const auto n = static_cast<std::size_t>(cfg_.n);
  for (Eigen::Index c = 0; c < frame.cols(); ++c) {
    tangent_product(cfg_, cspan(x), {frame.col(c).data(), n}, {out.col(c).data(), n});
  }
}

void Rk4Stepper::step(StateVec& x, Eigen::MatrixXd& frame, double dt) {
  if (K1_.cols() != frame.cols() || K1_.rows() != frame.rows()) {
    for (Eigen::MatrixXd* m : {&K1_, &K2_, &K3_, &K4_, &Qtmp_}) m->resize(frame.rows(), frame.cols());
  }
  const double h2 = 0.5 * dt;
  vector_field(cfg_, cspan(x), mspan(k1_));
  frame_rhs(x, frame, K1_);

  tmp_ = x + h2 * k1_;
  Qtmp_ = frame + h2 * K1_;
  vector_field(cfg_, cspan(tmp_), mspan(k2_));
  frame_rhs(tmp_, Qtmp_, K2_);

  tmp_ = x + h2 * k2_;
  Qtmp_ = frame + h2 * K2_;
  vector_field(cfg_, cspan(tmp_), mspan(k3_));
  frame_rhs(tmp_, Qtmp_, K3_);

  tmp_ = x + dt * k3_;
  Qtmp_ = frame + dt * K3_;
  vector_field(cfg_, cspan(tmp_), mspan(k4_));
  frame_rhs(tmp_, Qtmp_, K4_);

  x += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  frame += (dt / 6.0) * (K1_ + 2.0 * K2_ + 2.0 * K3_ + K4_);
}

StateVec rk4_step(const SystemConfig& cfg, const StateVec& x, double dt) {
  cfg.validate();
  if (x.size() != cfg.n) throw InvalidArgument("state length does not match n");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  Rk4Stepper stepper(cfg);
  StateVec y = x;
  stepper.step(y, dt);
  check_divergence(y, std::numeric_limits<double>::infinity(), dt);
  return y;
}

namespace {

struct StepPlan {
  long long total;
  long long first_sample;
};

StepPlan plan_steps(const IntegrationSpec& spec) {
  const auto total = static_cast<long long>(std::llround(spec.t_end / spec.dt));
  const auto first = static_cast<long long>(std::ceil(spec.transient / spec.dt - 1e-9));
  return {total, first};
}

void record(Trajectory& traj, const SystemConfig& cfg, double t, const StateVec& x) {
  traj.times.push_back(t);
  traj.states.push_back(x);
  StateVec dx(cfg.n);
  vector_field(cfg, cspan(x), mspan(dx));
  traj.derivatives.push_back(std::move(dx));
}

template <typename StepFn>
Trajectory run(const SystemConfig& cfg, const StateVec& x0, const IntegrationSpec& spec,
               StepFn&& advance) {
  cfg.validate();
  spec.validate();
  if (x0.size() != cfg.n) throw InvalidArgument("initial state length does not match n");
  const double limit = divergence_limit(cfg, x0);
  const StepPlan plan = plan_steps(spec);
  Trajectory traj;
  const auto n_samples = plan.total >= plan.first_sample
                             ? (plan.total - plan.first_sample) / spec.sample_every + 1
                             : 0;
  traj.times.reserve(static_cast<std::size_t>(n_samples));
  traj.states.reserve(static_cast<std::size_t>(n_samples));
  traj.derivatives.reserve(static_cast<std::size_t>(n_samples));

  StateVec x = x0;
  for (long long i = 0;; ++i) {
    if (i >= plan.first_sample && (i - plan.first_sample) % spec.sample_every == 0) {
      record(traj, cfg, static_cast<double>(i) * spec.dt, x);
    }
    if (i == plan.total) break;
    advance(i, x);
    check_divergence(x, limit, static_cast<double>(i + 1) * spec.dt);
  }
  return traj;
}

}  // namespace

Trajectory integrate(const SystemConfig& cfg, const StateVec& x0, const IntegrationSpec& spec) {
  Rk4Stepper stepper(cfg);
  return run(cfg, x0, spec, [&](long long, StateVec& x) { stepper.step(x, spec.dt); });
}

Trajectory integrate_with_tangent(const SystemConfig& cfg, const StateVec& x0,
                                  const Eigen::MatrixXd& Q0, const IntegrationSpec& spec,
                                  double checkpoint_interval, const FrameHook& hook) {
  if (Q0.rows() != cfg.n || Q0.cols() < 1 || Q0.cols() > cfg.n) {
    throw InvalidArgument("tangent frame must be n x k with 1 <= k <= n");
  }
  const Eigen::MatrixXd gram = Q0.transpose() * Q0;
  if (!gram.isApprox(Eigen::MatrixXd::Identity(Q0.cols(), Q0.cols()), 1e-10)) {
    throw InvalidArgument("tangent frame columns must be orthonormal");
  }
  if (!(checkpoint_interval > 0.0)) throw InvalidArgument("checkpoint interval must be positive");
  const auto stride = std::max<long long>(1, std::llround(checkpoint_interval / spec.dt));
  Rk4Stepper stepper(cfg, static_cast<int>(Q0.cols()));
  Eigen::MatrixXd frame = Q0;
  return run(cfg, x0, spec, [&](long long i, StateVec& x) {
    stepper.step(x, frame, spec.dt);
    if ((i + 1) % stride == 0 && hook) hook(static_cast<double>(i + 1) * spec.dt, x, frame);
  });
}

}  // namespace l96
