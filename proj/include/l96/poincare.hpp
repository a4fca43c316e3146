#pragma once

// Poincare sections, return maps, periodic orbits and their Floquet
// multipliers, and detection of cycle bifurcations along F.

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "l96/integrator.hpp"
#include "l96/model.hpp"

namespace l96 {

enum class CrossingDirection { Up, Down, Both };

// Hyperplane x[coordinate] = level (coordinate is 0-based).
struct Section {
  int coordinate = 0;
  double level = 0.0;
  CrossingDirection direction = CrossingDirection::Up;

  void validate(int n) const;
};

struct Crossing {
  double t;
  StateVec x;
};

// Sign changes of x_k - level between samples, located on the cubic Hermite
// interpolant built from the stored derivatives.
std::vector<Crossing> detect_crossings(const Trajectory& traj, const Section& s);

// Step sequence of one section-to-section flight: `full_steps` steps of dt
// followed by a final partial step `tail`.
struct ReturnLeg {
  long full_steps = 0;
  double dt = 0.0;
  double tail = 0.0;

  double time() const { return static_cast<double>(full_steps) * dt + tail; }
};

class ReturnMap {
 public:
  ReturnMap(const SystemConfig& cfg, const Section& section, double dt, double max_time);

  // Flows x to its next crossing of the section. The crossing state lies on
  // the section to rounding error. Throws NoCycle if none occurs in max_time.
  StateVec next(const StateVec& x, ReturnLeg* leg = nullptr) const;

  const SystemConfig& config() const { return cfg_; }
  const Section& section() const { return section_; }
  double dt() const { return dt_; }

 private:
  double signed_distance(const StateVec& x) const;
  bool crossed(double before, double after) const;

  SystemConfig cfg_;
  Section section_;
  double dt_;
  double max_time_;
};

struct CycleOptions {
  double dt = 1.0 / 64.0;
  int returns = 0;  // 0: smallest m for which the guess closes up
  int max_returns = 8;
  double tolerance = 1e-9;
  int max_iterations = 40;
  double fd_step = 1e-6;
  double max_return_time = 200.0;
};

struct PeriodicOrbit {
  StateVec anchor;
  double period = 0.0;
  int returns = 1;
  // All n multipliers; `trivial` indexes the one along the flow.
  std::vector<std::complex<double>> floquet;
  int trivial = 0;
  std::optional<int> wave_number;
  double residual = 0.0;
  double section_mean = 0.0;  // time mean of the section coordinate over one period

  std::vector<std::complex<double>> nontrivial() const;
  int unstable_count(double tol = 1e-4) const;
  bool stable(double tol = 1e-4) const { return unstable_count(tol) == 0; }
};

// Monodromy matrix of the orbit through `anchor`, integrated over the same
// step sequence as the return map.
Eigen::MatrixXd monodromy(const SystemConfig& cfg, const StateVec& anchor,
                          const std::vector<ReturnLeg>& legs);

PeriodicOrbit find_periodic_orbit(const SystemConfig& cfg, const StateVec& guess,
                                  const Section& section, const CycleOptions& opts = {});

enum class CycleBifurcationKind { Fold, PeriodDoubling, NeimarkSacker };

std::string_view to_string(CycleBifurcationKind k);

// Kind from the argument of the multiplier at the unit circle.
CycleBifurcationKind classify_crossing(std::complex<double> mu);

struct CycleBifurcation {
  CycleBifurcationKind kind;
  double F;
  std::complex<double> multiplier;
};

struct BranchPoint {
  double F = 0.0;
  double period = 0.0;
  bool stable = false;
  int returns = 1;
  std::vector<std::complex<double>> multipliers;  // nontrivial, by |mu| descending
};

struct Branch {
  Section section;
  std::vector<BranchPoint> points;
  std::vector<CycleBifurcation> events;
  bool terminated = false;  // cycle lost before reaching the end of the range
};

struct TrackOptions {
  double step = 1e-2;
  double min_step = 1e-5;
  double bisection_width = 1e-4;
  // Switch to the doubled cycle after a period doubling destabilises the branch.
  bool follow_period_doubling = true;
  double settle_time = 500.0;
  std::optional<Section> section;  // default: x_1 at its time mean, upwards
  CycleOptions cycle;
};

Branch track_cycle_bifurcations(const SystemConfig& tmpl, double F_lo, double F_hi,
                                const TrackOptions& opts = {});

}  // namespace l96
