#pragma once

/// @file dmp.hpp
/// @brief Discrete dynamic movement primitives sharing one canonical phase.
///
/// Transformation system per joint (explicit Euler):
///   tau * zdot = alpha_z * (beta_z * (g - y) - z) + f(s)
///   tau * ydot = z
/// Canonical system: tau * sdot = -alpha_s * s, integrated exactly.
/// Forcing term: f(s) = (sum psi_i(s) w_i / sum psi_i(s)) * s * (g - y0),
/// psi_i(s) = exp(-h_i (s - c_i)^2).

#include <span>
#include <string>
#include <vector>

namespace faultbench {

struct BasisFunction {
  double center{0.0};
  double width{1.0};
  double weight{0.0};
};

struct DmpParams {
  double alpha_z{25.0};
  double beta_z{25.0 / 4.0};
  double tau{1.0};
  double goal{0.0};
  /// y0 used for the forcing-term amplitude.
  double start{0.0};
  double alpha_s{4.6};
  std::vector<BasisFunction> basis;
};

struct DmpState {
  double y{0.0};
  double z{0.0};
};

struct DmpTargets {
  double y{0.0};
  double yd{0.0};
  double ydd{0.0};
};

/// Centers exponentially spaced in phase (linearly in time over [0, tau])
/// and widths h_i = width_scale / (c_{i+1} - c_i)^2.
std::vector<BasisFunction> make_basis(std::size_t count, double alpha_s, double width_scale = 4.0);

/// Learned forcing term at phase s.
double forcing(const DmpParams& params, double s);

/// Returns the targets at the current state and advances state by dt.
DmpTargets dmp_step(const DmpParams& params, DmpState& state, double s, double dt);

/// s * exp(-alpha_s * dt / tau).
double canonical_step(double s, double alpha_s, double tau, double dt);

class CanonicalSystem {
public:
  CanonicalSystem(double alpha_s, double tau) : alpha_s_(alpha_s), tau_(tau) {}

  double phase() const { return s_; }
  double alpha_s() const { return alpha_s_; }
  double tau() const { return tau_; }
  void reset() { s_ = 1.0; }
  double step(double dt) { return s_ = canonical_step(s_, alpha_s_, tau_, dt); }

private:
  double alpha_s_;
  double tau_;
  double s_{1.0};
};

enum class LearnStatus { Ok, DegenerateDemo };

/// Locally weighted regression of the basis weights from a uniformly
/// sampled demonstration. Sets start = y.front(), goal = y.back() and
/// overwrites the weights; tau and the basis layout are kept.
/// A demo with g == y0 leaves all weights at zero and reports DegenerateDemo.
LearnStatus learn_weights(std::span<const double> demo, double demo_dt, DmpParams& params);

/// Central finite differences, one-sided at the ends.
std::vector<double> finite_difference(std::span<const double> samples, double dt);

/// Integrates a single DMP from (start, z = 0) for `steps` steps and returns
/// the position at each step (the position before each update).
std::vector<double> replay(const DmpParams& params, double dt, std::size_t steps);

/// A set of joint DMPs driven by one canonical system.
class DmpSystem {
public:
  DmpSystem(std::vector<DmpParams> joints, double alpha_s, double tau);

  std::size_t size() const { return params_.size(); }
  const DmpParams& params(std::size_t joint) const { return params_[joint]; }
  const DmpState& state(std::size_t joint) const { return states_[joint]; }
  double phase() const { return canonical_.phase(); }

  void reset();
  /// Targets of every joint at the current phase, then advances all joints
  /// and the shared phase by dt.
  const std::vector<DmpTargets>& step(double dt);

private:
  std::vector<DmpParams> params_;
  std::vector<DmpState> states_;
  std::vector<DmpTargets> targets_;
  CanonicalSystem canonical_;
};

/// Demonstration trajectories: a time column plus one column per joint.
struct DemoTrajectory {
  std::vector<std::string> joints;
  std::vector<double> time;
  std::vector<std::vector<double>> positions;

  double dt() const;
  double duration() const { return time.back() - time.front(); }
  /// Throws std::out_of_range for an unknown joint.
  std::span<const double> joint(const std::string& name) const;
};

/// Loads "t,<joint>,..." CSV in seconds and radians; requires >= 3 samples
/// at a uniform step.
DemoTrajectory load_demo_csv(const std::string& path);

}  // namespace faultbench
