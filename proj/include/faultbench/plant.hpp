#pragma once

/// @file plant.hpp
/// @brief Six-joint exoskeleton surrogate, its DMP-driven controller and the
/// joint-limit monitor.
///
/// Each joint is an independent rotational plant I*thetaddot = tau - b*omega.
/// The controller runs one DMP per joint and converts the targets into a
/// computed-torque + PD command saturated at the joint's torque rating.

#include "faultbench/dmp.hpp"
#include "faultbench/engine.hpp"

#include <span>
#include <string>
#include <vector>

namespace faultbench {

inline constexpr double kPi = 3.14159265358979323846;

double rpm_to_rad_s(double rpm);
double rad_s_to_rpm(double rad_s);
double deg_to_rad(double deg);

/// Mechanical power T * (2*pi/60) * n in watts for torque in N*m and speed in rpm.
double joint_power(double torque, double speed_rpm);

struct JointParams {
  std::string name;
  double inertia{1.0};
  double damping{0.5};
  double rot_min{0.0};
  double rot_max{0.0};
  double max_torque{0.0};
  double max_speed_rpm{0.0};
};

/// Joint names accepted in scenarios, in the order of the built-in table.
const std::vector<std::string>& joint_names();

/// Built-in limits for "hip_l", "knee_r", ... Throws std::invalid_argument
/// for an unknown name. Ankle limits use -30..+30 degrees.
JointParams default_joint(const std::string& name);

struct JointState {
  double theta{0.0};
  double omega{0.0};
  double tau_applied{0.0};
};

struct ControlGains {
  double kp{200.0};
  double kd{20.0};
};

struct TorqueCommand {
  /// Unsaturated controller demand.
  double demand{0.0};
  /// Demand clamped to +/- max_torque.
  double applied{0.0};
};

TorqueCommand dynamic_control(const JointParams& joint, const DmpTargets& target, double theta_measured,
                              double omega_measured, const ControlGains& gains);

/// Semi-implicit Euler: omega first, then theta with the new omega. No hard
/// stops; leaving the range of travel is only recorded by the monitor.
JointState joint_step(const JointParams& joint, const JointState& state, double tau, double dt);

enum class ViolationKind { TorqueError, SpeedError, AngleFailure };

const char* violation_kind_name(ViolationKind kind);
ViolationKind parse_violation_kind(const std::string& text);

struct ViolationRecord {
  double t{0.0};
  std::string joint;
  ViolationKind kind{ViolationKind::TorqueError};
  double value{0.0};

  bool operator==(const ViolationRecord&) const = default;
};

/// Appends every limit violation at time t. tau holds controller demands.
void monitor(std::span<const JointParams> joints, std::span<const JointState> states,
             std::span<const double> tau, double t, std::vector<ViolationRecord>& out);

// Blocks ------------------------------------------------------------------

/// Outputs theta_<joint>, omega_<joint> (state); input tau_<joint> is only
/// used to advance the state.
class PlantBlock final : public Block {
public:
  PlantBlock(std::string name, std::vector<JointParams> joints, std::vector<JointState> initial);

  const std::vector<JointParams>& joints() const { return joints_; }
  const std::vector<JointState>& states() const { return states_; }

  std::vector<InputPort> inputs() const override;
  std::vector<OutputPort> outputs() const override;
  void reset() override;
  void output(BlockIO& io, const Tick& tick, Rng& rng) override;
  void update(BlockIO& io, const Tick& tick, Rng& rng) override;

private:
  std::vector<JointParams> joints_;
  std::vector<JointState> initial_;
  std::vector<JointState> states_;
};

/// DMP trajectory generator plus dynamic control. Inputs theta_<joint>,
/// omega_<joint> are the (possibly faulty) measurements. Outputs per joint:
/// y_ref_, yd_ref_, ydd_ref_, tau_cmd_ (demand) and tau_ (applied).
class ControllerBlock final : public Block {
public:
  ControllerBlock(std::string name, std::vector<JointParams> joints, DmpSystem dmp, ControlGains gains);

  const DmpSystem& dmp() const { return dmp_; }
  const ControlGains& gains() const { return gains_; }

  std::vector<InputPort> inputs() const override;
  std::vector<OutputPort> outputs() const override;
  void reset() override;
  void output(BlockIO& io, const Tick& tick, Rng& rng) override;

private:
  std::vector<JointParams> joints_;
  DmpSystem dmp_;
  ControlGains gains_;
};

/// Sink reading true joint state and controller demands; accumulates
/// ViolationRecords.
class MonitorBlock final : public Block {
public:
  MonitorBlock(std::string name, std::vector<JointParams> joints);

  const std::vector<ViolationRecord>& violations() const { return violations_; }

  std::vector<InputPort> inputs() const override;
  std::vector<OutputPort> outputs() const override { return {}; }
  void reset() override { violations_.clear(); }
  void output(BlockIO& io, const Tick& tick, Rng& rng) override;

private:
  std::vector<JointParams> joints_;
  std::vector<JointState> scratch_states_;
  std::vector<double> scratch_tau_;
  std::vector<ViolationRecord> violations_;
};

}  // namespace faultbench
