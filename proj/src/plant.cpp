#include "faultbench/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace faultbench {

double rpm_to_rad_s(double rpm) { return rpm * (2.0 * kPi / 60.0); }
double rad_s_to_rpm(double rad_s) { return rad_s * (60.0 / (2.0 * kPi)); }
double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

double joint_power(double torque, double speed_rpm) { return torque * (2.0 * kPi / 60.0) * speed_rpm; }

const std::vector<std::string>& joint_names() {
  static const std::vector<std::string> names{"hip_l", "knee_l", "ankle_l", "hip_r", "knee_r", "ankle_r"};
  return names;
}

JointParams default_joint(const std::string& name) {
  JointParams joint;
  joint.name = name;
  joint.damping = 0.5;
  const auto kind = name.substr(0, name.find('_'));
  const bool sided = name.size() == kind.size() + 2 && (name.back() == 'l' || name.back() == 'r');
  if (kind == "hip" && sided) {
    joint.inertia = 1.2;
    joint.max_torque = 72.9;
    joint.max_speed_rpm = 23.4;
    joint.rot_min = deg_to_rad(-30.0);
    joint.rot_max = deg_to_rad(90.0);
  } else if (kind == "knee" && sided) {
    joint.inertia = 0.8;
    joint.max_torque = 54.9;
    joint.max_speed_rpm = 65.2;
    joint.rot_min = deg_to_rad(-90.0);
    joint.rot_max = deg_to_rad(0.0);
  } else if (kind == "ankle" && sided) {
    joint.inertia = 0.4;
    joint.max_torque = 128.7;
    joint.max_speed_rpm = 50.8;
    joint.rot_min = deg_to_rad(-30.0);
    joint.rot_max = deg_to_rad(30.0);
  } else {
    throw std::invalid_argument("unknown joint '" + name + "'");
  }
  return joint;
}

TorqueCommand dynamic_control(const JointParams& joint, const DmpTargets& target, double theta_measured,
                              double omega_measured, const ControlGains& gains) {
  const double demand = joint.inertia * target.ydd + gains.kp * (target.y - theta_measured) +
                        gains.kd * (target.yd - omega_measured);
  return {demand, std::clamp(demand, -joint.max_torque, joint.max_torque)};
}

JointState joint_step(const JointParams& joint, const JointState& state, double tau, double dt) {
  JointState next;
  next.tau_applied = tau;
  next.omega = state.omega + (tau - joint.damping * state.omega) / joint.inertia * dt;
  next.theta = state.theta + next.omega * dt;
  return next;
}

const char* violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::TorqueError:
      return "TorqueError";
    case ViolationKind::SpeedError:
      return "SpeedError";
    case ViolationKind::AngleFailure:
      return "AngleFailure";
  }
  return "?";
}

ViolationKind parse_violation_kind(const std::string& text) {
  if (text == "TorqueError") return ViolationKind::TorqueError;
  if (text == "SpeedError") return ViolationKind::SpeedError;
  if (text == "AngleFailure") return ViolationKind::AngleFailure;
  throw std::invalid_argument("unknown violation kind '" + text + "'");
}

void monitor(std::span<const JointParams> joints, std::span<const JointState> states,
             std::span<const double> tau, double t, std::vector<ViolationRecord>& out) {
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const auto& joint = joints[j];
    if (std::abs(tau[j]) > joint.max_torque) out.push_back({t, joint.name, ViolationKind::TorqueError, tau[j]});
    if (std::abs(states[j].omega) > rpm_to_rad_s(joint.max_speed_rpm)) {
      out.push_back({t, joint.name, ViolationKind::SpeedError, states[j].omega});
    }
    if (states[j].theta < joint.rot_min || states[j].theta > joint.rot_max) {
      out.push_back({t, joint.name, ViolationKind::AngleFailure, states[j].theta});
    }
  }
}

// PlantBlock --------------------------------------------------------------

PlantBlock::PlantBlock(std::string name, std::vector<JointParams> joints, std::vector<JointState> initial)
    : Block(std::move(name)), joints_(std::move(joints)), initial_(std::move(initial)), states_(initial_) {
  if (initial_.size() != joints_.size()) throw std::invalid_argument("plant: one initial state per joint");
}

std::vector<InputPort> PlantBlock::inputs() const {
  std::vector<InputPort> ports;
  for (const auto& joint : joints_) ports.push_back({"tau_" + joint.name, PortKind::Signal, false, false});
  return ports;
}

std::vector<OutputPort> PlantBlock::outputs() const {
  std::vector<OutputPort> ports;
  for (const auto& joint : joints_) ports.push_back({"theta_" + joint.name});
  for (const auto& joint : joints_) ports.push_back({"omega_" + joint.name});
  return ports;
}

void PlantBlock::reset() { states_ = initial_; }

void PlantBlock::output(BlockIO& io, const Tick&, Rng&) {
  const auto n = joints_.size();
  for (std::size_t j = 0; j < n; ++j) {
    io.out(j, states_[j].theta);
    io.out(n + j, states_[j].omega);
  }
}

void PlantBlock::update(BlockIO& io, const Tick& tick, Rng&) {
  for (std::size_t j = 0; j < joints_.size(); ++j) {
    states_[j] = joint_step(joints_[j], states_[j], io.in(j), tick.dt);
  }
}

// ControllerBlock ---------------------------------------------------------

ControllerBlock::ControllerBlock(std::string name, std::vector<JointParams> joints, DmpSystem dmp,
                                 ControlGains gains)
    : Block(std::move(name)), joints_(std::move(joints)), dmp_(std::move(dmp)), gains_(gains) {
  if (dmp_.size() != joints_.size()) throw std::invalid_argument("controller: one DMP per joint");
}

std::vector<InputPort> ControllerBlock::inputs() const {
  std::vector<InputPort> ports;
  for (const auto& joint : joints_) ports.push_back({"theta_" + joint.name});
  for (const auto& joint : joints_) ports.push_back({"omega_" + joint.name});
  return ports;
}

std::vector<OutputPort> ControllerBlock::outputs() const {
  std::vector<OutputPort> ports;
  for (const char* prefix : {"y_ref_", "yd_ref_", "ydd_ref_", "tau_cmd_", "tau_"}) {
    for (const auto& joint : joints_) ports.push_back({prefix + joint.name});
  }
  return ports;
}

void ControllerBlock::reset() { dmp_.reset(); }

void ControllerBlock::output(BlockIO& io, const Tick& tick, Rng&) {
  // The DMP does not depend on the inputs, so it is advanced here rather
  // than in update(); the targets returned are those of step k.
  const auto& targets = dmp_.step(tick.dt);
  const auto n = joints_.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto command = dynamic_control(joints_[j], targets[j], io.in(j), io.in(n + j), gains_);
    io.out(j, targets[j].y);
    io.out(n + j, targets[j].yd);
    io.out(2 * n + j, targets[j].ydd);
    io.out(3 * n + j, command.demand);
    io.out(4 * n + j, command.applied);
  }
}

// MonitorBlock ------------------------------------------------------------

MonitorBlock::MonitorBlock(std::string name, std::vector<JointParams> joints)
    : Block(std::move(name)),
      joints_(std::move(joints)),
      scratch_states_(joints_.size()),
      scratch_tau_(joints_.size()) {}

std::vector<InputPort> MonitorBlock::inputs() const {
  std::vector<InputPort> ports;
  for (const char* prefix : {"theta_", "omega_", "tau_cmd_"}) {
    for (const auto& joint : joints_) ports.push_back({prefix + joint.name});
  }
  return ports;
}

void MonitorBlock::output(BlockIO& io, const Tick& tick, Rng&) {
  const auto n = joints_.size();
  for (std::size_t j = 0; j < n; ++j) {
    scratch_states_[j].theta = io.in(j);
    scratch_states_[j].omega = io.in(n + j);
    scratch_tau_[j] = io.in(2 * n + j);
  }
  monitor(joints_, scratch_states_, scratch_tau_, tick.t, violations_);
}

}  // namespace faultbench
