#include "faultbench/dmp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace faultbench {

std::vector<BasisFunction> make_basis(std::size_t count, double alpha_s, double width_scale) {
  if (count == 0) return {};
  std::vector<BasisFunction> basis(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    basis[i].center = std::exp(-alpha_s * x);
  }
  for (std::size_t i = 0; i < count; ++i) {
    double spacing = 0.0;
    if (count == 1) {
      spacing = 1.0;
    } else if (i + 1 < count) {
      spacing = basis[i].center - basis[i + 1].center;
    } else {
      spacing = basis[i - 1].center - basis[i].center;
    }
    basis[i].width = width_scale / (spacing * spacing);
  }
  return basis;
}

double forcing(const DmpParams& params, double s) {
  const double amplitude = s * (params.goal - params.start);
  if (params.basis.empty() || amplitude == 0.0) return 0.0;
  // Normalise by the smallest exponent so the ratio never underflows.
  double min_exponent = std::numeric_limits<double>::infinity();
  for (const auto& b : params.basis) {
    min_exponent = std::min(min_exponent, b.width * (s - b.center) * (s - b.center));
  }
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& b : params.basis) {
    const double psi = std::exp(min_exponent - b.width * (s - b.center) * (s - b.center));
    weighted += psi * b.weight;
    total += psi;
  }
  return weighted / total * amplitude;
}

DmpTargets dmp_step(const DmpParams& params, DmpState& state, double s, double dt) {
  const double f = forcing(params, s);
  const double zdot = (params.alpha_z * (params.beta_z * (params.goal - state.y) - state.z) + f) / params.tau;
  const double ydot = state.z / params.tau;
  const DmpTargets targets{state.y, ydot, zdot / params.tau};
  state.y += ydot * dt;
  state.z += zdot * dt;
  return targets;
}

double canonical_step(double s, double alpha_s, double tau, double dt) {
  return s * std::exp(-alpha_s * dt / tau);
}

std::vector<double> finite_difference(std::span<const double> samples, double dt) {
  const auto n = samples.size();
  std::vector<double> derivative(n, 0.0);
  if (n < 2) return derivative;
  derivative.front() = (samples[1] - samples[0]) / dt;
  derivative.back() = (samples[n - 1] - samples[n - 2]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) derivative[i] = (samples[i + 1] - samples[i - 1]) / (2.0 * dt);
  return derivative;
}

LearnStatus learn_weights(std::span<const double> demo, double demo_dt, DmpParams& params) {
  if (demo.size() < 3) throw std::invalid_argument("demonstration needs at least 3 samples");
  if (!(demo_dt > 0.0)) throw std::invalid_argument("demonstration dt must be positive");

  params.start = demo.front();
  params.goal = demo.back();
  for (auto& b : params.basis) b.weight = 0.0;
  const double span = params.goal - params.start;
  if (std::abs(span) < 1e-12) return LearnStatus::DegenerateDemo;

  const auto velocity = finite_difference(demo, demo_dt);
  const auto acceleration = finite_difference(velocity, demo_dt);

  std::vector<double> numerator(params.basis.size(), 0.0);
  std::vector<double> denominator(params.basis.size(), 0.0);
  const double tau = params.tau;
  for (std::size_t k = 0; k < demo.size(); ++k) {
    const double s = std::exp(-params.alpha_s * static_cast<double>(k) * demo_dt / tau);
    const double f_target = tau * tau * acceleration[k] -
                            params.alpha_z * (params.beta_z * (params.goal - demo[k]) - tau * velocity[k]);
    const double xi = s * span;
    for (std::size_t i = 0; i < params.basis.size(); ++i) {
      const auto& b = params.basis[i];
      const double psi = std::exp(-b.width * (s - b.center) * (s - b.center));
      numerator[i] += psi * xi * f_target;
      denominator[i] += psi * xi * xi;
    }
  }
  for (std::size_t i = 0; i < params.basis.size(); ++i) {
    params.basis[i].weight = denominator[i] > 0.0 ? numerator[i] / denominator[i] : 0.0;
  }
  return LearnStatus::Ok;
}

std::vector<double> replay(const DmpParams& params, double dt, std::size_t steps) {
  std::vector<double> positions;
  positions.reserve(steps);
  DmpState state{params.start, 0.0};
  CanonicalSystem canonical(params.alpha_s, params.tau);
  for (std::size_t k = 0; k < steps; ++k) {
    positions.push_back(dmp_step(params, state, canonical.phase(), dt).y);
    canonical.step(dt);
  }
  return positions;
}

DmpSystem::DmpSystem(std::vector<DmpParams> joints, double alpha_s, double tau)
    : params_(std::move(joints)), states_(params_.size()), targets_(params_.size()), canonical_(alpha_s, tau) {
  reset();
}

void DmpSystem::reset() {
  canonical_.reset();
  for (std::size_t j = 0; j < params_.size(); ++j) states_[j] = {params_[j].start, 0.0};
}

const std::vector<DmpTargets>& DmpSystem::step(double dt) {
  const double s = canonical_.phase();
  for (std::size_t j = 0; j < params_.size(); ++j) targets_[j] = dmp_step(params_[j], states_[j], s, dt);
  canonical_.step(dt);
  return targets_;
}

double DemoTrajectory::dt() const { return (time.back() - time.front()) / static_cast<double>(time.size() - 1); }

std::span<const double> DemoTrajectory::joint(const std::string& name) const {
  const auto it = std::find(joints.begin(), joints.end(), name);
  if (it == joints.end()) throw std::out_of_range("demonstration has no joint '" + name + "'");
  return positions[static_cast<std::size_t>(it - joints.begin())];
}

DemoTrajectory load_demo_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open demonstration file " + path);
  DemoTrajectory demo;
  std::string line;
  std::string cell;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty demonstration file");
  {
    std::stringstream header(line);
    std::getline(header, cell, ',');
    if (cell != "t") throw std::runtime_error(path + ": first column must be 't'");
    while (std::getline(header, cell, ',')) demo.joints.push_back(cell);
  }
  demo.positions.resize(demo.joints.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != demo.joints.size() + 1) {
      throw std::runtime_error(path + ": row " + std::to_string(demo.time.size() + 2) + " has wrong width");
    }
    demo.time.push_back(values[0]);
    for (std::size_t j = 0; j < demo.joints.size(); ++j) demo.positions[j].push_back(values[j + 1]);
  }
  if (demo.time.size() < 3) throw std::runtime_error(path + ": demonstration needs at least 3 samples");
  const double step = demo.dt();
  if (!(step > 0.0)) throw std::runtime_error(path + ": time must increase");
  for (std::size_t k = 1; k < demo.time.size(); ++k) {
    if (std::abs(demo.time[k] - demo.time[k - 1] - step) > 1e-6 * step + 1e-9) {
      throw std::runtime_error(path + ": non-uniform sample spacing at row " + std::to_string(k + 2));
    }
  }
  return demo;
}

}  // namespace faultbench
