#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "faultbench/dmp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace faultbench;

namespace {

DmpParams unforced(double y0, double g, double tau) {
  DmpParams p;
  p.tau = tau;
  p.start = y0;
  p.goal = g;
  p.basis = make_basis(50, p.alpha_s);
  return p;
}

std::vector<double> min_jerk(double y0, double g, double duration, double dt) {
  const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = static_cast<double>(k) * dt / duration;
    y[k] = y0 + (g - y0) * x * x * x * (10 - 15 * x + 6 * x * x);
  }
  return y;
}

double rms_diff(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum / static_cast<double>(n));
}

/// Demo sampled at demo_dt, resampled at dt by linear interpolation.
std::vector<double> resample(std::span<const double> demo, double demo_dt, double dt, std::size_t steps) {
  std::vector<double> out(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double x = static_cast<double>(k) * dt / demo_dt;
    const auto i = std::min(static_cast<std::size_t>(x), demo.size() - 2);
    const double f = x - static_cast<double>(i);
    out[k] = demo[i] * (1 - f) + demo[i + 1] * f;
  }
  return out;
}

}  // namespace

TEST_CASE("canonical phase decays exactly") {
  CHECK(canonical_step(1.0, 4.6, 1.0, 0.0) == 1.0);
  CHECK(canonical_step(1.0, 2.0, 1.0, 0.5) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  const double tau = 1.7;
  const double t = tau * std::log(100.0) / 4.6;
  CHECK(canonical_step(1.0, 4.6, tau, t) == doctest::Approx(0.01).epsilon(1e-12));

  CanonicalSystem cs(4.6, 2.0);
  double previous = cs.phase();
  for (int k = 0; k < 5000; ++k) {
    const double s = cs.step(1e-3);
    REQUIRE(s < previous);
    REQUIRE(s > 0.0);
    previous = s;
  }
  CHECK(cs.phase() == doctest::Approx(std::exp(-4.6 * 5.0 / 2.0)).epsilon(1e-9));
}

TEST_CASE("basis layout") {
  const auto basis = make_basis(50, 4.6, 4.0);
  REQUIRE(basis.size() == 50);
  CHECK(basis.front().center == 1.0);
  CHECK(basis.back().center == doctest::Approx(std::exp(-4.6)));
  for (std::size_t i = 0; i + 1 < basis.size(); ++i) {
    CHECK(basis[i].center > basis[i + 1].center);
    const double spacing = basis[i].center - basis[i + 1].center;
    CHECK(basis[i].width == doctest::Approx(4.0 / (spacing * spacing)));
  }
  for (const auto& b : basis) CHECK(b.width > 0.0);
}

TEST_CASE("goal with zero velocity is a fixed point") {
  auto p = unforced(0.3, 0.3, 1.0);
  DmpState state{0.3, 0.0};
  for (int k = 0; k < 1000; ++k) {
    const auto t = dmp_step(p, state, std::exp(-4.6 * k * 1e-3), 1e-3);
    REQUIRE(t.y == 0.3);
    REQUIRE(t.yd == 0.0);
    REQUIRE(t.ydd == 0.0);
  }
}

TEST_CASE("unforced system converges to the goal without ringing") {
  const double dt = 1e-3;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      for (const double tau : {0.5, 1.0, 2.0}) {
        const double y0 = -1.0 + 0.5 * i;
        const double g = -0.8 + 0.45 * j;
        const auto p = unforced(y0, g, tau);
        const double horizon = 10.0 * tau / p.alpha_z * 4.0;
        const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt));
        DmpState state{y0, 0.0};
        int crossings = 0;
        double side = y0 - g;
        for (std::size_t k = 0; k < steps; ++k) {
          dmp_step(p, state, 1.0, dt);
          const double now = state.y - g;
          if (side != 0.0 && now != 0.0 && (now > 0) != (side > 0)) ++crossings;
          if (now != 0.0) side = now;
        }
        CHECK(std::abs(state.y - g) < 1e-3);
        CHECK(crossings <= 1);
      }
    }
  }
}

TEST_CASE("velocity target equals z / tau before every step") {
  auto p = unforced(0.0, 1.0, 1.3);
  const auto demo = min_jerk(0.0, 1.0, 1.3, 1e-3);
  learn_weights(demo, 1e-3, p);
  DmpState state{p.start, 0.0};
  CanonicalSystem cs(p.alpha_s, p.tau);
  for (int k = 0; k < 1300; ++k) {
    const double z = state.z;
    const auto t = dmp_step(p, state, cs.phase(), 1e-3);
    REQUIRE(t.yd == z / p.tau);
    cs.step(1e-3);
  }
}

TEST_CASE("learned minimum-jerk demo replays within 0.01 rad") {
  const double dt = 1e-3;
  const auto demo = min_jerk(0.0, 1.0, 2.0, dt);
  auto p = unforced(0.0, 0.0, 2.0);
  REQUIRE(learn_weights(demo, dt, p) == LearnStatus::Ok);
  CHECK(p.start == 0.0);
  CHECK(p.goal == 1.0);
  const auto y = replay(p, dt, demo.size());
  CHECK(rms_diff(y, demo) < 0.01);
}

TEST_CASE("constant demo is degenerate and replays as a constant") {
  const std::vector<double> demo(500, 0.4);
  auto p = unforced(0.0, 0.0, 0.5);
  for (auto& b : p.basis) b.weight = 3.0;
  CHECK(learn_weights(demo, 1e-3, p) == LearnStatus::DegenerateDemo);
  for (const auto& b : p.basis) CHECK(b.weight == 0.0);
  for (const double y : replay(p, 1e-3, 500)) REQUIRE(y == 0.4);
}

TEST_CASE("doubling tau slows the trajectory down by two") {
  const double dt = 1e-4;
  const auto demo = min_jerk(-0.2, 0.6, 1.0, 1e-3);
  auto fast = unforced(0.0, 0.0, 1.0);
  learn_weights(demo, 1e-3, fast);
  auto slow = fast;
  slow.tau = 2.0;
  const auto steps = static_cast<std::size_t>(std::llround(1.5 / dt));
  const auto y_fast = replay(fast, dt, steps);
  const auto y_slow = replay(slow, dt, 2 * steps);
  double worst = 0.0;
  for (std::size_t k = 0; k < steps; ++k) worst = std::max(worst, std::abs(y_slow[2 * k] - y_fast[k]));
  CHECK(worst < 1e-3);
}

TEST_CASE("forcing term vanishes with the phase and with g == y0") {
  auto p = unforced(0.0, 1.0, 1.0);
  for (auto& b : p.basis) b.weight = 100.0;
  CHECK(forcing(p, 1.0) == doctest::Approx(100.0));
  CHECK(std::abs(forcing(p, 1e-12)) < 1e-9);
  // Far outside every basis the normalised mixture stays finite.
  CHECK(std::isfinite(forcing(p, 1e-300)));
  p.goal = p.start;
  CHECK(forcing(p, 0.5) == 0.0);
}

TEST_CASE("finite differences are exact for a parabola in the interior") {
  std::vector<double> y;
  const double dt = 0.01;
  for (int k = 0; k < 50; ++k) y.push_back(3.0 * (k * dt) * (k * dt));
  const auto d = finite_difference(y, dt);
  for (int k = 1; k < 49; ++k) CHECK(d[static_cast<std::size_t>(k)] == doctest::Approx(6.0 * k * dt).epsilon(1e-9));
}

TEST_CASE("all joints of a system share one phase") {
  const auto demo = min_jerk(0.0, 1.0, 1.0, 1e-3);
  auto a = unforced(0.0, 0.0, 1.0);
  learn_weights(demo, 1e-3, a);
  DmpSystem system({a, a, a}, a.alpha_s, 1.0);
  CanonicalSystem cs(a.alpha_s, 1.0);
  for (int k = 0; k < 1000; ++k) {
    REQUIRE(system.phase() == cs.phase());
    const auto& t = system.step(1e-3);
    cs.step(1e-3);
    REQUIRE(t[0].y == t[1].y);
    REQUIRE(t[1].ydd == t[2].ydd);
  }
  system.reset();
  CHECK(system.phase() == 1.0);
  CHECK(system.state(0).y == 0.0);
}

TEST_CASE("shipped gait demo: replay within 1% of each joint's amplitude") {
  const auto demo = load_demo_csv(FAULTBENCH_DATA_DIR "/gait_demo.csv");
  REQUIRE(demo.joints.size() == 6);
  CHECK(demo.duration() == doctest::Approx(7.0));
  const double dt = 1e-3;
  const auto steps = static_cast<std::size_t>(std::llround(demo.duration() / dt)) + 1;
  for (const auto& name : demo.joints) {
    const auto y = demo.joint(name);
    DmpParams p;
    p.tau = demo.duration();
    p.basis = make_basis(100, p.alpha_s, 4.0);
    REQUIRE(learn_weights(y, demo.dt(), p) == LearnStatus::Ok);
    const auto target = resample(y, demo.dt(), dt, steps);
    const double err = rms_diff(replay(p, dt, steps), target);
    const double amplitude = *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
    INFO(name << " rmse " << err << " amplitude " << amplitude);
    CHECK(err < 0.01 * amplitude);
    CHECK(err < 0.02);
  }
}

TEST_CASE("demo loader rejects malformed files") {
  const auto dir = std::filesystem::temp_directory_path() / "faultbench_dmp_test";
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  CHECK_THROWS(load_demo_csv(write("short.csv", "t,a\n0,1\n0.1,2\n")));
  CHECK_THROWS(load_demo_csv(write("gap.csv", "t,a\n0,1\n0.1,2\n0.3,3\n")));
  CHECK_THROWS(load_demo_csv(write("width.csv", "t,a\n0,1\n0.1,2,4\n0.2,3\n")));
  CHECK_THROWS(load_demo_csv(write("header.csv", "time,a\n0,1\n0.1,2\n0.2,3\n")));
  CHECK_THROWS(load_demo_csv((dir / "missing.csv").string()));
  const auto ok = load_demo_csv(write("ok.csv", "t,a,b\n0,1,4\n0.5,2,5\n1,3,6\n"));
  CHECK(ok.dt() == 0.5);
  CHECK(ok.joint("b")[2] == 6.0);
  CHECK_THROWS_AS(ok.joint("c"), std::out_of_range);
  std::filesystem::remove_all(dir);
}
