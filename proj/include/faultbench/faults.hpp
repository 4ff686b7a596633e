#pragma once

/// @file faults.hpp
/// @brief Per-signal fault injector block.
///
/// An injector sits on one scalar signal. While Armed it passes the input
/// through unchanged and evaluates its fault event once per step. When the
/// event fires (or its trigger input is high) it becomes Active for an
/// exposure window drawn from the fault effect, corrupts the signal
/// according to the fault type and raises its trigger output so that a
/// downstream injector can be activated in the same step.

#include "faultbench/engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace faultbench {

// Fault types -------------------------------------------------------------

/// Holds the last value seen before activation.
struct StuckAt {};
/// Replaces the value, e.g. 0.0 for a frozen / dropped sensor packet.
struct PackageDrop {
  double replacement{0.0};
};
struct Bias {
  double offset{0.0};
};
/// Adds uniform noise on +/- boundary_pct percent of |input|.
struct Noise {
  double boundary_pct{0.0};
};
struct TimeDelay {
  double delay{0.0};
};
/// Inverts bits of the IEEE-754 binary64 value (0 = LSB of the mantissa,
/// 63 = sign). With no explicit positions, n_bits distinct bits are drawn
/// from [random_lo, random_hi] once per activation.
struct BitFlip {
  int n_bits{1};
  std::vector<int> positions;
  int random_lo{0};
  int random_hi{63};
};

using FaultType = std::variant<StuckAt, PackageDrop, Bias, Noise, TimeDelay, BitFlip>;

// Fault events ------------------------------------------------------------

struct FailureProbability {
  double p{0.0};
};
struct MeanTimeToFailure {
  double mttf{1.0};
  double sigma{0.0};
};

using FaultEvent = std::variant<FailureProbability, MeanTimeToFailure>;

// Fault effects -----------------------------------------------------------

struct Once {};
struct ConstantTime {
  double duration{0.0};
};
struct InfiniteTime {};
struct MeanTimeToRepair {
  double mttr{1.0};
  double sigma{0.0};
};

using FaultEffect = std::variant<Once, ConstantTime, InfiniteTime, MeanTimeToRepair>;

struct FaultSpec {
  std::string name;
  std::string target_signal;
  FaultType fault_type{StuckAt{}};
  FaultEvent event{FailureProbability{}};
  FaultEffect effect{Once{}};
  bool enabled{true};
  std::optional<std::string> chain_to;
};

const char* fault_type_name(const FaultType& type);
const char* fault_event_name(const FaultEvent& event);
const char* fault_effect_name(const FaultEffect& effect);

/// Configuration problems of a single spec at step size dt; empty if valid.
std::vector<std::string> check_fault_spec(const FaultSpec& spec, double dt);

// Runtime -----------------------------------------------------------------

enum class InjectorPhase { Armed, Active, Expired };

struct Exposure {
  enum class Kind { OneStep, Finite, UntilEnd };
  Kind kind{Kind::OneStep};
  double seconds{0.0};

  /// Window length in steps; UntilEnd maps to the largest representable count.
  std::int64_t steps(double dt) const;
};

struct InjectorState {
  InjectorPhase phase{InjectorPhase::Armed};
  double held_value{0.0};
  bool has_held{false};
  /// Ring of the last ceil(delay/dt) inputs (TimeDelay only).
  std::vector<double> delay_buffer;
  std::size_t ring_head{0};
  double activation_t{0.0};
  /// Scheduled end of the current window; +inf for InfiniteTime.
  double deactivation_t{0.0};
  std::int64_t remaining_steps{0};
  std::int64_t active_steps{0};
  /// Next MTTF firing time; NaN until scheduled.
  double next_event_t;
  std::uint64_t flip_mask{0};
  bool trigger_out{false};

  InjectorState();
};

struct InjectorOutput {
  double value{0.0};
  bool trigger_out{false};
};

/// Sets up a fresh Armed state sized for the spec.
InjectorState initial_state(const FaultSpec& spec, double dt);

/// One execution of the injector at time t. Draws from rng only while
/// enabled, and only for the event test, noise and random bit selection.
InjectorOutput injector_step(const FaultSpec& spec, InjectorState& state, double input, double t,
                             double dt, bool trigger_in, Rng& rng);

/// t_now + max(dt, X), X ~ Normal(mttf, sigma^2).
double sample_activation_time(const MeanTimeToFailure& event, double t_now, double dt, Rng& rng);

/// MTTR windows are truncated below at dt like MTTF times.
Exposure sample_exposure(const FaultEffect& effect, double dt, Rng& rng);

std::uint64_t flip_bits(std::uint64_t bits, std::uint64_t mask);
double apply_bit_mask(double value, std::uint64_t mask);
std::uint64_t mask_from_positions(const std::vector<int>& positions);

struct Activation {
  double t_on{0.0};
  /// Time of the last faulty sample.
  double t_off{0.0};
  std::int64_t samples{0};
};

/// Graph block wrapping injector_step. Ports: in "in" (signal), optional
/// "trigger_in"; out "out" (signal), "trigger" (trigger).
class InjectorBlock final : public Block {
public:
  InjectorBlock(FaultSpec spec, double dt);

  const FaultSpec& spec() const { return spec_; }
  void set_enabled(bool enabled) { spec_.enabled = enabled; }
  const InjectorState& state() const { return state_; }
  const std::vector<Activation>& activations() const { return activations_; }

  std::vector<InputPort> inputs() const override;
  std::vector<OutputPort> outputs() const override;
  void reset() override;
  void output(BlockIO& io, const Tick& tick, Rng& rng) override;

private:
  FaultSpec spec_;
  double dt_;
  InjectorState state_;
  std::vector<Activation> activations_;
};

}  // namespace faultbench
