#include "faultbench/faults.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace faultbench {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::int64_t kUntilEnd = std::numeric_limits<std::int64_t>::max();

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double truncated_normal(double mean, double sigma, double floor_value, Rng& rng) {
  const double x = sigma > 0.0 ? std::normal_distribution<double>(mean, sigma)(rng) : mean;
  return std::max(floor_value, x);
}

std::size_t delay_steps(double delay, double dt) {
  return static_cast<std::size_t>(std::ceil(delay / dt - 1e-9));
}

bool event_fires(const FaultEvent& event, InjectorState& state, double t, double dt, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const FailureProbability& e) { return uniform01(rng) < e.p; },
          [&](const MeanTimeToFailure& e) {
            if (std::isnan(state.next_event_t)) {
              state.next_event_t = sample_activation_time(e, t, dt, rng);
            }
            return t >= state.next_event_t - 0.5 * dt;
          },
      },
      event);
}

std::uint64_t draw_flip_mask(const BitFlip& flip, Rng& rng) {
  if (!flip.positions.empty()) return mask_from_positions(flip.positions);
  std::vector<int> pool(static_cast<std::size_t>(flip.random_hi - flip.random_lo + 1));
  std::iota(pool.begin(), pool.end(), flip.random_lo);
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(flip.n_bits); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    mask |= std::uint64_t{1} << pool[i];
  }
  return mask;
}

void push_history(InjectorState& state, double input) {
  if (state.delay_buffer.empty()) return;
  state.delay_buffer[state.ring_head] = input;
  state.ring_head = (state.ring_head + 1) % state.delay_buffer.size();
}

}  // namespace

const char* fault_type_name(const FaultType& type) {
  static constexpr const char* names[] = {"StuckAt", "PackageDrop", "Bias", "Noise", "TimeDelay", "BitFlip"};
  return names[type.index()];
}

const char* fault_event_name(const FaultEvent& event) {
  static constexpr const char* names[] = {"FailureProbability", "MeanTimeToFailure"};
  return names[event.index()];
}

const char* fault_effect_name(const FaultEffect& effect) {
  static constexpr const char* names[] = {"Once", "ConstantTime", "InfiniteTime", "MeanTimeToRepair"};
  return names[effect.index()];
}

std::vector<std::string> check_fault_spec(const FaultSpec& spec, double dt) {
  std::vector<std::string> issues;
  const auto where = "injector '" + spec.name + "': ";
  if (spec.name.empty()) issues.push_back("injector with empty name");
  if (spec.target_signal.empty()) issues.push_back(where + "target_signal is empty");
  if (spec.chain_to && *spec.chain_to == spec.name) issues.push_back(where + "chain_to refers to itself");

  std::visit(overloaded{
                 [](const StuckAt&) {},
                 [&](const PackageDrop& f) {
                   if (!std::isfinite(f.replacement)) issues.push_back(where + "replacement must be finite");
                 },
                 [&](const Bias& f) {
                   if (!std::isfinite(f.offset)) issues.push_back(where + "bias offset must be finite");
                 },
                 [&](const Noise& f) {
                   if (!(f.boundary_pct >= 0.0) || !std::isfinite(f.boundary_pct)) {
                     issues.push_back(where + "noise boundary_pct must be >= 0");
                   }
                 },
                 [&](const TimeDelay& f) {
                   if (!(f.delay > 0.0)) {
                     issues.push_back(where + "delay must be > 0");
                   } else if (std::abs(f.delay / dt - std::round(f.delay / dt)) > 1e-6) {
                     issues.push_back(where + "delay must be a multiple of dt");
                   }
                 },
                 [&](const BitFlip& f) {
                   if (f.n_bits < 1 || f.n_bits > 64) issues.push_back(where + "n_bits must be in 1..64");
                   if (!f.positions.empty()) {
                     if (static_cast<int>(f.positions.size()) != f.n_bits) {
                       issues.push_back(where + "bit_positions must list exactly n_bits entries");
                     }
                     auto sorted = f.positions;
                     std::sort(sorted.begin(), sorted.end());
                     if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                       issues.push_back(where + "bit_positions must be distinct");
                     }
                     if (!sorted.empty() && (sorted.front() < 0 || sorted.back() > 63)) {
                       issues.push_back(where + "bit_positions must be in 0..63");
                     }
                   } else if (f.random_lo < 0 || f.random_hi > 63 || f.random_lo > f.random_hi) {
                     issues.push_back(where + "random bit range must satisfy 0 <= lo <= hi <= 63");
                   } else if (f.random_hi - f.random_lo + 1 < f.n_bits) {
                     issues.push_back(where + "random bit range narrower than n_bits");
                   }
                 },
             },
             spec.fault_type);

  std::visit(overloaded{
                 [&](const FailureProbability& e) {
                   if (!(e.p >= 0.0 && e.p <= 1.0)) issues.push_back(where + "failure probability must be in [0, 1]");
                 },
                 [&](const MeanTimeToFailure& e) {
                   if (!(e.mttf > 0.0)) issues.push_back(where + "mttf must be > 0");
                   if (!(e.sigma >= 0.0)) issues.push_back(where + "mttf sigma must be >= 0");
                 },
             },
             spec.event);

  std::visit(overloaded{
                 [](const Once&) {},
                 [](const InfiniteTime&) {},
                 [&](const ConstantTime& e) {
                   if (!(e.duration > 0.0)) issues.push_back(where + "constant-time duration must be > 0");
                 },
                 [&](const MeanTimeToRepair& e) {
                   if (!(e.mttr > 0.0)) issues.push_back(where + "mttr must be > 0");
                   if (!(e.sigma >= 0.0)) issues.push_back(where + "mttr sigma must be >= 0");
                 },
             },
             spec.effect);
  return issues;
}

std::int64_t Exposure::steps(double dt) const {
  switch (kind) {
    case Kind::OneStep:
      return 1;
    case Kind::UntilEnd:
      return kUntilEnd;
    case Kind::Finite:
      break;
  }
  return std::max<std::int64_t>(1, std::llround(seconds / dt));
}

InjectorState::InjectorState() : next_event_t(std::numeric_limits<double>::quiet_NaN()) {}

InjectorState initial_state(const FaultSpec& spec, double dt) {
  InjectorState state;
  if (const auto* delay = std::get_if<TimeDelay>(&spec.fault_type); delay != nullptr && delay->delay > 0.0) {
    state.delay_buffer.assign(std::max<std::size_t>(1, delay_steps(delay->delay, dt)), 0.0);
  }
  return state;
}

double sample_activation_time(const MeanTimeToFailure& event, double t_now, double dt, Rng& rng) {
  return t_now + truncated_normal(event.mttf, event.sigma, dt, rng);
}

Exposure sample_exposure(const FaultEffect& effect, double dt, Rng& rng) {
  return std::visit(overloaded{
                        [](const Once&) { return Exposure{Exposure::Kind::OneStep, 0.0}; },
                        [](const ConstantTime& e) { return Exposure{Exposure::Kind::Finite, e.duration}; },
                        [](const InfiniteTime&) {
                          return Exposure{Exposure::Kind::UntilEnd, std::numeric_limits<double>::infinity()};
                        },
                        [&](const MeanTimeToRepair& e) {
                          return Exposure{Exposure::Kind::Finite, truncated_normal(e.mttr, e.sigma, dt, rng)};
                        },
                    },
                    effect);
}

std::uint64_t flip_bits(std::uint64_t bits, std::uint64_t mask) { return bits ^ mask; }

double apply_bit_mask(double value, std::uint64_t mask) {
  return std::bit_cast<double>(flip_bits(std::bit_cast<std::uint64_t>(value), mask));
}

std::uint64_t mask_from_positions(const std::vector<int>& positions) {
  std::uint64_t mask = 0;
  for (const int bit : positions) mask |= std::uint64_t{1} << bit;
  return mask;
}

InjectorOutput injector_step(const FaultSpec& spec, InjectorState& state, double input, double t,
                             double dt, bool trigger_in, Rng& rng) {
  state.trigger_out = false;
  if (!spec.enabled) return {input, false};

  if (state.phase == InjectorPhase::Expired) {
    push_history(state, input);
    return {input, false};
  }

  if (state.phase == InjectorPhase::Armed) {
    // A high trigger forces activation without consulting the event model.
    const bool fire = trigger_in || event_fires(spec.event, state, t, dt, rng);
    if (!fire) {
      state.held_value = input;
      state.has_held = true;
      push_history(state, input);
      return {input, false};
    }
    if (!state.has_held) {
      state.held_value = input;
      state.has_held = true;
    }
    const auto exposure = sample_exposure(spec.effect, dt, rng);
    state.phase = InjectorPhase::Active;
    state.remaining_steps = exposure.steps(dt);
    state.active_steps = 0;
    state.activation_t = t;
    state.deactivation_t = exposure.kind == Exposure::Kind::UntilEnd
                               ? std::numeric_limits<double>::infinity()
                               : t + static_cast<double>(state.remaining_steps - 1) * dt;
    state.next_event_t = std::numeric_limits<double>::quiet_NaN();
    if (const auto* flip = std::get_if<BitFlip>(&spec.fault_type)) state.flip_mask = draw_flip_mask(*flip, rng);
  }

  const double value = std::visit(
      overloaded{
          [&](const StuckAt&) { return state.held_value; },
          [&](const PackageDrop& f) { return f.replacement; },
          [&](const Bias& f) { return input + f.offset; },
          [&](const Noise& f) {
            const double bound = f.boundary_pct / 100.0 * std::abs(input);
            return input + (2.0 * uniform01(rng) - 1.0) * bound;
          },
          [&](const TimeDelay&) {
            const auto lag = static_cast<std::int64_t>(state.delay_buffer.size());
            return state.active_steps < lag ? state.held_value : state.delay_buffer[state.ring_head];
          },
          [&](const BitFlip&) { return apply_bit_mask(input, state.flip_mask); },
      },
      spec.fault_type);
  push_history(state, input);

  ++state.active_steps;
  if (state.remaining_steps != kUntilEnd) --state.remaining_steps;
  state.trigger_out = true;
  if (state.remaining_steps == 0) {
    const bool repeatable =
        std::holds_alternative<ConstantTime>(spec.effect) || std::holds_alternative<MeanTimeToRepair>(spec.effect);
    state.phase = repeatable ? InjectorPhase::Armed : InjectorPhase::Expired;
  }
  return {value, true};
}

InjectorBlock::InjectorBlock(FaultSpec spec, double dt)
    : Block(spec.name), spec_(std::move(spec)), dt_(dt), state_(initial_state(spec_, dt)) {}

std::vector<InputPort> InjectorBlock::inputs() const {
  return {{"in", PortKind::Signal, true, false}, {"trigger_in", PortKind::Trigger, true, true}};
}

std::vector<OutputPort> InjectorBlock::outputs() const {
  return {{"out", PortKind::Signal}, {"trigger", PortKind::Trigger}};
}

void InjectorBlock::reset() {
  state_ = initial_state(spec_, dt_);
  activations_.clear();
}

void InjectorBlock::output(BlockIO& io, const Tick& tick, Rng& rng) {
  const auto result = injector_step(spec_, state_, io.in(0), tick.t, tick.dt, io.trigger(1), rng);
  if (result.trigger_out) {
    if (state_.active_steps == 1) {
      activations_.push_back({tick.t, tick.t, 1});
    } else {
      activations_.back().t_off = tick.t;
      ++activations_.back().samples;
    }
  }
  io.out(0, result.value);
  io.out_trigger(1, result.trigger_out);
}

}  // namespace faultbench
