#pragma once

/// @file engine.hpp
/// @brief Fixed-step executor for a graph of scalar signal blocks.
///
/// Every tick runs two passes over the blocks in topological order:
///   1. output(): blocks publish their outputs for step k. Inputs marked
///      feedthrough are already valid for step k when a block runs.
///   2. update(): blocks advance internal state from step k to k+1.
/// Only feedthrough input ports create ordering constraints, so a state
/// feedback loop (plant -> sensor -> controller -> plant) is legal while
/// a loop of feedthrough ports is rejected as an algebraic loop.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace faultbench {

using Rng = std::mt19937_64;

class SimError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class WiringError : public SimError {
public:
  using SimError::SimError;
};

class AlgebraicLoop : public SimError {
public:
  explicit AlgebraicLoop(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const { return cycle_; }

private:
  std::vector<std::string> cycle_;
};

class NumericalDivergence : public SimError {
public:
  NumericalDivergence(double t, std::string block, std::string signal);
  double time() const { return t_; }
  const std::string& block() const { return block_; }
  const std::string& signal() const { return signal_; }

private:
  double t_;
  std::string block_;
  std::string signal_;
};

struct SimClock {
  double dt{1e-3};
  double t_end{0.0};

  std::size_t steps() const;
  double time_at(std::size_t step) const { return static_cast<double>(step) * dt; }
};

struct Signal {
  double value{0.0};
  bool valid{false};
};

enum class PortKind { Signal, Trigger };

struct InputPort {
  std::string name;
  PortKind kind{PortKind::Signal};
  /// Read during output(); creates an ordering edge from the source block.
  bool feedthrough{true};
  /// Unconnected optional ports read as 0 / false.
  bool optional{false};
};

struct OutputPort {
  std::string name;
  PortKind kind{PortKind::Signal};
};

struct Tick {
  std::size_t step{0};
  double t{0.0};
  double dt{0.0};
};

/// View of one block's resolved ports inside the shared signal store.
class BlockIO {
public:
  BlockIO(std::span<const std::ptrdiff_t> inputs, std::span<const std::size_t> outputs,
          std::vector<Signal>& store)
      : inputs_(inputs), outputs_(outputs), store_(store) {}

  double in(std::size_t port) const;
  bool trigger(std::size_t port) const { return in(port) != 0.0; }
  bool connected(std::size_t port) const { return inputs_[port] >= 0; }
  void out(std::size_t port, double value);
  void out_trigger(std::size_t port, bool value) { out(port, value ? 1.0 : 0.0); }

private:
  std::span<const std::ptrdiff_t> inputs_;
  std::span<const std::size_t> outputs_;
  std::vector<Signal>& store_;
};

class Block {
public:
  explicit Block(std::string name) : name_(std::move(name)) {}
  virtual ~Block() = default;
  Block(const Block&) = delete;
  Block& operator=(const Block&) = delete;

  const std::string& name() const { return name_; }

  virtual std::vector<InputPort> inputs() const = 0;
  virtual std::vector<OutputPort> outputs() const = 0;

  /// Return to the initial condition; called at the start of every run.
  virtual void reset() {}
  virtual void output(BlockIO& io, const Tick& tick, Rng& rng) = 0;
  virtual void update(BlockIO& /*io*/, const Tick& /*tick*/, Rng& /*rng*/) {}

private:
  std::string name_;
};

/// Column-major per-step record of the monitored signals.
struct TraceLog {
  std::vector<std::string> names;
  std::vector<double> time;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return time.size(); }
  /// Throws std::out_of_range for unknown names.
  std::span<const double> column(std::string_view name) const;

  void write_csv(std::ostream& os) const;
  static TraceLog read_csv(std::istream& is);
  bool operator==(const TraceLog&) const = default;
};

class BlockGraph {
public:
  /// Block names must be unique and must not contain '.'.
  Block& add(std::unique_ptr<Block> block);

  /// Connects a qualified output "block.port" to a qualified input.
  void connect(std::string_view source, std::string_view sink);

  /// Resolves wiring and computes the evaluation order. Throws WiringError
  /// or AlgebraicLoop. Must be called before run().
  void finalize();

  /// Signals recorded by run(); empty selects every output signal.
  void set_monitored(std::vector<std::string> names);

  bool finalized() const { return finalized_; }
  std::size_t size() const { return blocks_.size(); }
  const Block& block(std::size_t index) const { return *blocks_[index]; }
  Block& block(std::size_t index) { return *blocks_[index]; }
  Block* find(std::string_view name);
  const Block* find(std::string_view name) const;

  template <typename T> T& get(std::string_view name) {
    auto* typed = dynamic_cast<T*>(find(name));
    if (typed == nullptr) throw std::out_of_range("no block of requested type: " + std::string(name));
    return *typed;
  }

  /// Evaluation order as block indices.
  std::span<const std::size_t> order() const { return order_; }
  /// Qualified names of every output signal, in declaration order.
  const std::vector<std::string>& signal_names() const { return signal_names_; }
  bool has_signal(std::string_view qualified) const;

private:
  friend TraceLog run(BlockGraph& graph, const SimClock& clock, std::uint64_t seed);

  struct Node {
    std::vector<InputPort> inputs;
    std::vector<OutputPort> outputs;
    std::vector<std::ptrdiff_t> input_signal;  // -1 when unconnected
    std::vector<std::size_t> output_signal;
  };
  struct Connection {
    std::string source;
    std::string sink;
  };

  std::vector<std::unique_ptr<Block>> blocks_;
  std::vector<Node> nodes_;
  std::vector<Connection> connections_;
  std::vector<std::string> signal_names_;
  std::vector<PortKind> signal_kinds_;
  std::vector<std::size_t> signal_owner_;
  std::vector<std::string> monitored_;
  std::vector<std::size_t> monitored_ids_;
  std::vector<std::size_t> order_;
  bool finalized_{false};
};

/// Executes round(t_end/dt) steps from a fresh reset. Deterministic in
/// (graph, clock, seed). Throws NumericalDivergence on a non-finite output.
TraceLog run(BlockGraph& graph, const SimClock& clock, std::uint64_t seed);

/// Formats a value the way every CSV writer in the project does ("%.9g").
std::string format_number(double value);

}  // namespace faultbench
