#include "faultbench/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace faultbench {

namespace {

std::string join_cycle(const std::vector<std::string>& cycle) {
  std::string text;
  for (const auto& name : cycle) {
    if (!text.empty()) text += " -> ";
    text += name;
  }
  return text;
}

std::pair<std::string_view, std::string_view> split_qualified(std::string_view qualified) {
  const auto dot = qualified.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == qualified.size()) {
    throw WiringError("signal name must be <block>.<port>: " + std::string(qualified));
  }
  return {qualified.substr(0, dot), qualified.substr(dot + 1)};
}

}  // namespace

AlgebraicLoop::AlgebraicLoop(std::vector<std::string> cycle)
    : SimError("algebraic loop among feedthrough ports: " + join_cycle(cycle)),
      cycle_(std::move(cycle)) {}

NumericalDivergence::NumericalDivergence(double t, std::string block, std::string signal)
    : SimError("non-finite value on " + signal + " from block '" + block +
               "' at t=" + format_number(t)),
      t_(t),
      block_(std::move(block)),
      signal_(std::move(signal)) {}

std::size_t SimClock::steps() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw SimError("clock dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw SimError("clock t_end must be >= 0");
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

double BlockIO::in(std::size_t port) const {
  const auto id = inputs_[port];
  return id < 0 ? 0.0 : store_[static_cast<std::size_t>(id)].value;
}

void BlockIO::out(std::size_t port, double value) {
  auto& signal = store_[outputs_[port]];
  signal.value = value;
  signal.valid = true;
}

std::span<const double> TraceLog::column(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("trace has no signal " + std::string(name));
  return columns[static_cast<std::size_t>(it - names.begin())];
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

void TraceLog::write_csv(std::ostream& os) const {
  os << 't';
  for (const auto& name : names) os << ',' << name;
  os << '\n';
  for (std::size_t row = 0; row < time.size(); ++row) {
    os << format_number(time[row]);
    for (const auto& column : columns) os << ',' << format_number(column[row]);
    os << '\n';
  }
}

TraceLog TraceLog::read_csv(std::istream& is) {
  TraceLog log;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trace CSV: missing header");
  std::stringstream header(line);
  std::string cell;
  std::getline(header, cell, ',');
  if (cell != "t") throw std::runtime_error("trace CSV: first column must be 't'");
  while (std::getline(header, cell, ',')) log.names.push_back(cell);
  log.columns.resize(log.names.size());

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::size_t column = 0;
    while (std::getline(row, cell, ',')) {
      const double value = std::stod(cell);
      if (column == 0) {
        log.time.push_back(value);
      } else if (column <= log.columns.size()) {
        log.columns[column - 1].push_back(value);
      } else {
        throw std::runtime_error("trace CSV: too many cells in row " + std::to_string(log.time.size()));
      }
      ++column;
    }
    if (column != log.columns.size() + 1) {
      throw std::runtime_error("trace CSV: short row " + std::to_string(log.time.size()));
    }
  }
  return log;
}

Block& BlockGraph::add(std::unique_ptr<Block> block) {
  if (block->name().empty() || block->name().find('.') != std::string::npos) {
    throw WiringError("invalid block name '" + block->name() + "'");
  }
  if (find(block->name()) != nullptr) throw WiringError("duplicate block name '" + block->name() + "'");
  finalized_ = false;
  blocks_.push_back(std::move(block));
  return *blocks_.back();
}

void BlockGraph::connect(std::string_view source, std::string_view sink) {
  finalized_ = false;
  connections_.push_back({std::string(source), std::string(sink)});
}

void BlockGraph::set_monitored(std::vector<std::string> names) {
  monitored_ = std::move(names);
  if (finalized_) finalize();
}

Block* BlockGraph::find(std::string_view name) {
  for (auto& block : blocks_) {
    if (block->name() == name) return block.get();
  }
  return nullptr;
}

const Block* BlockGraph::find(std::string_view name) const {
  return const_cast<BlockGraph*>(this)->find(name);
}

bool BlockGraph::has_signal(std::string_view qualified) const {
  return std::find(signal_names_.begin(), signal_names_.end(), qualified) != signal_names_.end();
}

void BlockGraph::finalize() {
  nodes_.assign(blocks_.size(), {});
  signal_names_.clear();
  signal_kinds_.clear();
  signal_owner_.clear();

  std::unordered_map<std::string, std::size_t> signal_ids;
  std::unordered_map<std::string, std::size_t> block_ids;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    block_ids.emplace(blocks_[b]->name(), b);
    auto& node = nodes_[b];
    node.inputs = blocks_[b]->inputs();
    node.outputs = blocks_[b]->outputs();
    node.input_signal.assign(node.inputs.size(), -1);
    for (const auto& port : node.outputs) {
      auto qualified = blocks_[b]->name() + "." + port.name;
      if (signal_ids.count(qualified) != 0) throw WiringError("duplicate output port " + qualified);
      signal_ids.emplace(qualified, signal_names_.size());
      node.output_signal.push_back(signal_names_.size());
      signal_names_.push_back(std::move(qualified));
      signal_kinds_.push_back(port.kind);
      signal_owner_.push_back(b);
    }
  }

  // deps[b] = blocks whose outputs b reads through a feedthrough port
  std::vector<std::vector<std::size_t>> deps(blocks_.size());
  for (const auto& connection : connections_) {
    const auto source = signal_ids.find(connection.source);
    if (source == signal_ids.end()) throw WiringError("unknown source signal " + connection.source);
    const auto [sink_block, sink_port] = split_qualified(connection.sink);
    const auto block_it = block_ids.find(std::string(sink_block));
    if (block_it == block_ids.end()) throw WiringError("unknown sink block in " + connection.sink);
    auto& node = nodes_[block_it->second];
    const auto port_it = std::find_if(node.inputs.begin(), node.inputs.end(),
                                      [&](const InputPort& p) { return p.name == sink_port; });
    if (port_it == node.inputs.end()) throw WiringError("unknown sink port " + connection.sink);
    const auto port = static_cast<std::size_t>(port_it - node.inputs.begin());
    if (node.input_signal[port] >= 0) throw WiringError("sink port has two sources: " + connection.sink);
    if (port_it->kind != signal_kinds_[source->second]) {
      throw WiringError("port kind mismatch: " + connection.source + " -> " + connection.sink);
    }
    node.input_signal[port] = static_cast<std::ptrdiff_t>(source->second);
    if (port_it->feedthrough) deps[block_it->second].push_back(signal_owner_[source->second]);
  }

  for (std::size_t b = 0; b < nodes_.size(); ++b) {
    for (std::size_t p = 0; p < nodes_[b].inputs.size(); ++p) {
      if (nodes_[b].input_signal[p] < 0 && !nodes_[b].inputs[p].optional) {
        throw WiringError("dangling input port " + blocks_[b]->name() + "." + nodes_[b].inputs[p].name);
      }
    }
  }

  // Kahn's algorithm; declaration index breaks ties.
  std::vector<std::vector<std::size_t>> dependents(blocks_.size());
  std::vector<std::size_t> pending(blocks_.size(), 0);
  for (std::size_t b = 0; b < deps.size(); ++b) {
    for (const auto d : deps[b]) {
      if (d == b) throw AlgebraicLoop({blocks_[b]->name(), blocks_[b]->name()});
      dependents[d].push_back(b);
      ++pending[b];
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t b = 0; b < pending.size(); ++b) {
    if (pending[b] == 0) ready.push(b);
  }
  order_.clear();
  while (!ready.empty()) {
    const auto b = ready.top();
    ready.pop();
    order_.push_back(b);
    for (const auto d : dependents[b]) {
      if (--pending[d] == 0) ready.push(d);
    }
  }

  if (order_.size() != blocks_.size()) {
    // Walk dependencies from any unscheduled block until a block repeats.
    std::size_t current = 0;
    while (pending[current] == 0) ++current;
    std::vector<std::size_t> path;
    std::vector<int> seen(blocks_.size(), -1);
    while (seen[current] < 0) {
      seen[current] = static_cast<int>(path.size());
      path.push_back(current);
      current = *std::find_if(deps[current].begin(), deps[current].end(),
                              [&](std::size_t d) { return pending[d] != 0; });
    }
    std::vector<std::string> cycle;
    for (auto i = static_cast<std::size_t>(seen[current]); i < path.size(); ++i) {
      cycle.push_back(blocks_[path[i]]->name());
    }
    std::reverse(cycle.begin(), cycle.end());
    cycle.push_back(cycle.front());
    throw AlgebraicLoop(std::move(cycle));
  }

  monitored_ids_.clear();
  if (monitored_.empty()) {
    for (std::size_t id = 0; id < signal_names_.size(); ++id) monitored_ids_.push_back(id);
  } else {
    for (const auto& name : monitored_) {
      const auto it = signal_ids.find(name);
      if (it == signal_ids.end()) throw WiringError("monitored signal does not exist: " + name);
      monitored_ids_.push_back(it->second);
    }
  }
  finalized_ = true;
}

TraceLog run(BlockGraph& graph, const SimClock& clock, std::uint64_t seed) {
  if (!graph.finalized()) graph.finalize();
  const auto steps = clock.steps();

  TraceLog log;
  for (const auto id : graph.monitored_ids_) log.names.push_back(graph.signal_names_[id]);
  log.columns.assign(log.names.size(), {});
  log.time.reserve(steps);
  for (auto& column : log.columns) column.reserve(steps);

  std::vector<Signal> store(graph.signal_names_.size());
  std::vector<BlockIO> io;
  io.reserve(graph.blocks_.size());
  for (std::size_t b = 0; b < graph.blocks_.size(); ++b) {
    graph.blocks_[b]->reset();
    io.emplace_back(graph.nodes_[b].input_signal, graph.nodes_[b].output_signal, store);
  }

  Rng rng(seed);
  for (std::size_t k = 0; k < steps; ++k) {
    const Tick tick{k, clock.time_at(k), clock.dt};
    for (const auto b : graph.order_) {
      graph.blocks_[b]->output(io[b], tick, rng);
      for (const auto id : graph.nodes_[b].output_signal) {
        if (!std::isfinite(store[id].value)) {
          throw NumericalDivergence(tick.t, graph.blocks_[b]->name(), graph.signal_names_[id]);
        }
      }
    }
    log.time.push_back(tick.t);
    for (std::size_t c = 0; c < graph.monitored_ids_.size(); ++c) {
      log.columns[c].push_back(store[graph.monitored_ids_[c]].value);
    }
    for (const auto b : graph.order_) graph.blocks_[b]->update(io[b], tick, rng);
  }
  return log;
}

}  // namespace faultbench
