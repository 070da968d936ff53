#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bmu/error.hpp"
#include "bmu/graph_io.hpp"
#include "bmu/network_stats.hpp"
#include "bmu/synaptic_kernel.hpp"

namespace bmu {

using NeuronId = std::size_t;

enum class GateStatus { Closed, Open };

// Normally-closed switch on a synapse output.
struct Gate {
  GateStatus status = GateStatus::Closed;
  bool open() const { return status == GateStatus::Open; }
};

// Holds Q(s, a) for one action and the kernel time constant encoding gamma.
struct Synapse {
  double q_value = 0.0;
  double tau = 0.0;
  std::optional<NeuronId> target;
  Gate gate;
};

// One discretized state. V is kept equal to the max synaptic Q.
struct Neuron {
  NeuronId id = 0;
  std::string state_key;
  double value = 0.0;
  int fan_in = 0;
  std::vector<Synapse> synapses;
};

struct Edge {
  NeuronId source = 0;
  int action = 0;
  NeuronId target = 0;
};

struct Selection {
  int action = 0;
  std::vector<double> frequencies;  // max(0, c * Q_j), telemetry only
};

struct BellmanResult {
  double q_value = 0.0;
  double value = 0.0;
};

// Index of the largest element, lowest index on ties.
inline int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(values.size()); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

// Evolving directed graph of neurons, synapses and gates. Each neuron owns
// one synapse per action; a synapse points at the neuron its action led to
// most recently. Neurons and edges are only ever added, never removed.
class SynapticGraph {
 public:
  SynapticGraph(int actions, double gamma) : actions_(actions), tau_(gamma_to_tau(gamma)) {
    if (actions < 1) throw DomainError("a synaptic graph needs at least one action");
  }

  int actions() const { return actions_; }
  double tau() const { return tau_; }

  NeuronId spawn_neuron(const std::string& state_key, std::span<const double> initial_q = {}) {
    if (index_.contains(state_key)) {
      throw PreconditionError("neuron for state '" + state_key + "' already exists");
    }
    if (!initial_q.empty() && initial_q.size() != static_cast<std::size_t>(actions_)) {
      throw PreconditionError("initial Q vector length must equal the action count");
    }
    Neuron n;
    n.id = neurons_.size();
    n.state_key = state_key;
    n.synapses.resize(actions_);
    for (int j = 0; j < actions_; ++j) {
      n.synapses[j].tau = tau_;
      n.synapses[j].q_value = initial_q.empty() ? 0.0 : initial_q[j];
      require_finite(n.synapses[j].q_value, "initial Q");
    }
    n.value = max_q(n);
    index_.emplace(state_key, n.id);
    neurons_.push_back(std::move(n));
    return neurons_.back().id;
  }

  std::optional<NeuronId> find(const std::string& state_key) const {
    const auto it = index_.find(state_key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Neuron& neuron(NeuronId id) const { return neurons_.at(id); }
  const std::vector<Neuron>& population() const { return neurons_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t neuron_count() const { return neurons_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Spike-frequency action selection: opens the gate of argmax_j Q_j.
  Selection forward_select(NeuronId id, double gain) {
    Neuron& n = neurons_.at(id);
    require_all_closed(n);
    Selection sel;
    sel.frequencies.reserve(actions_);
    std::vector<double> q(actions_);
    for (int j = 0; j < actions_; ++j) {
      q[j] = n.synapses[j].q_value;
      sel.frequencies.push_back(std::max(0.0, gain * q[j]));
    }
    sel.action = argmax_lowest(q);
    n.synapses[sel.action].gate.status = GateStatus::Open;
    return sel;
  }

  // Opens an externally chosen gate (exploration or replayed transitions).
  void open_gate(NeuronId id, int action) {
    Neuron& n = neurons_.at(id);
    require_all_closed(n);
    check_action(action);
    n.synapses[action].gate.status = GateStatus::Open;
  }

  void connect(NeuronId source, int action, NeuronId target) {
    check_action(action);
    if (target >= neurons_.size()) throw PreconditionError("connect: unknown target neuron");
    Synapse& syn = neurons_.at(source).synapses[action];
    if (!syn.gate.open()) {
      throw PreconditionError("connect: gate " + std::to_string(action) + " of neuron '" +
                              neurons_[source].state_key + "' is closed");
    }
    if (syn.target == target) return;
    if (syn.target) {
      --neurons_[*syn.target].fan_in;
      edges_[edge_index_.at(edge_slot(source, action))].target = target;
    } else {
      edge_index_.emplace(edge_slot(source, action), edges_.size());
      edges_.push_back({source, action, target});
    }
    syn.target = target;
    ++neurons_[target].fan_in;
  }

  // Q_j += alpha * (-Q_j + r + gamma * V_next); V = max_j Q_j; gates close.
  BellmanResult bellman_update(NeuronId id, int action, double reward, double next_value,
                               double alpha, double gamma) {
    require_finite(reward, "reward");
    require_finite(next_value, "next-state value");
    require_finite(alpha, "learning rate");
    require_finite(gamma, "discount factor");
    check_action(action);
    Neuron& n = neurons_.at(id);
    Synapse& syn = n.synapses[action];
    if (!syn.gate.open()) {
      throw PreconditionError("bellman_update: gate " + std::to_string(action) + " is closed");
    }
    syn.q_value += alpha * (-syn.q_value + reward + gamma * next_value);
    n.value = max_q(n);
    for (auto& s : n.synapses) s.gate.status = GateStatus::Closed;
    return {syn.q_value, n.value};
  }

  void close_gates(NeuronId id) {
    for (auto& s : neurons_.at(id).synapses) s.gate.status = GateStatus::Closed;
  }

  NetworkStats stats() const {
    NetworkStats st;
    st.neurons = neurons_.size();
    st.edges = edges_.size();
    st.parameter_count = parameter_count(st.neurons, actions_);
    if (st.neurons == 0) {
      st.avg_fan_in = 0.0;
    } else {
      std::size_t total = 0;
      for (const auto& n : neurons_) total += static_cast<std::size_t>(n.fan_in);
      st.avg_fan_in = static_cast<double>(total) / static_cast<double>(st.neurons);
    }
    return st;
  }

  GraphSnapshot snapshot() const {
    GraphSnapshot g;
    g.nodes.reserve(neurons_.size());
    for (const auto& n : neurons_) g.nodes.push_back({n.state_key, n.value, n.fan_in});
    for (const auto& e : edges_) {
      const Neuron& src = neurons_[e.source];
      std::vector<double> q;
      for (const auto& s : src.synapses) q.push_back(s.q_value);
      g.edges.push_back({src.state_key, neurons_[e.target].state_key, e.action,
                         src.synapses[e.action].q_value, src.synapses[e.action].gate.open(),
                         argmax_lowest(q) == e.action});
    }
    return g;
  }

  std::string serialize() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& n : neurons_) {
      os << n.state_key << ' ' << n.value << ' ' << n.fan_in;
      for (const auto& s : n.synapses) {
        os << ' ' << s.q_value << ' ' << (s.target ? static_cast<long long>(*s.target) : -1LL)
           << ' ' << s.gate.open();
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  static double max_q(const Neuron& n) {
    double best = n.synapses.front().q_value;
    for (const auto& s : n.synapses) best = std::max(best, s.q_value);
    return best;
  }

  void check_action(int action) const {
    if (action < 0 || action >= actions_) {
      throw PreconditionError("action index " + std::to_string(action) + " out of range");
    }
  }

  void require_all_closed(const Neuron& n) const {
    for (const auto& s : n.synapses) {
      if (s.gate.open()) {
        throw PreconditionError("neuron '" + n.state_key + "' already has an open gate");
      }
    }
  }

  std::size_t edge_slot(NeuronId source, int action) const {
    return source * static_cast<std::size_t>(actions_) + static_cast<std::size_t>(action);
  }

  int actions_;
  double tau_;
  std::vector<Neuron> neurons_;
  std::unordered_map<std::string, NeuronId> index_;
  std::vector<Edge> edges_;
  std::unordered_map<std::size_t, std::size_t> edge_index_;
};

}  // namespace bmu
