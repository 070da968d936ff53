#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
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
#include "bmu/random.hpp"
#include "bmu/synaptic_graph.hpp"

namespace bmu {

// Bellman memory unit: one ensemble of b neurons over d action dimensions
// per discretized state. Encoder e[j][k] is the storage cell for the Q value
// of action bin j along dimension k.
struct Ensemble {
  std::string state_key;
  int neurons = 0;  // b, action bins
  int dims = 0;     // d, action dimensions
  std::vector<double> encoders;      // b*d, row-major [j][k]
  std::vector<double> gains;         // per neuron
  std::vector<double> biases;        // per neuron
  std::vector<double> action_table;  // b*d discretized action values
  bool input_connected = false;      // wired to the unit-step input node

  double encoder(int j, int k) const { return encoders[static_cast<std::size_t>(j * dims + k)]; }
  double& encoder(int j, int k) { return encoders[static_cast<std::size_t>(j * dims + k)]; }

  // V along dimension k: the largest stored Q.
  double value(int k) const {
    double best = encoder(0, k);
    for (int j = 1; j < neurons; ++j) best = std::max(best, encoder(j, k));
    return best;
  }
};

// Monotone non-decreasing neuron non-linearity G.
using Nonlinearity = std::function<double(double)>;

inline double identity_response(double current) { return current; }

// Firing rate per neuron and dimension: G(gain_j * e[j][k] * x[k] + bias_j).
// For d = 1 this is exactly G(gain * <e, x> + bias).
inline std::vector<double> activity(const Ensemble& ens, std::span<const double> input,
                                    const Nonlinearity& response = identity_response) {
  if (input.size() != static_cast<std::size_t>(ens.dims)) {
    throw PreconditionError("activity: input dimension mismatch");
  }
  std::vector<double> a(ens.encoders.size());
  for (int j = 0; j < ens.neurons; ++j) {
    for (int k = 0; k < ens.dims; ++k) {
      require_finite(input[k], "ensemble input");
      const double current = ens.gains[j] * ens.encoder(j, k) * input[k] + ens.biases[j];
      a[static_cast<std::size_t>(j * ens.dims + k)] = response(current);
    }
  }
  return a;
}

inline std::vector<double> unit_step_input(int dims) { return std::vector<double>(dims, 1.0); }

struct ActionChoice {
  std::vector<int> bins;       // j_max per dimension
  std::vector<double> values;  // A[j_max][k]
};

inline ActionChoice select_action(const Ensemble& ens, std::span<const double> act) {
  ActionChoice c;
  for (int k = 0; k < ens.dims; ++k) {
    int best = 0;
    for (int j = 1; j < ens.neurons; ++j) {
      if (act[static_cast<std::size_t>(j * ens.dims + k)] >
          act[static_cast<std::size_t>(best * ens.dims + k)]) {
        best = j;
      }
    }
    c.bins.push_back(best);
    c.values.push_back(ens.action_table[static_cast<std::size_t>(best * ens.dims + k)]);
  }
  return c;
}

// Population of ensembles plus the ensemble-to-ensemble connections made
// while learning. Connections are distinct (source, target) pairs.
class EnsemblePopulation {
 public:
  struct Link {
    std::size_t source = 0;
    std::size_t target = 0;
    int action = 0;  // bin taken on the most recent traversal
  };

  EnsemblePopulation(int neurons, int dims, std::vector<double> action_table = {})
      : neurons_(neurons), dims_(dims), action_table_(std::move(action_table)) {
    if (neurons < 1 || dims < 1) throw DomainError("ensemble needs b >= 1 and d >= 1");
    if (action_table_.empty()) {
      for (int j = 0; j < neurons; ++j) {
        for (int k = 0; k < dims; ++k) action_table_.push_back(j);
      }
    }
    if (action_table_.size() != static_cast<std::size_t>(neurons * dims)) {
      throw DomainError("action table must have b*d entries");
    }
  }

  int neurons_per_ensemble() const { return neurons_; }
  int dims() const { return dims_; }

  // Encoders drawn i.i.d. uniform from [-1, 1).
  std::size_t spawn_ensemble(const std::string& state_key, Rng& rng) {
    std::vector<double> enc(static_cast<std::size_t>(neurons_ * dims_));
    for (auto& e : enc) e = rng.uniform(-1.0, 1.0);
    return spawn_ensemble(state_key, enc);
  }

  std::size_t spawn_ensemble(const std::string& state_key, std::span<const double> encoders) {
    if (index_.contains(state_key)) {
      throw PreconditionError("ensemble for state '" + state_key + "' already exists");
    }
    if (encoders.size() != static_cast<std::size_t>(neurons_ * dims_)) {
      throw PreconditionError("encoder count must equal b*d");
    }
    Ensemble ens;
    ens.state_key = state_key;
    ens.neurons = neurons_;
    ens.dims = dims_;
    ens.encoders.assign(encoders.begin(), encoders.end());
    for (double e : ens.encoders) require_finite(e, "encoder");
    ens.gains.assign(static_cast<std::size_t>(neurons_), 1.0);
    ens.biases.assign(static_cast<std::size_t>(neurons_), 0.0);
    ens.action_table = action_table_;
    ens.input_connected = true;
    index_.emplace(state_key, population_.size());
    population_.push_back(std::move(ens));
    fan_in_.push_back(0);
    return population_.size() - 1;
  }

  std::optional<std::size_t> find(const std::string& state_key) const {
    const auto it = index_.find(state_key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Ensemble& ensemble(std::size_t i) const { return population_.at(i); }
  Ensemble& ensemble(std::size_t i) { return population_.at(i); }
  std::size_t size() const { return population_.size(); }
  const std::vector<Link>& links() const { return links_; }

  // Reads V(s') from the next ensemble before writing, then stores the
  // updated Q back into the selected encoder of each dimension.
  void bmu_update(std::size_t source, std::span<const int> chosen, double reward, std::size_t next,
                  bool terminal, double alpha, double gamma) {
    require_finite(reward, "reward");
    require_finite(alpha, "learning rate");
    require_finite(gamma, "discount factor");
    if (chosen.size() != static_cast<std::size_t>(dims_)) {
      throw PreconditionError("bmu_update: one chosen bin per dimension required");
    }
    const Ensemble& nxt = population_.at(next);
    std::vector<double> next_value(static_cast<std::size_t>(dims_), 0.0);
    if (!terminal) {
      for (int k = 0; k < dims_; ++k) next_value[k] = nxt.value(k);
    }
    Ensemble& ens = population_.at(source);
    for (int k = 0; k < dims_; ++k) {
      if (chosen[k] < 0 || chosen[k] >= neurons_) {
        throw PreconditionError("bmu_update: chosen bin out of range");
      }
      double& q = ens.encoder(chosen[k], k);
      q += alpha * (-q + reward + gamma * next_value[k]);
    }
    record_link(source, next, chosen.front());
  }

  NetworkStats stats() const {
    NetworkStats st;
    st.neurons = population_.size();
    st.edges = links_.size();
    st.avg_fan_in = st.neurons == 0 ? 0.0
                                    : static_cast<double>(links_.size()) /
                                          static_cast<double>(st.neurons);
    st.parameter_count = parameter_count(st.neurons, neurons_ * dims_);
    return st;
  }

  GraphSnapshot snapshot() const {
    GraphSnapshot g;
    for (std::size_t i = 0; i < population_.size(); ++i) {
      const auto& ens = population_[i];
      g.nodes.push_back({ens.state_key, ens.value(0), fan_in_[i]});
    }
    for (const auto& l : links_) {
      const auto& src = population_[l.source];
      std::vector<double> q(static_cast<std::size_t>(neurons_));
      for (int j = 0; j < neurons_; ++j) q[j] = src.encoder(j, 0);
      g.edges.push_back({src.state_key, population_[l.target].state_key, l.action,
                         src.encoder(l.action, 0), false, argmax_lowest(q) == l.action});
    }
    return g;
  }

  std::string serialize() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& ens : population_) {
      os << ens.state_key;
      for (double e : ens.encoders) os << ' ' << e;
      os << '\n';
    }
    for (const auto& l : links_) os << l.source << "->" << l.target << ':' << l.action << '\n';
    return os.str();
  }

 private:
  void record_link(std::size_t source, std::size_t target, int action) {
    const auto key = std::make_pair(source, target);
    const auto it = link_index_.find(key);
    if (it != link_index_.end()) {
      links_[it->second].action = action;
      return;
    }
    link_index_.emplace(key, links_.size());
    links_.push_back({source, target, action});
    ++fan_in_[target];
  }

  int neurons_;
  int dims_;
  std::vector<double> action_table_;
  std::vector<Ensemble> population_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<int> fan_in_;
  std::vector<Link> links_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> link_index_;
};

enum class PoolOverflow { Error, EvictLeastRecentlyUsed };

// Single-ensemble variant: a fixed pool of N neurons, one claimed per new
// state, each with one axon weight (a Q value) per action bin. The axon of
// the taken action is wired to the neuron of the next state.
class NeuronPool {
 public:
  NeuronPool(std::size_t capacity, int axons, PoolOverflow overflow = PoolOverflow::Error)
      : capacity_(capacity),
        axons_(axons),
        overflow_(overflow),
        weights_(capacity * static_cast<std::size_t>(axons), 0.0),
        keys_(capacity),
        last_used_(capacity, 0) {
    if (capacity == 0 || axons < 1) throw DomainError("pool needs capacity >= 1 and axons >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t assigned_count() const { return assigned_.size(); }
  std::size_t next_free() const { return next_free_; }
  int axons() const { return axons_; }

  std::size_t pool_assign(const std::string& state_key) {
    if (assigned_.contains(state_key)) {
      throw PreconditionError("state '" + state_key + "' already has a pool neuron");
    }
    std::size_t idx = 0;
    if (next_free_ < capacity_) {
      idx = next_free_++;
    } else if (overflow_ == PoolOverflow::EvictLeastRecentlyUsed) {
      idx = evict_least_recent();
    } else {
      throw CapacityError("neuron pool exhausted: all " + std::to_string(capacity_) +
                              " neurons are assigned",
                          capacity_);
    }
    assigned_.emplace(state_key, idx);
    keys_[idx] = state_key;
    touch(idx);
    return idx;
  }

  std::optional<std::size_t> index_of(const std::string& state_key) const {
    const auto it = assigned_.find(state_key);
    if (it == assigned_.end()) return std::nullopt;
    return it->second;
  }

  double weight(std::size_t neuron, int axon) const {
    return weights_[neuron * static_cast<std::size_t>(axons_) + static_cast<std::size_t>(axon)];
  }

  void set_weight(std::size_t neuron, int axon, double value) {
    if (neuron >= next_free_ || axon < 0 || axon >= axons_) {
      throw PreconditionError("set_weight: neuron or axon out of range");
    }
    require_finite(value, "axon weight");
    weights_[neuron * static_cast<std::size_t>(axons_) + static_cast<std::size_t>(axon)] = value;
  }

  // Axon with the largest weight, lowest index on ties.
  int pool_select(const std::string& state_key) const {
    const std::size_t idx = require(state_key);
    return argmax_lowest(axon_weights(idx));
  }

  void pool_update(const std::string& state_key, int action, double reward,
                   const std::string& next_key, bool terminal, double alpha, double gamma) {
    require_finite(reward, "reward");
    require_finite(alpha, "learning rate");
    require_finite(gamma, "discount factor");
    if (action < 0 || action >= axons_) throw PreconditionError("pool_update: bad action");
    const std::size_t src = require(state_key);
    const std::size_t dst = require(next_key);
    double next_value = 0.0;
    if (!terminal) {
      const auto w = axon_weights(dst);
      next_value = *std::max_element(w.begin(), w.end());
    }
    double& q = weights_[src * static_cast<std::size_t>(axons_) + static_cast<std::size_t>(action)];
    q += alpha * (-q + reward + gamma * next_value);
    axon_targets_[{src, action}] = dst;
    touch(src);
    touch(dst);
  }

  void touch(const std::string& state_key) { touch(require(state_key)); }

  NetworkStats stats() const {
    NetworkStats st;
    st.neurons = assigned_.size();
    st.edges = axon_targets_.size();
    st.avg_fan_in = st.neurons == 0 ? 0.0
                                    : static_cast<double>(st.edges) /
                                          static_cast<double>(st.neurons);
    st.parameter_count = parameter_count(st.neurons, axons_);
    return st;
  }

  GraphSnapshot snapshot() const {
    std::vector<int> fan_in(capacity_, 0);
    for (const auto& [slot, dst] : axon_targets_) ++fan_in[dst];
    GraphSnapshot g;
    for (std::size_t i = 0; i < next_free_; ++i) {
      if (keys_[i].empty()) continue;
      const auto w = axon_weights(i);
      g.nodes.push_back({keys_[i], *std::max_element(w.begin(), w.end()), fan_in[i]});
    }
    for (const auto& [slot, dst] : axon_targets_) {
      const auto w = axon_weights(slot.first);
      g.edges.push_back({keys_[slot.first], keys_[dst], slot.second, w[slot.second], false,
                         argmax_lowest(w) == slot.second});
    }
    return g;
  }

  std::string serialize() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < next_free_; ++i) {
      os << i << ' ' << keys_[i];
      for (double w : axon_weights(i)) os << ' ' << w;
      os << '\n';
    }
    for (const auto& [slot, dst] : axon_targets_) {
      os << slot.first << ':' << slot.second << "->" << dst << '\n';
    }
    return os.str();
  }

 private:
  std::size_t require(const std::string& state_key) const {
    const auto it = assigned_.find(state_key);
    if (it == assigned_.end()) {
      throw PreconditionError("state '" + state_key + "' has no pool neuron");
    }
    return it->second;
  }

  std::vector<double> axon_weights(std::size_t idx) const {
    const auto begin = weights_.begin() + static_cast<std::ptrdiff_t>(idx * axons_);
    return {begin, begin + axons_};
  }

  void touch(std::size_t idx) { last_used_[idx] = ++clock_; }

  std::size_t evict_least_recent() {
    std::size_t victim = 0;
    for (std::size_t i = 1; i < capacity_; ++i) {
      if (last_used_[i] < last_used_[victim]) victim = i;
    }
    assigned_.erase(keys_[victim]);
    keys_[victim].clear();
    std::fill_n(weights_.begin() + static_cast<std::ptrdiff_t>(victim * axons_), axons_, 0.0);
    std::erase_if(axon_targets_, [victim](const auto& kv) {
      return kv.first.first == victim || kv.second == victim;
    });
    return victim;
  }

  std::size_t capacity_;
  int axons_;
  PoolOverflow overflow_;
  std::vector<double> weights_;
  std::vector<std::string> keys_;
  std::vector<std::uint64_t> last_used_;
  std::uint64_t clock_ = 0;
  std::size_t next_free_ = 0;
  std::unordered_map<std::string, std::size_t> assigned_;
  std::map<std::pair<std::size_t, int>, std::size_t> axon_targets_;
};

}  // namespace bmu
