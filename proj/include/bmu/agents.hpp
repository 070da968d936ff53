#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bmu/bmu_ensemble.hpp"
#include "bmu/discretizer.hpp"
#include "bmu/graph_io.hpp"
#include "bmu/network_stats.hpp"
#include "bmu/qtable.hpp"
#include "bmu/random.hpp"
#include "bmu/synaptic_graph.hpp"

namespace bmu {

enum class AgentKind { Synaptic, Bmu, BmuPool, QTable };

inline std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Synaptic: return "synaptic";
    case AgentKind::Bmu: return "bmu";
    case AgentKind::BmuPool: return "bmu-pool";
    case AgentKind::QTable: return "qtable";
  }
  return "?";
}

inline AgentKind parse_agent_kind(std::string_view name) {
  for (AgentKind k : {AgentKind::Synaptic, AgentKind::Bmu, AgentKind::BmuPool, AgentKind::QTable}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown agent kind '" + std::string(name) +
                    "' (expected synaptic, bmu, bmu-pool or qtable)");
}

enum class QInit { Zero, SmallUniform };

struct AgentSettings {
  int actions = 2;
  double alpha = 0.9;
  double gamma = 0.99;
  double frequency_gain = 1.0;
  QInit q_init = QInit::Zero;
  std::size_t pool_capacity = 300;
  PoolOverflow pool_overflow = PoolOverflow::Error;
  QTableMode qtable_mode = QTableMode::Sparse;
  int n_bins = 10;
};

// What the episode loop needs from a learner. observe() is lookup-or-spawn
// and reports whether a new unit was created; select() picks (or accepts a
// forced) action; learn() wires the transition and applies the Bellman
// update; greedy() is a read-only policy query for evaluation.
template <class A>
concept Agent = requires(A a, const A ca, const DiscreteState& s, const std::string& key, int j,
                         double r, bool terminal, std::optional<int> forced) {
  { a.observe(s) } -> std::same_as<bool>;
  { a.select(key, forced) } -> std::same_as<int>;
  { a.learn(key, j, r, key, terminal) };
  { ca.greedy(key) } -> std::same_as<int>;
  { ca.q_value(key, j) } -> std::same_as<double>;
  { ca.stats() } -> std::same_as<NetworkStats>;
  { ca.snapshot() } -> std::same_as<GraphSnapshot>;
  { ca.serialize() } -> std::same_as<std::string>;
  { ca.actions() } -> std::same_as<int>;
};

// RNG stream tags derived from the run seed.
inline constexpr std::uint64_t kAgentInitStream = 3;

class SynapticAgent {
 public:
  SynapticAgent(const AgentSettings& settings, std::uint64_t seed)
      : settings_(settings),
        graph_(settings.actions, settings.gamma),
        rng_(Rng::derived(seed, kAgentInitStream)) {}

  bool observe(const DiscreteState& s) {
    if (graph_.find(s.key)) return false;
    if (settings_.q_init == QInit::SmallUniform) {
      std::vector<double> q(static_cast<std::size_t>(settings_.actions));
      for (auto& v : q) v = rng_.uniform(0.0, 1e-3);
      graph_.spawn_neuron(s.key, q);
    } else {
      graph_.spawn_neuron(s.key);
    }
    return true;
  }

  int select(const std::string& key, std::optional<int> forced) {
    const NeuronId id = require(key);
    if (forced) {
      graph_.open_gate(id, *forced);
      return *forced;
    }
    return graph_.forward_select(id, settings_.frequency_gain).action;
  }

  void learn(const std::string& key, int action, double reward, const std::string& next_key,
             bool terminal) {
    const NeuronId id = require(key);
    const NeuronId next = require(next_key);
    graph_.connect(id, action, next);
    const double next_value = terminal ? 0.0 : graph_.neuron(next).value;
    graph_.bellman_update(id, action, reward, next_value, settings_.alpha, settings_.gamma);
  }

  int greedy(const std::string& key) const {
    const auto id = graph_.find(key);
    if (!id) return 0;
    std::vector<double> q;
    for (const auto& s : graph_.neuron(*id).synapses) q.push_back(s.q_value);
    return argmax_lowest(q);
  }

  double q_value(const std::string& key, int action) const {
    const auto id = graph_.find(key);
    return id ? graph_.neuron(*id).synapses.at(static_cast<std::size_t>(action)).q_value : 0.0;
  }

  NetworkStats stats() const { return graph_.stats(); }
  GraphSnapshot snapshot() const { return graph_.snapshot(); }
  std::string serialize() const { return graph_.serialize(); }
  int actions() const { return settings_.actions; }
  const SynapticGraph& graph() const { return graph_; }

 private:
  NeuronId require(const std::string& key) const {
    const auto id = graph_.find(key);
    if (!id) throw PreconditionError("no neuron for state '" + key + "'");
    return *id;
  }

  AgentSettings settings_;
  SynapticGraph graph_;
  Rng rng_;
};

// One ensemble per state, b = actions neurons, d = 1 dimension.
class BmuAgent {
 public:
  BmuAgent(const AgentSettings& settings, std::uint64_t seed)
      : settings_(settings),
        population_(settings.actions, 1),
        rng_(Rng::derived(seed, kAgentInitStream)) {}

  bool observe(const DiscreteState& s) {
    if (population_.find(s.key)) return false;
    population_.spawn_ensemble(s.key, rng_);
    return true;
  }

  int select(const std::string& key, std::optional<int> forced) {
    const std::size_t idx = require(key);
    if (forced) return *forced;
    return choose(population_.ensemble(idx));
  }

  void learn(const std::string& key, int action, double reward, const std::string& next_key,
             bool terminal) {
    const int chosen[] = {action};
    population_.bmu_update(require(key), chosen, reward, require(next_key), terminal,
                           settings_.alpha, settings_.gamma);
  }

  int greedy(const std::string& key) const {
    const auto idx = population_.find(key);
    return idx ? choose(population_.ensemble(*idx)) : 0;
  }

  double q_value(const std::string& key, int action) const {
    const auto idx = population_.find(key);
    return idx ? population_.ensemble(*idx).encoder(action, 0) : 0.0;
  }

  void set_response(Nonlinearity response) { response_ = std::move(response); }

  NetworkStats stats() const { return population_.stats(); }
  GraphSnapshot snapshot() const { return population_.snapshot(); }
  std::string serialize() const { return population_.serialize(); }
  int actions() const { return settings_.actions; }
  const EnsemblePopulation& population() const { return population_; }

 private:
  int choose(const Ensemble& ens) const {
    const auto input = unit_step_input(ens.dims);
    return select_action(ens, activity(ens, input, response_)).bins.front();
  }

  std::size_t require(const std::string& key) const {
    const auto idx = population_.find(key);
    if (!idx) throw PreconditionError("no ensemble for state '" + key + "'");
    return *idx;
  }

  AgentSettings settings_;
  EnsemblePopulation population_;
  Rng rng_;
  Nonlinearity response_ = identity_response;
};

class PoolAgent {
 public:
  PoolAgent(const AgentSettings& settings, std::uint64_t /*seed*/)
      : settings_(settings),
        pool_(settings.pool_capacity, settings.actions, settings.pool_overflow) {}

  bool observe(const DiscreteState& s) {
    if (pool_.index_of(s.key)) return false;
    pool_.pool_assign(s.key);
    return true;
  }

  int select(const std::string& key, std::optional<int> forced) {
    pool_.touch(key);
    return forced ? *forced : pool_.pool_select(key);
  }

  void learn(const std::string& key, int action, double reward, const std::string& next_key,
             bool terminal) {
    pool_.pool_update(key, action, reward, next_key, terminal, settings_.alpha, settings_.gamma);
  }

  int greedy(const std::string& key) const {
    return pool_.index_of(key) ? pool_.pool_select(key) : 0;
  }

  double q_value(const std::string& key, int action) const {
    const auto idx = pool_.index_of(key);
    return idx ? pool_.weight(*idx, action) : 0.0;
  }

  NetworkStats stats() const { return pool_.stats(); }
  GraphSnapshot snapshot() const { return pool_.snapshot(); }
  std::string serialize() const { return pool_.serialize(); }
  int actions() const { return settings_.actions; }
  const NeuronPool& pool() const { return pool_; }

 private:
  AgentSettings settings_;
  NeuronPool pool_;
};

class QTableAgent {
 public:
  QTableAgent(const AgentSettings& settings, std::uint64_t /*seed*/)
      : settings_(settings), table_(settings.actions, settings.qtable_mode, settings.n_bins) {}

  bool observe(const DiscreteState& s) { return table_.visit(s.key); }

  int select(const std::string& key, std::optional<int> forced) {
    return forced ? *forced : table_.qtable_select(key);
  }

  void learn(const std::string& key, int action, double reward, const std::string& next_key,
             bool terminal) {
    table_.qtable_update(key, action, reward, next_key, settings_.alpha, settings_.gamma,
                         terminal);
  }

  int greedy(const std::string& key) const { return table_.qtable_select(key); }
  double q_value(const std::string& key, int action) const { return table_.q(key, action); }
  NetworkStats stats() const { return table_.stats(); }

  // Visited states as nodes only; a table has no connection structure.
  GraphSnapshot snapshot() const {
    GraphSnapshot g;
    for (const auto& k : table_.keys()) {
      if (table_.visits(k) > 0) g.nodes.push_back({k, table_.value(k), 0});
    }
    return g;
  }

  std::string serialize() const { return table_.serialize(); }
  int actions() const { return settings_.actions; }
  const QTable& table() const { return table_; }

 private:
  AgentSettings settings_;
  QTable table_;
};

static_assert(Agent<SynapticAgent>);
static_assert(Agent<BmuAgent>);
static_assert(Agent<PoolAgent>);
static_assert(Agent<QTableAgent>);

using AnyAgent = std::variant<SynapticAgent, BmuAgent, PoolAgent, QTableAgent>;

inline AnyAgent make_agent(AgentKind kind, const AgentSettings& settings, std::uint64_t seed) {
  switch (kind) {
    case AgentKind::Synaptic: return SynapticAgent(settings, seed);
    case AgentKind::Bmu: return BmuAgent(settings, seed);
    case AgentKind::BmuPool: return PoolAgent(settings, seed);
    case AgentKind::QTable: return QTableAgent(settings, seed);
  }
  throw ConfigError("unknown agent kind");
}

}  // namespace bmu
