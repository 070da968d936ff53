#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bmu/discretizer.hpp"
#include "bmu/error.hpp"
#include "bmu/network_stats.hpp"
#include "bmu/synaptic_graph.hpp"

namespace bmu {

enum class QTableMode { Sparse, Dense };

// Conventional tabular Q-learning over discretized state keys. Unseen
// states read as all-zero rows.
class QTable {
 public:
  QTable(int actions, QTableMode mode = QTableMode::Sparse, int n_bins = 10)
      : actions_(actions), mode_(mode), n_bins_(n_bins) {
    if (actions < 1) throw DomainError("Q-table needs at least one action");
    if (mode_ == QTableMode::Dense) {
      std::size_t states = 1;
      for (std::size_t d = 0; d < kStateDims; ++d) states *= static_cast<std::size_t>(n_bins_);
      dense_.assign(states * static_cast<std::size_t>(actions_), 0.0);
      dense_visits_.assign(states, 0);
    }
  }

  int actions() const { return actions_; }
  QTableMode mode() const { return mode_; }

  // Dense: n_bins^4; sparse: distinct states seen so far.
  std::size_t state_count() const {
    return mode_ == QTableMode::Dense ? dense_visits_.size() : order_.size();
  }

  std::size_t entry_count() const { return state_count() * static_cast<std::size_t>(actions_); }

  double q(const std::string& key, int action) const {
    check_action(action);
    if (mode_ == QTableMode::Dense) return dense_[dense_index(key) * actions_ + action];
    const auto it = sparse_.find(key);
    return it == sparse_.end() ? 0.0 : it->second[static_cast<std::size_t>(action)];
  }

  void set(const std::string& key, int action, double value) {
    check_action(action);
    require_finite(value, "Q value");
    row(key)[static_cast<std::size_t>(action)] = value;
  }

  double value(const std::string& key) const {
    double best = q(key, 0);
    for (int a = 1; a < actions_; ++a) best = std::max(best, q(key, a));
    return best;
  }

  int qtable_select(const std::string& key) const {
    std::vector<double> values(static_cast<std::size_t>(actions_));
    for (int a = 0; a < actions_; ++a) values[a] = q(key, a);
    return argmax_lowest(values);
  }

  // Returns true on the first visit of the state.
  bool visit(const std::string& key) {
    if (mode_ == QTableMode::Dense) return dense_visits_[dense_index(key)]++ == 0;
    row(key);
    return visits_[key]++ == 0;
  }

  std::size_t visits(const std::string& key) const {
    if (mode_ == QTableMode::Dense) return dense_visits_[dense_index(key)];
    const auto it = visits_.find(key);
    return it == visits_.end() ? 0 : it->second;
  }

  void qtable_update(const std::string& s, int a, double r, const std::string& s_next,
                     double alpha, double gamma, bool terminal) {
    require_finite(r, "reward");
    require_finite(alpha, "learning rate");
    require_finite(gamma, "discount factor");
    check_action(a);
    const double next_value = terminal ? 0.0 : value(s_next);
    double& cell = row(s)[static_cast<std::size_t>(a)];
    cell += alpha * (-cell + r + gamma * next_value);
  }

  NetworkStats stats() const {
    NetworkStats st;
    st.neurons = state_count();
    st.parameter_count = parameter_count(st.neurons, actions_);
    return st;
  }

  // Keys in first-seen order (sparse) or all keys in index order (dense).
  std::vector<std::string> keys() const {
    if (mode_ == QTableMode::Sparse) return order_;
    std::vector<std::string> out;
    out.reserve(dense_visits_.size());
    for (std::size_t i = 0; i < dense_visits_.size(); ++i) out.push_back(key_of(bins_of(i)));
    return out;
  }

  std::string serialize() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& k : keys()) {
      os << k;
      for (int a = 0; a < actions_; ++a) os << ' ' << q(k, a);
      os << '\n';
    }
    return os.str();
  }

 private:
  void check_action(int action) const {
    if (action < 0 || action >= actions_) {
      throw PreconditionError("action index " + std::to_string(action) + " out of range");
    }
  }

  std::size_t dense_index(const std::string& key) const {
    const Bins bins = parse_key(key);
    std::size_t idx = 0;
    for (int b : bins) {
      if (b >= n_bins_) throw PreconditionError("state key '" + key + "' exceeds bin range");
      idx = idx * static_cast<std::size_t>(n_bins_) + static_cast<std::size_t>(b);
    }
    return idx;
  }

  Bins bins_of(std::size_t idx) const {
    Bins bins{};
    for (std::size_t d = kStateDims; d-- > 0;) {
      bins[d] = static_cast<int>(idx % static_cast<std::size_t>(n_bins_));
      idx /= static_cast<std::size_t>(n_bins_);
    }
    return bins;
  }

  double* row(const std::string& key) {
    if (mode_ == QTableMode::Dense) return &dense_[dense_index(key) * actions_];
    auto it = sparse_.find(key);
    if (it == sparse_.end()) {
      it = sparse_.emplace(key, std::vector<double>(static_cast<std::size_t>(actions_), 0.0)).first;
      order_.push_back(key);
    }
    return it->second.data();
  }

  int actions_;
  QTableMode mode_;
  int n_bins_;
  std::vector<double> dense_;
  std::vector<std::size_t> dense_visits_;
  std::unordered_map<std::string, std::vector<double>> sparse_;
  std::unordered_map<std::string, std::size_t> visits_;
  std::vector<std::string> order_;
};

}  // namespace bmu
