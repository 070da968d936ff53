#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bmu/agents.hpp"
#include "bmu/error.hpp"
#include "bmu/trainer.hpp"

namespace bmu {

// Flat "key = value" run configuration. Blank lines and '#' comments are
// ignored; list values are comma separated.
namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
}

// Shortest text that parses back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <std::size_t N>
std::string join(const std::array<double, N>& a) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) out += (i ? "," : "") + fmt(a[i]);
  return out;
}

struct Field {
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

inline std::array<double, kStateDims> to_bounds(const std::string& key, const std::string& v) {
  const auto items = split_list(v);
  if (items.size() != kStateDims) {
    throw ConfigError("config key '" + key + "' needs 4 comma-separated values");
  }
  std::array<double, kStateDims> out{};
  for (std::size_t i = 0; i < kStateDims; ++i) out[i] = to_double(key, items[i]);
  return out;
}

#define BMU_DOUBLE_FIELD(name, member)                                                        \
  {                                                                                           \
    name, {                                                                                   \
      [](TrainConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }, \
          [](const TrainConfig& c) { return fmt(c.member); }                                  \
    }                                                                                         \
  }
#define BMU_INT_FIELD(name, member, type)                                                     \
  {                                                                                           \
    name, {                                                                                   \
      [](TrainConfig& c, const std::string& k, const std::string& v) {                        \
        c.member = static_cast<type>(to_int(k, v));                                           \
      },                                                                                      \
          [](const TrainConfig& c) { return std::to_string(c.member); }                       \
    }                                                                                         \
  }

inline const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"agent",
       {[](TrainConfig& c, const std::string&, const std::string& v) {
          c.agent = parse_agent_kind(v);
        },
        [](const TrainConfig& c) { return std::string(to_string(c.agent)); }}},
      BMU_DOUBLE_FIELD("gamma", learner.gamma),
      BMU_DOUBLE_FIELD("alpha", learner.alpha),
      BMU_INT_FIELD("actions", learner.actions, int),
      BMU_DOUBLE_FIELD("frequency_gain", learner.frequency_gain),
      {"q_init",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "zero") c.learner.q_init = QInit::Zero;
          else if (v == "small-uniform") c.learner.q_init = QInit::SmallUniform;
          else throw ConfigError("config key '" + k + "': expected zero or small-uniform");
        },
        [](const TrainConfig& c) {
          return std::string(c.learner.q_init == QInit::Zero ? "zero" : "small-uniform");
        }}},
      BMU_INT_FIELD("pool_capacity", learner.pool_capacity, std::size_t),
      {"pool_overflow",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "error") c.learner.pool_overflow = PoolOverflow::Error;
          else if (v == "lru") c.learner.pool_overflow = PoolOverflow::EvictLeastRecentlyUsed;
          else throw ConfigError("config key '" + k + "': expected error or lru");
        },
        [](const TrainConfig& c) {
          return std::string(c.learner.pool_overflow == PoolOverflow::Error ? "error" : "lru");
        }}},
      {"qtable_mode",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          if (v == "sparse") c.learner.qtable_mode = QTableMode::Sparse;
          else if (v == "dense") c.learner.qtable_mode = QTableMode::Dense;
          else throw ConfigError("config key '" + k + "': expected sparse or dense");
        },
        [](const TrainConfig& c) {
          return std::string(c.learner.qtable_mode == QTableMode::Sparse ? "sparse" : "dense");
        }}},
      BMU_INT_FIELD("n_bins", bins.n_bins, int),
      {"bin_lower",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          c.bins.lower = to_bounds(k, v);
        },
        [](const TrainConfig& c) { return join(c.bins.lower); }}},
      {"bin_upper",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          c.bins.upper = to_bounds(k, v);
        },
        [](const TrainConfig& c) { return join(c.bins.upper); }}},
      BMU_INT_FIELD("max_steps", env.max_steps, std::int64_t),
      BMU_DOUBLE_FIELD("theta_limit", env.theta_limit),
      BMU_DOUBLE_FIELD("x_limit", env.x_limit),
      BMU_DOUBLE_FIELD("fail_reward", env.fail_reward),
      BMU_DOUBLE_FIELD("step_reward", env.step_reward),
      BMU_DOUBLE_FIELD("gravity", env.gravity),
      BMU_DOUBLE_FIELD("mass_cart", env.mass_cart),
      BMU_DOUBLE_FIELD("mass_pole", env.mass_pole),
      BMU_DOUBLE_FIELD("pole_half_length", env.pole_half_length),
      BMU_DOUBLE_FIELD("force_mag", env.force_mag),
      BMU_DOUBLE_FIELD("dt", env.dt),
      BMU_DOUBLE_FIELD("convergence_reward", convergence_reward),
      BMU_INT_FIELD("convergence_window", convergence_window, int),
      BMU_INT_FIELD("max_episodes", max_episodes, int),
      {"seeds",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          c.seeds.clear();
          for (const auto& item : split_list(v)) {
            const long long s = to_int(k, item);
            if (s < 0) throw ConfigError("config key '" + k + "': seeds must be non-negative");
            c.seeds.push_back(static_cast<std::uint64_t>(s));
          }
        },
        [](const TrainConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.seeds.size(); ++i) {
            out += (i ? "," : "") + std::to_string(c.seeds[i]);
          }
          return out;
        }}},
      BMU_DOUBLE_FIELD("epsilon", epsilon),
      BMU_DOUBLE_FIELD("epsilon_decay", epsilon_decay),
      BMU_INT_FIELD("snapshot_every", snapshot_every, int),
      BMU_INT_FIELD("eval_episodes", eval_episodes, int),
  };
  return table;
}

#undef BMU_DOUBLE_FIELD
#undef BMU_INT_FIELD

}  // namespace config_detail

inline void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = config_detail::fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(cfg, key, value);
}

inline TrainConfig parse_config(std::istream& is, TrainConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = config_detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not key = value");
    }
    apply_setting(base, config_detail::trim(body.substr(0, eq)),
                  config_detail::trim(body.substr(eq + 1)));
  }
  return base;
}

inline TrainConfig load_config(const std::string& path, TrainConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

// Every key, so a written file reproduces the run on its own.
inline void write_config(std::ostream& os, const TrainConfig& cfg) {
  for (const auto& [key, field] : config_detail::fields()) {
    os << key << " = " << field.get(cfg) << '\n';
  }
}

}  // namespace bmu
