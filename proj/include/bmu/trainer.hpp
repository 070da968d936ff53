#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "bmu/agents.hpp"
#include "bmu/cartpole.hpp"
#include "bmu/discretizer.hpp"
#include "bmu/error.hpp"
#include "bmu/graph_io.hpp"
#include "bmu/random.hpp"

namespace bmu {

struct TrainConfig {
  AgentKind agent = AgentKind::Synaptic;
  AgentSettings learner;
  EnvParams env;
  BinSpec bins;
  double convergence_reward = 200.0;
  int convergence_window = 20;
  int max_episodes = 1000;
  std::vector<std::uint64_t> seeds{1};
  // epsilon-greedy override; epsilon_e = epsilon * epsilon_decay^e
  double epsilon = 0.0;
  double epsilon_decay = 1.0;
  int snapshot_every = 10;  // 0 disables periodic snapshots
  int eval_episodes = 1;

  AgentSettings agent_settings() const {
    AgentSettings s = learner;
    s.n_bins = bins.n_bins;
    return s;
  }

  void validate() const {
    auto num = [](double v) {
      std::ostringstream os;
      os << v;
      return os.str();
    };
    if (!(learner.gamma > 0.0 && learner.gamma < 1.0)) {
      throw ConfigError("gamma must lie in (0, 1), got " + num(learner.gamma));
    }
    if (!(learner.alpha > 0.0 && learner.alpha <= 1.0)) {
      throw ConfigError("alpha must lie in (0, 1], got " + num(learner.alpha));
    }
    if (learner.actions != 2) throw ConfigError("cart-pole supports exactly 2 actions");
    if (convergence_window < 1) throw ConfigError("convergence_window must be >= 1");
    if (max_episodes < 1) throw ConfigError("max_episodes must be >= 1");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) {
      throw ConfigError("epsilon_decay must lie in (0, 1]");
    }
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
    if (eval_episodes < 0) throw ConfigError("eval_episodes must be >= 0");
    if (learner.pool_capacity < 1) throw ConfigError("pool_capacity must be >= 1");
    try {
      env.validate();
      bins.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    if (convergence_reward > static_cast<double>(env.max_steps) * env.step_reward) {
      throw ConfigError("convergence_reward exceeds the best achievable episode reward");
    }
  }
};

struct EpisodeRecord {
  double total_reward = 0.0;
  int steps = 0;
  std::size_t spawned = 0;
  bool terminated = false;
  bool truncated = false;
};

// Streak of consecutive episodes at or above the reward threshold.
class ConvergenceDetector {
 public:
  ConvergenceDetector(double threshold, int window) : threshold_(threshold), window_(window) {}

  bool push(double episode_reward) {
    streak_ = episode_reward >= threshold_ ? streak_ + 1 : 0;
    return converged();
  }

  bool converged() const { return streak_ >= window_; }
  int streak() const { return streak_; }

 private:
  double threshold_;
  int window_;
  int streak_ = 0;
};

struct RunMetrics {
  std::vector<double> rewards;
  std::vector<double> moving_avg;
  std::vector<double> rolling_std;
  std::vector<std::size_t> neurons;
  std::vector<std::optional<double>> avg_fan_in;
  std::vector<std::size_t> params;
  std::vector<int> steps;
  std::vector<std::size_t> spawned;
  bool converged = false;
  std::optional<int> episodes_to_convergence;  // 1-based episode index
  double wall_seconds = 0.0;

  std::size_t episodes() const { return rewards.size(); }
};

// Mean of the trailing min(e, window) values ending at index e-1.
inline double trailing_mean(const std::vector<double>& v, std::size_t end, int window) {
  const std::size_t n = std::min<std::size_t>(end, static_cast<std::size_t>(window));
  double sum = 0.0;
  for (std::size_t i = end - n; i < end; ++i) sum += v[i];
  return sum / static_cast<double>(n);
}

// Sample standard deviation of the same trailing window (0 for one value).
inline double trailing_std(const std::vector<double>& v, std::size_t end, int window) {
  const std::size_t n = std::min<std::size_t>(end, static_cast<std::size_t>(window));
  if (n < 2) return 0.0;
  const double mean = trailing_mean(v, end, window);
  double ss = 0.0;
  for (std::size_t i = end - n; i < end; ++i) ss += (v[i] - mean) * (v[i] - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// One episode of interaction with learning enabled.
template <Agent A>
EpisodeRecord run_episode(A& agent, CartPoleEnv& env, const BinSpec& bins, Rng& explore,
                          double epsilon = 0.0, std::vector<TrajectoryRow>* trace = nullptr) {
  EpisodeRecord rec;
  CartState state = env.reset();
  DiscreteState current = discretize(state, bins);
  rec.spawned += agent.observe(current) ? 1 : 0;
  while (true) {
    std::optional<int> forced;
    if (epsilon > 0.0 && explore.canonical() < epsilon) forced = explore.below(agent.actions());
    const int action = agent.select(current.key, forced);
    const StepOutcome out = env.step(action);
    rec.total_reward += out.reward;
    ++rec.steps;
    DiscreteState next = discretize(out.next_state, bins);
    rec.spawned += agent.observe(next) ? 1 : 0;
    agent.learn(current.key, action, out.reward, next.key, out.terminated);
    if (trace) trace->push_back({state, action, out.reward, out.terminated});
    if (out.terminated || out.truncated) {
      rec.terminated = out.terminated;
      rec.truncated = out.truncated;
      break;
    }
    state = out.next_state;
    current = std::move(next);
  }
  return rec;
}

using EpisodeHook = std::function<void(int episode, const RunMetrics&)>;

// Runs episodes until convergence or the episode cap.
template <Agent A>
RunMetrics train(A& agent, CartPoleEnv& env, const TrainConfig& cfg, Rng& explore,
                 const std::function<void(int, const A&, const RunMetrics&)>& on_episode = {}) {
  const auto start = std::chrono::steady_clock::now();
  RunMetrics m;
  ConvergenceDetector detector(cfg.convergence_reward, cfg.convergence_window);
  double epsilon = cfg.epsilon;
  for (int e = 1; e <= cfg.max_episodes; ++e) {
    const EpisodeRecord rec = run_episode(agent, env, cfg.bins, explore, epsilon);
    epsilon *= cfg.epsilon_decay;
    m.rewards.push_back(rec.total_reward);
    m.moving_avg.push_back(trailing_mean(m.rewards, m.rewards.size(), cfg.convergence_window));
    m.rolling_std.push_back(trailing_std(m.rewards, m.rewards.size(), cfg.convergence_window));
    const NetworkStats st = agent.stats();
    m.neurons.push_back(st.neurons);
    m.avg_fan_in.push_back(st.avg_fan_in);
    m.params.push_back(st.parameter_count);
    m.steps.push_back(rec.steps);
    m.spawned.push_back(rec.spawned);
    const bool done = detector.push(rec.total_reward);
    if (on_episode) on_episode(e, agent, m);
    if (done) {
      m.converged = true;
      m.episodes_to_convergence = e;
      break;
    }
  }
  m.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

struct EvalEpisode {
  double total_reward = 0.0;
  bool terminated = false;
  std::vector<TrajectoryRow> trace;
};

struct EvalResult {
  std::vector<EvalEpisode> episodes;
  double mean_reward = 0.0;
  double min_reward = 0.0;
  double max_reward = 0.0;
};

// Greedy rollouts through the const policy; the agent is never modified.
template <Agent A>
EvalResult evaluate(const A& agent, const EnvParams& params, const BinSpec& bins, int n_episodes,
                    std::uint64_t seed) {
  EvalResult res;
  CartPoleEnv env(params, seed);
  for (int i = 0; i < n_episodes; ++i) {
    EvalEpisode ep;
    CartState state = env.reset();
    while (true) {
      const int action = agent.greedy(discretize(state, bins).key);
      const StepOutcome out = env.step(action);
      ep.total_reward += out.reward;
      ep.trace.push_back({state, action, out.reward, out.terminated});
      if (out.terminated || out.truncated) {
        ep.terminated = out.terminated;
        break;
      }
      state = out.next_state;
    }
    res.episodes.push_back(std::move(ep));
  }
  if (!res.episodes.empty()) {
    res.min_reward = res.max_reward = res.episodes.front().total_reward;
    double sum = 0.0;
    for (const auto& ep : res.episodes) {
      sum += ep.total_reward;
      res.min_reward = std::min(res.min_reward, ep.total_reward);
      res.max_reward = std::max(res.max_reward, ep.total_reward);
    }
    res.mean_reward = sum / static_cast<double>(res.episodes.size());
  }
  return res;
}

struct Band {
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

// Per-index mean +/- 2 sample standard deviations across series. Shorter
// series are padded with their last value.
inline Band band_across(const std::vector<std::vector<double>>& series) {
  Band b;
  std::size_t len = 0;
  for (const auto& s : series) len = std::max(len, s.size());
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> column;
    for (const auto& s : series) {
      if (!s.empty()) column.push_back(i < s.size() ? s[i] : s.back());
    }
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= static_cast<double>(column.size());
    double sd = 0.0;
    if (column.size() > 1) {
      for (double v : column) sd += (v - mean) * (v - mean);
      sd = std::sqrt(sd / static_cast<double>(column.size() - 1));
    }
    b.mean.push_back(mean);
    b.lo.push_back(mean - 2.0 * sd);
    b.hi.push_back(mean + 2.0 * sd);
  }
  return b;
}

// Eval episodes use their own seed stream so they never replay training resets.
inline std::uint64_t eval_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

inline constexpr std::uint64_t kExploreStream = 2;

struct QEntry {
  std::string state_key;
  int action = 0;
  double q = 0.0;
};

template <Agent A>
std::vector<QEntry> q_entries(const A& agent) {
  std::vector<QEntry> out;
  for (const auto& node : agent.snapshot().nodes) {
    for (int a = 0; a < agent.actions(); ++a) {
      out.push_back({node.state_key, a, agent.q_value(node.state_key, a)});
    }
  }
  return out;
}

struct SeedRun {
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<std::pair<int, GraphSnapshot>> snapshots;  // (episode, graph)
  GraphSnapshot final_graph;
  NetworkStats final_stats;
  std::vector<QEntry> q_values;
  std::string agent_state;  // agent serialization at the end of training
  EvalResult eval;
};

// Trains one seed from scratch. episode_cap, when set, lowers max_episodes
// (the run is otherwise identical, so this replays a prefix of a run).
inline SeedRun run_seed(const TrainConfig& cfg, std::uint64_t seed,
                        std::optional<int> episode_cap = std::nullopt) {
  TrainConfig local = cfg;
  if (episode_cap) local.max_episodes = std::min(local.max_episodes, *episode_cap);
  AnyAgent any = make_agent(local.agent, local.agent_settings(), seed);
  SeedRun out;
  out.seed = seed;
  std::visit(
      [&](auto& agent) {
        using A = std::decay_t<decltype(agent)>;
        CartPoleEnv env(local.env, seed);
        Rng explore = Rng::derived(seed, kExploreStream);
        std::function<void(int, const A&, const RunMetrics&)> hook;
        if (local.snapshot_every > 0) {
          hook = [&](int e, const A& a, const RunMetrics&) {
            if (e == 1 || e % local.snapshot_every == 0) out.snapshots.emplace_back(e, a.snapshot());
          };
        }
        out.metrics = train(agent, env, local, explore, hook);
        out.final_graph = agent.snapshot();
        out.final_stats = agent.stats();
        out.q_values = q_entries(agent);
        out.agent_state = agent.serialize();
        out.eval = evaluate(agent, local.env, local.bins, local.eval_episodes, eval_seed(seed));
      },
      any);
  return out;
}

struct AggregateMetrics {
  Band reward;   // across-seed band of the moving-average reward
  Band neurons;  // across-seed band of the neuron count
  std::vector<std::optional<int>> convergence_episodes;
};

inline AggregateMetrics aggregate(const std::vector<SeedRun>& runs) {
  std::vector<std::vector<double>> rewards, neurons;
  AggregateMetrics agg;
  for (const auto& r : runs) {
    rewards.push_back(r.metrics.moving_avg);
    neurons.emplace_back(r.metrics.neurons.begin(), r.metrics.neurons.end());
    agg.convergence_episodes.push_back(r.metrics.episodes_to_convergence);
  }
  agg.reward = band_across(rewards);
  agg.neurons = band_across(neurons);
  return agg;
}

struct MultiSeedResult {
  std::vector<SeedRun> runs;  // in cfg.seeds order
  AggregateMetrics aggregate;
};

// Seeds run as independent workers; results are joined in seed-list order.
inline MultiSeedResult multi_seed(const TrainConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  MultiSeedResult res;
  res.runs.resize(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        res.runs[i] = run_seed(cfg, cfg.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cfg.seeds.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  res.aggregate = aggregate(res.runs);
  return res;
}

}  // namespace bmu
