#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bmu/cartpole.hpp"
#include "bmu/error.hpp"
#include "bmu/graph_metrics.hpp"
#include "bmu/trainer.hpp"

namespace bmu {

namespace fs = std::filesystem;

// rewards.csv: one row per training episode.
inline void write_rewards_csv(std::ostream& os, const RunMetrics& m) {
  const auto old = os.precision(17);
  os << "episode,reward,moving_avg,std,neurons,avg_fan_in,params\n";
  for (std::size_t i = 0; i < m.episodes(); ++i) {
    os << i + 1 << ',' << m.rewards[i] << ',' << m.moving_avg[i] << ',' << m.rolling_std[i] << ','
       << m.neurons[i] << ',';
    if (m.avg_fan_in[i]) {
      os << *m.avg_fan_in[i];
    } else {
      os << "n/a";
    }
    os << ',' << m.params[i] << '\n';
  }
  os.precision(old);
}

// aggregate.csv: across-seed mean and +/- 2 sigma band per episode.
inline void write_band_csv(std::ostream& os, const Band& b) {
  const auto old = os.precision(17);
  os << "episode,mean,lo_band,hi_band\n";
  for (std::size_t i = 0; i < b.mean.size(); ++i) {
    os << i + 1 << ',' << b.mean[i] << ',' << b.lo[i] << ',' << b.hi[i] << '\n';
  }
  os.precision(old);
}

inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows) {
  write_trajectory_header(os);
  for (const auto& r : rows) write_trajectory_row(os, r);
}

inline void write_q_csv(std::ostream& os, const std::vector<QEntry>& entries) {
  const auto old = os.precision(17);
  os << "state_key,action,q\n";
  for (const auto& e : entries) os << e.state_key << ',' << e.action << ',' << e.q << '\n';
  os.precision(old);
}

inline nlohmann::json seed_summary_json(const SeedRun& run) {
  nlohmann::json j;
  j["seed"] = run.seed;
  j["converged"] = run.metrics.converged;
  j["episodes_to_convergence"] =
      run.metrics.episodes_to_convergence ? nlohmann::json(*run.metrics.episodes_to_convergence)
                                          : nlohmann::json(nullptr);
  j["episodes_run"] = run.metrics.episodes();
  j["final"] = {{"neurons", run.final_stats.neurons},
                {"edges", run.final_stats.edges},
                {"avg_fan_in", run.final_stats.avg_fan_in ? nlohmann::json(*run.final_stats.avg_fan_in)
                                                          : nlohmann::json(nullptr)},
                {"params", run.final_stats.parameter_count}};
  j["eval"] = {{"episodes", run.eval.episodes.size()},
               {"mean_reward", run.eval.mean_reward},
               {"min_reward", run.eval.min_reward},
               {"max_reward", run.eval.max_reward}};
  j["wall_clock_seconds"] = run.metrics.wall_seconds;
  return j;
}

inline nlohmann::json run_summary_json(const TrainConfig& cfg, const MultiSeedResult& res) {
  nlohmann::json j;
  j["agent"] = std::string(to_string(cfg.agent));
  std::size_t converged = 0;
  std::vector<double> episodes;
  j["seeds"] = nlohmann::json::array();
  for (const auto& run : res.runs) {
    j["seeds"].push_back(seed_summary_json(run));
    if (run.metrics.converged) {
      ++converged;
      episodes.push_back(*run.metrics.episodes_to_convergence);
    }
  }
  j["converged"] = converged == res.runs.size();
  j["converged_seeds"] = converged;
  const auto median = detail::median_of(episodes);
  j["median_episodes_to_convergence"] = median ? nlohmann::json(*median) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

// Reads <run>/summary.json into a table row source.
inline RunSummary read_run_summary(const fs::path& run_dir) {
  const auto j = read_json(run_dir / "summary.json");
  RunSummary rs;
  rs.label = j.at("agent").get<std::string>();
  for (const auto& s : j.at("seeds")) {
    SeedSummary ss;
    if (!s.at("episodes_to_convergence").is_null()) {
      ss.episodes_to_convergence = s.at("episodes_to_convergence").get<int>();
    }
    const auto& f = s.at("final");
    ss.neurons = f.at("neurons").get<double>();
    if (!f.at("avg_fan_in").is_null()) ss.avg_fan_in = f.at("avg_fan_in").get<double>();
    ss.params = f.at("params").get<double>();
    rs.seeds.push_back(ss);
  }
  return rs;
}

inline std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace bmu
