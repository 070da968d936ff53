// bmu_lab: train, evaluate and inspect synaptic Q-learning and Bellman
// memory unit agents on the cart-pole.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bmu/bmu.hpp"

namespace fs = std::filesystem;
using namespace bmu;

namespace {

struct TrainArgs {
  std::string config_path;
  std::string out;
  std::optional<std::string> agent;
  std::optional<double> gamma, alpha, epsilon, epsilon_decay, theta_limit;
  std::optional<int> seeds, max_episodes, snapshot_every, eval_episodes;
  std::optional<long long> max_steps, pool_capacity;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> seed_list, qtable_mode;
  std::vector<std::string> settings;
  unsigned jobs = 1;
};

struct RunArgs {
  std::string run;
  std::string out;
  std::optional<std::uint64_t> seed;
  int episodes = 1;
  int episode = 0;
};

int verbosity = 0;

void info(const std::string& msg) {
  if (verbosity >= 0) std::cout << msg << '\n';
}

std::uint64_t default_base_seed() {
  if (const char* env = std::getenv("BMU_LAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("BMU_LAB_SEED must be a non-negative integer, got '" + std::string(env) + "'");
    }
  }
  return 1;
}

TrainConfig resolve_train_config(const TrainArgs& a) {
  TrainConfig cfg;
  if (!a.config_path.empty()) cfg = load_config(a.config_path);
  const std::string seeds_from_file = config_detail::fields().at("seeds").get(cfg);
  auto set = [&](const char* key, const auto& opt) {
    if (opt) {
      std::ostringstream os;
      os.precision(17);
      os << *opt;
      apply_setting(cfg, key, os.str());
    }
  };
  set("agent", a.agent);
  set("gamma", a.gamma);
  set("alpha", a.alpha);
  set("epsilon", a.epsilon);
  set("epsilon_decay", a.epsilon_decay);
  set("theta_limit", a.theta_limit);
  set("max_episodes", a.max_episodes);
  set("snapshot_every", a.snapshot_every);
  set("eval_episodes", a.eval_episodes);
  set("max_steps", a.max_steps);
  set("pool_capacity", a.pool_capacity);
  set("qtable_mode", a.qtable_mode);
  for (const auto& kv : a.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed_list) {
    apply_setting(cfg, "seeds", *a.seed_list);
  } else if (a.seeds || a.seed || a.config_path.empty()) {
    const std::uint64_t base = a.seed ? *a.seed : default_base_seed();
    const int count = a.seeds ? *a.seeds : 1;
    if (count < 1) throw ConfigError("--seeds must be >= 1");
    cfg.seeds.clear();
    for (int i = 0; i < count; ++i) cfg.seeds.push_back(base + static_cast<std::uint64_t>(i));
  } else {
    apply_setting(cfg, "seeds", seeds_from_file);
  }
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  auto out = open_for_write(path);
  out << content;
}

fs::path seed_dir(const fs::path& run, std::uint64_t seed) {
  return run / ("seed_" + std::to_string(seed));
}

int cmd_train(const TrainArgs& a) {
  const TrainConfig cfg = resolve_train_config(a);
  const fs::path out(a.out);
  if (fs::exists(out) && !fs::is_empty(out)) {
    throw IoError("output directory '" + out.string() + "' already exists and is not empty");
  }
  fs::create_directories(out);
  {
    auto f = open_for_write(out / "config.txt");
    write_config(f, cfg);
  }

  const MultiSeedResult res = multi_seed(cfg, a.jobs);

  for (const auto& run : res.runs) {
    const fs::path dir = seed_dir(out, run.seed);
    fs::create_directories(dir);
    {
      auto f = open_for_write(dir / "rewards.csv");
      write_rewards_csv(f, run.metrics);
    }
    {
      auto f = open_for_write(dir / "q_values.csv");
      write_q_csv(f, run.q_values);
    }
    if (!run.eval.episodes.empty()) {
      auto f = open_for_write(dir / "phase.csv");
      write_trajectory_csv(f, run.eval.episodes.front().trace);
    }
    for (const auto& [episode, graph] : run.snapshots) {
      save_snapshot((dir / ("graph_ep" + std::to_string(episode))).string(), graph);
    }
    save_snapshot((dir / "graph_final").string(), run.final_graph);
    write_file(dir / "summary.json", seed_summary_json(run).dump(2) + "\n");
  }
  {
    auto f = open_for_write(out / "aggregate.csv");
    write_band_csv(f, res.aggregate.reward);
  }
  {
    auto f = open_for_write(out / "aggregate_neurons.csv");
    write_band_csv(f, res.aggregate.neurons);
  }
  write_file(out / "summary.json", run_summary_json(cfg, res).dump(2) + "\n");

  std::vector<RunSummary> rows;
  for (const auto& run : res.runs) {
    rows.push_back({std::string(to_string(cfg.agent)) + " seed " + std::to_string(run.seed),
                    {summarize(run.metrics)}});
  }
  info(summary_table(rows).to_text());
  std::size_t converged = 0;
  for (const auto& run : res.runs) converged += run.metrics.converged ? 1 : 0;
  info("converged " + std::to_string(converged) + "/" + std::to_string(res.runs.size()) +
       " seeds; artifacts in " + out.string());
  return 0;
}

TrainConfig load_run_config(const fs::path& run) {
  if (!fs::is_directory(run)) throw IoError("run directory '" + run.string() + "' does not exist");
  TrainConfig cfg = load_config((run / "config.txt").string());
  cfg.validate();
  return cfg;
}

std::uint64_t pick_seed(const TrainConfig& cfg, const RunArgs& a) {
  if (!a.seed) return cfg.seeds.front();
  for (auto s : cfg.seeds) {
    if (s == *a.seed) return s;
  }
  throw ConfigError("seed " + std::to_string(*a.seed) + " is not part of this run");
}

// Defaults to a sibling of the run directory, e.g. runs/a -> runs/a_eval.
fs::path output_dir(const RunArgs& a, const char* suffix) {
  fs::path run = fs::path(a.run);
  if (!run.has_filename()) run = run.parent_path();
  const fs::path out = a.out.empty() ? fs::path(run.string() + "_" + suffix) : fs::path(a.out);
  if (fs::weakly_canonical(out).string().starts_with(fs::weakly_canonical(run).string() + "/")) {
    throw IoError("output directory must not be inside the run directory");
  }
  fs::create_directories(out);
  return out;
}

// Replays training for one seed and checks it against the stored rewards.csv.
SeedRun replay(const TrainConfig& cfg, const fs::path& run, std::uint64_t seed) {
  SeedRun r = run_seed(cfg, seed);
  const fs::path stored = seed_dir(run, seed) / "rewards.csv";
  if (fs::exists(stored)) {
    std::ifstream in(stored);
    std::stringstream expected;
    expected << in.rdbuf();
    std::ostringstream actual;
    write_rewards_csv(actual, r.metrics);
    if (expected.str() != actual.str()) {
      throw Error("replayed training does not reproduce " + stored.string());
    }
  }
  return r;
}

int cmd_eval(const RunArgs& a) {
  TrainConfig cfg = load_run_config(a.run);
  if (a.episodes < 1) throw ConfigError("--episodes must be >= 1");
  cfg.eval_episodes = a.episodes;
  cfg.snapshot_every = 0;
  const std::uint64_t seed = pick_seed(cfg, a);
  const SeedRun r = replay(cfg, a.run, seed);
  const fs::path out = output_dir(a, "eval");
  nlohmann::json j;
  j["seed"] = seed;
  j["episodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.eval.episodes.size(); ++i) {
    const auto& ep = r.eval.episodes[i];
    auto f = open_for_write(out / ("phase_ep" + std::to_string(i + 1) + ".csv"));
    write_trajectory_csv(f, ep.trace);
    j["episodes"].push_back({{"reward", ep.total_reward},
                             {"steps", ep.trace.size()},
                             {"terminated", ep.terminated}});
  }
  j["mean_reward"] = r.eval.mean_reward;
  j["min_reward"] = r.eval.min_reward;
  j["max_reward"] = r.eval.max_reward;
  write_file(out / "eval_summary.json", j.dump(2) + "\n");
  std::ostringstream msg;
  msg << "eval seed " << seed << ": mean " << r.eval.mean_reward << ", min " << r.eval.min_reward
      << ", max " << r.eval.max_reward << " over " << r.eval.episodes.size() << " episodes";
  info(msg.str());
  return 0;
}

int cmd_export_graph(const RunArgs& a) {
  TrainConfig cfg = load_run_config(a.run);
  if (a.episode < 1) throw ConfigError("--episode must be >= 1");
  cfg.snapshot_every = 0;
  cfg.eval_episodes = 0;
  const std::uint64_t seed = pick_seed(cfg, a);
  const SeedRun r = run_seed(cfg, seed, a.episode);
  const fs::path out = output_dir(a, "export");
  const fs::path stem = out / ("graph_ep" + std::to_string(a.episode));
  save_snapshot(stem.string(), r.final_graph);
  std::ostringstream msg;
  msg << "seed " << seed << " episode " << r.metrics.episodes() << ": "
      << r.final_graph.nodes.size() << " nodes, " << r.final_graph.edges.size() << " edges -> "
      << stem.string() << ".{dot,gexf}";
  if (static_cast<int>(r.metrics.episodes()) < a.episode) msg << " (run converged earlier)";
  info(msg.str());
  return 0;
}

int cmd_stats(const RunArgs& a) {
  const TrainConfig cfg = load_run_config(a.run);
  const std::uint64_t seed = pick_seed(cfg, a);
  const fs::path dir = seed_dir(a.run, seed);
  const fs::path final_graph = dir / "graph_final.dot";
  if (!fs::exists(final_graph)) throw IoError("missing snapshot '" + final_graph.string() + "'");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".dot") continue;
    const DegreeHistogram h = degree_distribution(load_snapshot(entry.path().string()));
    std::size_t total = 0;
    for (const auto& [d, c] : h.counts) total += static_cast<std::size_t>(d) * c;
    if (total != 2 * h.edges) {
      throw Error("degree handshake violated in " + entry.path().string());
    }
  }
  const DegreeHistogram h = degree_distribution(load_snapshot(final_graph.string()));
  const fs::path out = output_dir(a, "stats");
  write_file(out / "degree_hist.csv", degree_histogram_csv(h));
  std::ostringstream msg;
  msg << "seed " << seed << ": " << h.nodes << " nodes, " << h.edges << " edges, average degree "
      << h.average << ", max degree " << h.max;
  info(msg.str());
  return 0;
}

int cmd_table2(const std::vector<std::string>& runs, const std::string& out_dir) {
  std::vector<RunSummary> rows;
  for (const auto& r : runs) rows.push_back(read_run_summary(r));
  const ComparisonTable t = summary_table(rows);
  const fs::path out = out_dir.empty() ? fs::current_path() : fs::path(out_dir);
  fs::create_directories(out);
  write_file(out / "table2.csv", t.to_csv());
  info(t.to_text());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synaptic Q-learning and Bellman memory unit lab for the cart-pole"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  int verbose = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "More output");
  app.add_flag("-q,--quiet", quiet, "Suppress standard output");

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "Train one or more seeds and write a run directory");
  train->add_option("--config", targs.config_path, "Flat key = value config file")
      ->check(CLI::ExistingFile);
  train->add_option("--out", targs.out, "Output run directory")->required();
  train->add_option("--agent", targs.agent, "synaptic | bmu | bmu-pool | qtable");
  train->add_option("--gamma", targs.gamma, "Discount factor in (0, 1)");
  train->add_option("--alpha", targs.alpha, "Learning rate in (0, 1]");
  train->add_option("--epsilon", targs.epsilon, "Initial exploration rate (0 = greedy)");
  train->add_option("--epsilon-decay", targs.epsilon_decay, "Per-episode epsilon multiplier");
  train->add_option("--theta-limit", targs.theta_limit, "Pole angle failure limit (rad)");
  train->add_option("--seeds", targs.seeds, "Number of consecutive seeds");
  train->add_option("--seed", targs.seed, "First seed (default: $BMU_LAB_SEED or 1)");
  train->add_option("--seed-list", targs.seed_list, "Explicit comma-separated seeds");
  train->add_option("--max-episodes", targs.max_episodes, "Episode cap per seed");
  train->add_option("--max-steps", targs.max_steps, "Steps before truncation");
  train->add_option("--snapshot-every", targs.snapshot_every, "Graph snapshot cadence (0 = off)");
  train->add_option("--eval-episodes", targs.eval_episodes, "Greedy episodes after training");
  train->add_option("--pool-capacity", targs.pool_capacity, "Neurons in the bmu-pool ensemble");
  train->add_option("--qtable-mode", targs.qtable_mode, "sparse | dense");
  train->add_option("--set", targs.settings, "Any config key as key=value (repeatable)");
  train->add_option("--jobs", targs.jobs, "Parallel seed workers")
      ->default_val(std::max(1u, std::thread::hardware_concurrency()));

  RunArgs eargs;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a trained run (phase traces)");
  eval->add_option("--run", eargs.run, "Run directory")->required();
  eval->add_option("--episodes", eargs.episodes, "Evaluation episodes")->default_val(1);
  eval->add_option("--seed", eargs.seed, "Which seed of the run (default: first)");
  eval->add_option("--out", eargs.out, "Output directory (default: <run>_eval)");

  RunArgs xargs;
  auto* xport = app.add_subcommand("export-graph", "Write the agent graph after a given episode");
  xport->add_option("--run", xargs.run, "Run directory")->required();
  xport->add_option("--episode", xargs.episode, "Episode number")->required();
  xport->add_option("--seed", xargs.seed, "Which seed of the run (default: first)");
  xport->add_option("--out", xargs.out, "Output directory (default: <run>_export)");

  RunArgs sargs;
  auto* stats = app.add_subcommand("stats", "Degree distribution of a run's final graph");
  stats->add_option("--run", sargs.run, "Run directory")->required();
  stats->add_option("--seed", sargs.seed, "Which seed of the run (default: first)");
  stats->add_option("--out", sargs.out, "Output directory (default: <run>_stats)");

  std::vector<std::string> table_runs;
  std::string table_out;
  auto* table = app.add_subcommand("table2", "Comparison table across runs");
  table->add_option("--runs", table_runs, "Run directories")->required();
  table->add_option("--out", table_out, "Output directory (default: current directory)");

  CLI11_PARSE(app, argc, argv);
  verbosity = quiet ? -1 : verbose;

  try {
    if (*train) return cmd_train(targs);
    if (*eval) return cmd_eval(eargs);
    if (*xport) return cmd_export_graph(xargs);
    if (*stats) return cmd_stats(sargs);
    if (*table) return cmd_table2(table_runs, table_out);
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << " (pool capacity N=" << e.capacity() << ")\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
