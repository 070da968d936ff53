#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bmu/error.hpp"
#include "bmu/graph_io.hpp"
#include "bmu/trainer.hpp"

namespace bmu {

struct DegreeHistogram {
  std::map<int, std::size_t> counts;  // degree -> node count
  double average = 0.0;
  int max = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

// Total degree on the undirected view: every edge adds one to each endpoint,
// so a self-loop adds two to its node.
inline DegreeHistogram degree_distribution(const GraphSnapshot& g) {
  std::unordered_map<std::string, int> degree;
  for (const auto& n : g.nodes) degree.emplace(n.state_key, 0);
  for (const auto& e : g.edges) {
    auto src = degree.find(e.source);
    auto dst = degree.find(e.target);
    if (src == degree.end() || dst == degree.end()) {
      throw PreconditionError("snapshot edge " + e.source + " -> " + e.target +
                              " references an unknown node");
    }
    ++src->second;
    ++dst->second;
  }
  DegreeHistogram h;
  h.nodes = degree.size();
  h.edges = g.edges.size();
  long long total = 0;
  for (const auto& [key, d] : degree) {
    ++h.counts[d];
    total += d;
    h.max = std::max(h.max, d);
  }
  h.average = h.nodes == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(h.nodes);
  return h;
}

inline std::string degree_histogram_csv(const DegreeHistogram& h) {
  std::ostringstream os;
  os << "degree,count\n";
  for (const auto& [d, c] : h.counts) os << d << ',' << c << '\n';
  return os.str();
}

// Final state of one seed's run.
struct SeedSummary {
  std::optional<int> episodes_to_convergence;
  std::optional<double> neurons;
  std::optional<double> avg_fan_in;
  std::optional<double> params;
};

inline SeedSummary summarize(const RunMetrics& m) {
  SeedSummary s;
  s.episodes_to_convergence = m.episodes_to_convergence;
  if (!m.neurons.empty()) s.neurons = static_cast<double>(m.neurons.back());
  if (!m.avg_fan_in.empty()) s.avg_fan_in = m.avg_fan_in.back();
  if (!m.params.empty()) s.params = static_cast<double>(m.params.back());
  return s;
}

struct RunSummary {
  std::string label;  // usually the agent kind
  std::vector<SeedSummary> seeds;
};

struct ComparisonRow {
  std::string label;
  std::optional<double> episodes;  // median over converged seeds
  std::optional<double> neurons;   // means over seeds
  std::optional<double> avg_fan_in;
  std::optional<double> params;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  static std::string cell(const std::optional<double>& v, int decimals) {
    if (!v) return "n/a";
    std::ostringstream os;
    if (std::abs(*v - std::round(*v)) < 1e-9) {
      os << static_cast<long long>(std::llround(*v));
    } else {
      os << std::fixed << std::setprecision(decimals) << *v;
    }
    return os.str();
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "agent,episodes,neurons,avg_fan_in,params\n";
    for (const auto& r : rows) {
      os << r.label << ',' << cell(r.episodes, 1) << ',' << cell(r.neurons, 1) << ','
         << cell(r.avg_fan_in, 3) << ',' << cell(r.params, 1) << '\n';
    }
    return os.str();
  }

  std::string to_text() const {
    const std::vector<std::string> header{"agent", "episodes", "neurons", "fan-in", "params"};
    std::vector<std::vector<std::string>> cells{header};
    for (const auto& r : rows) {
      cells.push_back({r.label, cell(r.episodes, 1), cell(r.neurons, 1), cell(r.avg_fan_in, 3),
                       cell(r.params, 1)});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells) {
      for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream os;
    for (const auto& row : cells) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i == 0) {
          os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
        } else {
          os << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
        }
      }
      os << '\n';
    }
    return os.str();
  }
};

namespace detail {

inline std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// One row per run. Columns with no data at all render as "n/a".
inline ComparisonTable summary_table(const std::vector<RunSummary>& runs) {
  ComparisonTable t;
  for (const auto& run : runs) {
    std::vector<double> episodes, neurons, fan_in, params;
    for (const auto& s : run.seeds) {
      if (s.episodes_to_convergence) episodes.push_back(*s.episodes_to_convergence);
      if (s.neurons) neurons.push_back(*s.neurons);
      if (s.avg_fan_in) fan_in.push_back(*s.avg_fan_in);
      if (s.params) params.push_back(*s.params);
    }
    t.rows.push_back({run.label, detail::median_of(episodes), detail::mean_of(neurons),
                      detail::mean_of(fan_in), detail::mean_of(params)});
  }
  return t;
}

}  // namespace bmu
