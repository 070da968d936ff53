#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "bmu/error.hpp"

namespace bmu {

struct SnapshotNode {
  std::string state_key;  // also the node id
  double value = 0.0;
  int fan_in = 0;

  friend bool operator==(const SnapshotNode&, const SnapshotNode&) = default;
};

struct SnapshotEdge {
  std::string source;
  std::string target;
  int action = 0;
  double q = 0.0;
  bool gate_open = false;
  bool greedy = false;  // action is the source's current argmax

  friend bool operator==(const SnapshotEdge&, const SnapshotEdge&) = default;
};

// Read-only view of an agent's topology taken between episodes.
struct GraphSnapshot {
  std::vector<SnapshotNode> nodes;
  std::vector<SnapshotEdge> edges;

  friend bool operator==(const GraphSnapshot&, const GraphSnapshot&) = default;
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad numeric value '" + s + "' for " + what);
  }
}

inline int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw ParseError("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad integer value '" + s + "' for " + what);
  }
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string xml_unescape(const std::string& s) {
  static const std::pair<const char*, char> table[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool hit = false;
    if (s[i] == '&') {
      for (const auto& [entity, ch] : table) {
        const std::string_view e(entity);
        if (s.compare(i, e.size(), e) == 0) {
          out += ch;
          i += e.size();
          hit = true;
          break;
        }
      }
    }
    if (!hit) out += s[i++];
  }
  return out;
}

// key=value pairs separated by commas; values may be double-quoted.
inline std::map<std::string, std::string> parse_dot_attributes(const std::string& body) {
  static const std::regex attr(R"re(\s*(\w+)\s*=\s*("([^"]*)"|[^,\s]+)\s*,?)re");
  std::map<std::string, std::string> out;
  for (auto it = std::sregex_iterator(body.begin(), body.end(), attr); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    out[m[1].str()] = m[3].matched ? m[3].str() : m[2].str();
  }
  return out;
}

inline const std::string& require(const std::map<std::string, std::string>& attrs,
                                  const std::string& key, const std::string& where) {
  const auto it = attrs.find(key);
  if (it == attrs.end()) throw ParseError("missing attribute '" + key + "' on " + where);
  return it->second;
}

}  // namespace detail

inline void write_dot(std::ostream& os, const GraphSnapshot& g) {
  os << "digraph agent {\n";
  for (const auto& n : g.nodes) {
    os << "  \"" << n.state_key << "\" [state_key=\"" << n.state_key
       << "\", value=" << detail::format_double(n.value) << ", fan_in=" << n.fan_in << "];\n";
  }
  for (const auto& e : g.edges) {
    os << "  \"" << e.source << "\" -> \"" << e.target << "\" [action=" << e.action
       << ", q=" << detail::format_double(e.q) << ", gate=\""
       << (e.gate_open ? "open" : "closed") << "\", greedy=" << (e.greedy ? "true" : "false")
       << "];\n";
  }
  os << "}\n";
}

// Reads the DOT dialect produced by write_dot.
inline GraphSnapshot read_dot(std::istream& is) {
  static const std::regex edge_re(R"re(^\s*"([^"]+)"\s*->\s*"([^"]+)"\s*\[(.*)\]\s*;?\s*$)re");
  static const std::regex node_re(R"re(^\s*"([^"]+)"\s*\[(.*)\]\s*;?\s*$)re");
  GraphSnapshot g;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    std::smatch m;
    const std::string where = "line " + std::to_string(lineno);
    if (std::regex_match(line, m, edge_re)) {
      const auto attrs = detail::parse_dot_attributes(m[3].str());
      SnapshotEdge e;
      e.source = m[1].str();
      e.target = m[2].str();
      e.action = detail::parse_int(detail::require(attrs, "action", where), "action");
      e.q = detail::parse_double(detail::require(attrs, "q", where), "q");
      e.gate_open = detail::require(attrs, "gate", where) == "open";
      const auto greedy = attrs.find("greedy");
      e.greedy = greedy != attrs.end() && greedy->second == "true";
      g.edges.push_back(std::move(e));
    } else if (std::regex_match(line, m, node_re)) {
      const auto attrs = detail::parse_dot_attributes(m[2].str());
      SnapshotNode n;
      n.state_key = m[1].str();
      n.value = detail::parse_double(detail::require(attrs, "value", where), "value");
      n.fan_in = detail::parse_int(detail::require(attrs, "fan_in", where), "fan_in");
      g.nodes.push_back(std::move(n));
    } else if (line.find("digraph") != std::string::npos) {
      header = true;
    } else if (line.find_first_not_of(" \t\r}") != std::string::npos) {
      throw ParseError("unrecognised DOT statement at " + where + ": " + line);
    }
  }
  if (!header) throw ParseError("DOT input has no digraph header");
  return g;
}

inline void write_gexf(std::ostream& os, const GraphSnapshot& g) {
  using detail::xml_escape;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<gexf xmlns=\"http://gexf.net/1.3\" version=\"1.3\">\n"
     << "  <graph defaultedgetype=\"directed\" mode=\"static\">\n"
     << "    <attributes class=\"node\">\n"
     << "      <attribute id=\"0\" title=\"state_key\" type=\"string\"/>\n"
     << "      <attribute id=\"1\" title=\"value\" type=\"double\"/>\n"
     << "      <attribute id=\"2\" title=\"fan_in\" type=\"integer\"/>\n"
     << "    </attributes>\n"
     << "    <attributes class=\"edge\">\n"
     << "      <attribute id=\"0\" title=\"action\" type=\"integer\"/>\n"
     << "      <attribute id=\"1\" title=\"q\" type=\"double\"/>\n"
     << "      <attribute id=\"2\" title=\"gate\" type=\"string\"/>\n"
     << "      <attribute id=\"3\" title=\"greedy\" type=\"boolean\"/>\n"
     << "    </attributes>\n"
     << "    <nodes>\n";
  for (const auto& n : g.nodes) {
    const std::string id = xml_escape(n.state_key);
    os << "      <node id=\"" << id << "\" label=\"" << id << "\">\n"
       << "        <attvalues>\n"
       << "          <attvalue for=\"0\" value=\"" << id << "\"/>\n"
       << "          <attvalue for=\"1\" value=\"" << detail::format_double(n.value) << "\"/>\n"
       << "          <attvalue for=\"2\" value=\"" << n.fan_in << "\"/>\n"
       << "        </attvalues>\n"
       << "      </node>\n";
  }
  os << "    </nodes>\n    <edges>\n";
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    os << "      <edge id=\"" << i << "\" source=\"" << xml_escape(e.source) << "\" target=\""
       << xml_escape(e.target) << "\">\n"
       << "        <attvalues>\n"
       << "          <attvalue for=\"0\" value=\"" << e.action << "\"/>\n"
       << "          <attvalue for=\"1\" value=\"" << detail::format_double(e.q) << "\"/>\n"
       << "          <attvalue for=\"2\" value=\"" << (e.gate_open ? "open" : "closed") << "\"/>\n"
       << "          <attvalue for=\"3\" value=\"" << (e.greedy ? "true" : "false") << "\"/>\n"
       << "        </attvalues>\n"
       << "      </edge>\n";
  }
  os << "    </edges>\n  </graph>\n</gexf>\n";
}

// Reads GEXF files with the attribute layout produced by write_gexf.
inline GraphSnapshot read_gexf(std::istream& is) {
  const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  static const std::regex tag_re(R"re(<(/?)([A-Za-z]+)([^>]*?)(/?)>)re");
  static const std::regex attr_re(R"re(([A-Za-z_]+)="([^"]*)")re");

  auto attributes = [](const std::string& body) {
    std::map<std::string, std::string> out;
    for (auto it = std::sregex_iterator(body.begin(), body.end(), attr_re);
         it != std::sregex_iterator(); ++it) {
      out[(*it)[1].str()] = detail::xml_unescape((*it)[2].str());
    }
    return out;
  };

  GraphSnapshot g;
  enum class Scope { None, Node, Edge } scope = Scope::None;
  bool seen_root = false;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), tag_re);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const bool closing = m[1].length() > 0;
    const std::string name = m[2].str();
    if (name == "gexf") seen_root = true;
    if (closing) {
      if (name == "node" || name == "edge") scope = Scope::None;
      continue;
    }
    const auto attrs = attributes(m[3].str());
    const bool self_closing = m[4].length() > 0;
    if (name == "node") {
      SnapshotNode n;
      n.state_key = detail::require(attrs, "id", "gexf node");
      g.nodes.push_back(std::move(n));
      scope = self_closing ? Scope::None : Scope::Node;
    } else if (name == "edge") {
      SnapshotEdge e;
      e.source = detail::require(attrs, "source", "gexf edge");
      e.target = detail::require(attrs, "target", "gexf edge");
      g.edges.push_back(std::move(e));
      scope = self_closing ? Scope::None : Scope::Edge;
    } else if (name == "attvalue" && scope != Scope::None) {
      const std::string& slot = detail::require(attrs, "for", "gexf attvalue");
      const std::string& value = detail::require(attrs, "value", "gexf attvalue");
      if (scope == Scope::Node) {
        auto& n = g.nodes.back();
        if (slot == "0") n.state_key = value;
        if (slot == "1") n.value = detail::parse_double(value, "node value");
        if (slot == "2") n.fan_in = detail::parse_int(value, "node fan_in");
      } else {
        auto& e = g.edges.back();
        if (slot == "0") e.action = detail::parse_int(value, "edge action");
        if (slot == "1") e.q = detail::parse_double(value, "edge q");
        if (slot == "2") e.gate_open = value == "open";
        if (slot == "3") e.greedy = value == "true";
      }
    }
  }
  if (!seen_root) throw ParseError("input is not a GEXF document");
  return g;
}

// Picks the reader by extension (.dot or .gexf).
inline GraphSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph snapshot '" + path + "'");
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".gexf") == 0) return read_gexf(in);
  return read_dot(in);
}

inline void save_snapshot(const std::string& stem, const GraphSnapshot& g) {
  std::ofstream dot(stem + ".dot");
  std::ofstream gexf(stem + ".gexf");
  if (!dot || !gexf) throw IoError("cannot write graph snapshot '" + stem + "'");
  write_dot(dot, g);
  write_gexf(gexf, g);
}

}  // namespace bmu
