#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "terranav/navigator.hpp"

namespace terranav {

/// Write-to-temp, rename-on-complete: no output file is left half written.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string format_double(double v, const char* fmt = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

/// Per-tick trajectory rows. Decision fields are empty on ticks without a
/// decision.
inline std::string trajectory_csv(const EpisodeMetrics& m) {
  std::ostringstream os;
  os << "tick,x,y,elev,tree_nodes,graph_nodes,graph_edges,"
        "branch,subgoal_x,subgoal_y,subgoal_cost\n";
  for (const TickRow& r : m.series) {
    os << r.tick << ',' << format_double(r.position.x) << ','
       << format_double(r.position.y) << ',' << format_double(r.elevation)
       << ',' << r.tree_nodes << ',' << r.graph_nodes << ',' << r.graph_edges
       << ',';
    if (r.decision) {
      os << (r.decision->branch == SubgoalSource::Local ? "local" : "global")
         << ',' << format_double(r.decision->subgoal.x) << ','
         << format_double(r.decision->subgoal.y) << ','
         << format_double(r.decision->cost);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
  return os.str();
}

/// Key-value summary record for one episode.
inline std::string summary_text(const EpisodeMetrics& m) {
  std::ostringstream os;
  os << "success = " << (m.success ? "true" : "false") << '\n';
  os << "failure_reason = " << (m.success ? "" : m.failure_reason) << '\n';
  os << "ticks = " << m.ticks_used << '\n';
  os << "path_length = " << format_double(m.path_length) << '\n';
  os << "roughness = " << format_double(m.roughness) << '\n';
  os << "peak_tree_nodes = " << m.peak_tree_nodes << '\n';
  os << "final_tree_nodes = " << m.final_tree_nodes << '\n';
  os << "final_graph_nodes = " << m.final_graph_nodes << '\n';
  os << "final_graph_edges = " << m.final_graph_edges << '\n';
  os << "peak_memory_proxy_bytes = " << m.peak_memory_proxy() << '\n';
  os << "final_memory_proxy_bytes = " << m.final_memory_proxy() << '\n';
  os << "decisions = " << m.decisions.size() << '\n';
  os << "rebases = " << m.rebase_positions.size() << '\n';
  return os.str();
}

}  // namespace terranav
