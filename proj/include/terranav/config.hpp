#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "terranav/navigator.hpp"

namespace terranav {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigKey {
  const char* name;
  const char* fallback;  // default value as written in a config file
  const char* doc;
};

/// Every tunable in one table. Paper-unstated parameters get their defaults
/// here; the README mirrors this list.
inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"terrain.kind", "hilly", "hilly | forest | imported"},
      {"terrain.seed", "1", "terrain synthesis seed"},
      {"terrain.area_w", "32", "world width, meters"},
      {"terrain.area_h", "32", "world height, meters"},
      {"terrain.resolution", "0.25", "cell size, meters"},
      {"terrain.amplitude", "2.4", "hill height bound, meters"},
      {"terrain.feature_scale", "10", "hill wavelength, meters"},
      {"terrain.cliff_count", "0", "number of vertical insets"},
      {"terrain.cliff_height", "4", "inset wall height, meters"},
      {"terrain.file", "", "heightmap path for kind=imported"},
      {"episode.start_x", "2", "start position x, meters"},
      {"episode.start_y", "2", "start position y, meters"},
      {"episode.goal_x", "30", "target position x, meters"},
      {"episode.goal_y", "30", "target position y, meters"},
      {"episode.mode", "pruned", "pruned | fulltree"},
      {"episode.window_w", "33", "local window width, cells"},
      {"episode.window_h", "33", "local window height, cells"},
      {"episode.sensing_radius", "6", "ground-truth sensing radius, meters"},
      {"episode.rebase_threshold", "1.5",
       "robot displacement that triggers a rebase, meters"},
      {"episode.extends_per_cycle", "48", "tree expansion attempts per tick"},
      {"episode.speed", "0.25", "robot speed, meters per tick"},
      {"episode.max_ticks", "800", "tick budget per episode"},
      {"episode.seed", "1", "planner sampling seed"},
      {"feasibility.alpha_grad", "0.5773502691896257",
       "per-meta-segment slope limit (tan 30 deg)"},
      {"feasibility.beta_flat", "2", "summed-slope limit per edge"},
      {"feasibility.meta_len", "0",
       "meta segment length, meters; 0 = match map resolution"},
      {"tree.extension_radius", "1.5", "steer/choose-parent radius, meters"},
      {"tree.saturation_threshold", "3",
       "blocked sectors before a node saturates (1..8)"},
      {"cost.w_alpha", "1", "local cost: length share weight"},
      {"cost.w_beta", "1", "local cost: gradient share weight"},
      {"cost.lambda", "0.5", "local cost: turn discount rate"},
      {"cost.delta", "0.6", "coverage threshold for candidacy, (0,1]"},
      {"cost.n_delta", "3", "minimum local candidate count"},
      {"cost.reach_eps", "0.3", "arrival / consumption radius, meters"},
      {"graph.k_nn", "5", "connection attempts per new graph node"},
      {"output.snapshot_every", "0",
       "tree/graph snapshot interval in ticks; 0 = final only"},
      {"sweep.pairs", "",
       "start/goal list: x1,y1,x2,y2 quadruples separated by ';'"},
  };
  return keys;
}

/// Flat key-value configuration with dotted section keys. Unknown keys are
/// rejected by name.
class Config {
 public:
  Config() {
    for (const ConfigKey& k : config_keys()) values_[k.name] = k.fallback;
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw ConfigError("unknown config key: " + key);
    values_[key] = value;
  }

  /// `key = value` lines; '#' starts a comment; blank lines ignored.
  void load_stream(std::istream& is) {
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": expected key = value");
      set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
  }

  void load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    load_stream(is);
  }

  /// `key=value` as given on the command line.
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got: " + assignment);
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
  }

  double get_double(const std::string& key) const {
    const std::string& raw = get(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + raw + "'");
    }
  }

  std::int64_t get_int(const std::string& key) const {
    const std::string& raw = get(key);
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected an integer, got '" + raw + "'");
    }
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

 private:
  std::map<std::string, std::string> values_;
};

inline EpisodeConfig make_episode_config(const Config& c) {
  EpisodeConfig e;
  const std::string kind = c.get("terrain.kind");
  if (kind == "hilly") {
    e.terrain.kind = TerrainKind::Hilly;
  } else if (kind == "forest") {
    e.terrain.kind = TerrainKind::Forest;
  } else if (kind == "imported") {
    e.terrain.kind = TerrainKind::Imported;
  } else {
    throw ConfigError("terrain.kind: expected hilly|forest|imported, got '" +
                      kind + "'");
  }
  e.terrain.seed = static_cast<std::uint64_t>(c.get_int("terrain.seed"));
  e.terrain.area_w = c.get_double("terrain.area_w");
  e.terrain.area_h = c.get_double("terrain.area_h");
  e.terrain.resolution = c.get_double("terrain.resolution");
  e.terrain.amplitude = c.get_double("terrain.amplitude");
  e.terrain.feature_scale = c.get_double("terrain.feature_scale");
  e.terrain.cliff_count = static_cast<int>(c.get_int("terrain.cliff_count"));
  e.terrain.cliff_height = c.get_double("terrain.cliff_height");
  e.terrain.file = c.get("terrain.file");
  e.start = {c.get_double("episode.start_x"), c.get_double("episode.start_y")};
  e.target = {c.get_double("episode.goal_x"), c.get_double("episode.goal_y")};
  const std::string mode = c.get("episode.mode");
  if (mode == "pruned") {
    e.mode = PlannerMode::Pruned;
  } else if (mode == "fulltree") {
    e.mode = PlannerMode::FullTree;
  } else {
    throw ConfigError("episode.mode: expected pruned|fulltree, got '" + mode +
                      "'");
  }
  e.window_w = static_cast<std::int32_t>(c.get_int("episode.window_w"));
  e.window_h = static_cast<std::int32_t>(c.get_int("episode.window_h"));
  e.sensing_radius = c.get_double("episode.sensing_radius");
  e.rebase_threshold = c.get_double("episode.rebase_threshold");
  e.extends_per_cycle =
      static_cast<int>(c.get_int("episode.extends_per_cycle"));
  e.speed = c.get_double("episode.speed");
  e.max_ticks = c.get_int("episode.max_ticks");
  e.seed = static_cast<std::uint64_t>(c.get_int("episode.seed"));
  e.feasibility.alpha_grad = c.get_double("feasibility.alpha_grad");
  e.feasibility.beta_flat = c.get_double("feasibility.beta_flat");
  const double meta = c.get_double("feasibility.meta_len");
  e.feasibility.meta_len = meta > 0.0 ? meta : e.terrain.resolution;
  e.extension_radius = c.get_double("tree.extension_radius");
  e.saturation_threshold =
      static_cast<int>(c.get_int("tree.saturation_threshold"));
  e.cost.w_alpha = c.get_double("cost.w_alpha");
  e.cost.w_beta = c.get_double("cost.w_beta");
  e.cost.lambda = c.get_double("cost.lambda");
  e.cost.delta = c.get_double("cost.delta");
  e.cost.n_delta = static_cast<int>(c.get_int("cost.n_delta"));
  e.cost.reach_eps = c.get_double("cost.reach_eps");
  e.graph_k_nn = static_cast<int>(c.get_int("graph.k_nn"));
  return e;
}

/// Start/goal quadruples for a sweep: "x1,y1,x2,y2 ; x1,y1,x2,y2 ; ...".
inline std::vector<std::pair<Vec2, Vec2>> parse_sweep_pairs(
    const std::string& raw) {
  std::vector<std::pair<Vec2, Vec2>> out;
  std::stringstream groups(raw);
  std::string group;
  while (std::getline(groups, group, ';')) {
    const std::string g = Config::trim(group);
    if (g.empty()) continue;
    std::stringstream fields(g);
    std::string field;
    std::vector<double> v;
    while (std::getline(fields, field, ',')) {
      try {
        v.push_back(std::stod(Config::trim(field)));
      } catch (const std::exception&) {
        throw ConfigError("sweep.pairs: expected a number, got '" + field +
                          "'");
      }
    }
    if (v.size() != 4)
      throw ConfigError("sweep.pairs: each entry needs x1,y1,x2,y2");
    out.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  return out;
}

}  // namespace terranav
