#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "terranav/feasibility.hpp"
#include "terranav/geometry.hpp"
#include "terranav/graph.hpp"
#include "terranav/grid_map.hpp"
#include "terranav/height_field.hpp"
#include "terranav/subgoals.hpp"
#include "terranav/tree.hpp"

namespace terranav {

enum class PlannerMode { Pruned, FullTree };

/// Deterministic per-node size used for the memory proxy, so reported bytes
/// do not depend on platform struct layout.
constexpr std::size_t kNodeMemoryProxyBytes = 112;

struct EpisodeConfig {
  TerrainSpec terrain;
  Vec2 start{2.0, 2.0};
  Vec2 target{30.0, 30.0};
  std::int32_t window_w = 33;  // cells
  std::int32_t window_h = 33;  // cells
  double sensing_radius = 6.0;     // meters
  double extension_radius = 1.5;   // meters
  double rebase_threshold = 1.5;   // meters of displacement since last rebase
  FeasibilityParams feasibility;
  CostParams cost;
  int saturation_threshold = 3;    // blocked sectors before a node saturates
  int extends_per_cycle = 48;
  int graph_k_nn = 5;
  double speed = 0.25;             // meters per tick
  std::int64_t max_ticks = 800;
  std::uint64_t seed = 1;
  PlannerMode mode = PlannerMode::Pruned;

  void validate() const {
    terrain.validate();
    if (start == target)
      throw std::invalid_argument("episode.start: must differ from target");
    if (window_w < 4 || window_h < 4)
      throw std::invalid_argument("episode.window: must be at least 4x4 cells");
    if (sensing_radius <= 0.0)
      throw std::invalid_argument("episode.sensing_radius: must be positive");
    if (extension_radius <= 0.0)
      throw std::invalid_argument("tree.extension_radius: must be positive");
    if (rebase_threshold <= 0.0)
      throw std::invalid_argument("episode.rebase_threshold: must be positive");
    if (extends_per_cycle < 1)
      throw std::invalid_argument("episode.extends_per_cycle: must be >= 1");
    if (speed <= 0.0)
      throw std::invalid_argument("episode.speed: must be positive");
    if (max_ticks <= 0)
      throw std::invalid_argument("episode.max_ticks: must be positive");
    if (graph_k_nn < 1)
      throw std::invalid_argument("graph.k_nn: must be >= 1");
    feasibility.validate(terrain.resolution);
    cost.validate();
  }
};

struct TickRow {
  std::int64_t tick = 0;
  Vec2 position;
  double elevation = 0.0;
  std::size_t tree_nodes = 0;
  std::size_t graph_nodes = 0;
  std::size_t graph_edges = 0;
  std::optional<DecisionRecord> decision;
};

struct Segment {
  Vec2 from;
  Vec2 to;
};

struct EpisodeMetrics {
  bool success = false;
  std::string failure_reason;  // empty on success
  std::int64_t ticks_used = 0;
  std::vector<TickRow> series;        // tick 0 row is the start pose
  std::vector<Segment> executed;      // validated executed pieces, in order
  std::vector<DecisionRecord> decisions;
  std::vector<Vec2> rebase_positions;
  double path_length = 0.0;
  double roughness = 0.0;  // mean |dh| per meter over executed pieces
  std::size_t peak_tree_nodes = 0;
  std::size_t final_tree_nodes = 0;
  std::size_t final_graph_nodes = 0;
  std::size_t final_graph_edges = 0;

  std::size_t peak_memory_proxy() const {
    return peak_tree_nodes * kNodeMemoryProxyBytes;
  }
  std::size_t final_memory_proxy() const {
    return final_tree_nodes * kNodeMemoryProxyBytes;
  }
};

/// One mapless-navigation episode: the receding-horizon cycle of sensing,
/// tree extension, graph maintenance, decision making and waypoint-exact
/// motion, repeated until the target is reached or the planner gives up.
class Episode {
 public:
  explicit Episode(const EpisodeConfig& config)
      : cfg_(config),
        field_(config.terrain.kind == TerrainKind::Imported
                   ? load_height_field(config.terrain.file)
                   : generate_terrain(config.terrain)),
        known_(field_.resolution()),
        hazards_(field_.resolution()),
        tree_(config.extension_radius),
        graph_(field_.resolution() / 2.0),
        rng_(config.seed) {
    cfg_.validate();
    if (!field_.in_bounds(cfg_.start))
      throw std::invalid_argument("episode.start: outside terrain");
    if (!field_.in_bounds(cfg_.target))
      throw std::invalid_argument("episode.target: outside terrain");

    const double res = field_.resolution();
    const CellIndex lo = world_to_cell(field_.origin(), res);
    hazards_.set_bounds(lo, {lo.x + field_.cells_x() - 1,
                             lo.y + field_.cells_y() - 1});

    robot_ = cfg_.start;
    last_rebase_ = robot_;
    visited_.insert(cell_key(world_to_cell(robot_, res)));

    map_ = LocalGridMap::sense(field_, robot_, cfg_.sensing_radius,
                               cfg_.window_w, cfg_.window_h, nullptr);
    known_.absorb(map_);
    const auto elev = map_.elevation_at(robot_);
    tree_.init_root(robot_, elev ? *elev : field_.cell_value_at(robot_));
    metrics_.rebase_positions.push_back(robot_);

    metrics_.series.push_back(make_row(0, std::nullopt));
    metrics_.peak_tree_nodes = tree_.size();
  }

  const EpisodeConfig& config() const { return cfg_; }
  const HeightField& field() const { return field_; }
  const Tree& tree() const { return tree_; }
  const Graph& graph() const { return graph_; }
  const LocalGridMap& map() const { return map_; }
  const HazardLayer& hazards() const { return hazards_; }
  const KnownTerrain& known_terrain() const { return known_; }
  const Vec2& robot() const { return robot_; }
  bool done() const { return status_ != Status::Running; }
  bool succeeded() const { return status_ == Status::Succeeded; }

  /// One receding-horizon cycle. No-op once the episode has terminated.
  void step() {
    if (done()) return;
    ++tick_;

    // 1. Sense and fold into the persistent records.
    map_ = LocalGridMap::sense(field_, robot_, cfg_.sensing_radius,
                               cfg_.window_w, cfg_.window_h, &map_);
    known_.absorb(map_);
    project_hazards();

    // 2. Tree extension.
    for (int i = 0; i < cfg_.extends_per_cycle; ++i) {
      tree_.extend(map_, rng_, cfg_.feasibility, cfg_.saturation_threshold,
                   hazards_, &visited_);
    }

    // 3. Rebase: harvest into the graph, prune (or not), connect.
    if (distance(robot_, last_rebase_) >= cfg_.rebase_threshold) {
      const auto new_ids = graph_.harvest(tree_, cfg_.extension_radius);
      if (cfg_.mode == PlannerMode::Pruned) {
        tree_.prune_and_rebase(robot_, map_);
      } else {
        tree_.rebase_only(robot_);
      }
      metrics_.rebase_positions.push_back(
          tree_.node(tree_.root_id()).position);
      graph_.connect(new_ids, known_view(), cfg_.feasibility, cfg_.graph_k_nn);
      last_rebase_ = robot_;
      route_.reset();  // a root change re-opens the subgoal decision
    }

    // 4. Candidate upkeep on the tree and the graph.
    auto local_set = update_candidates(tree_, map_, cfg_.cost, tick_,
                                       cfg_.extension_radius);
    refresh_graph_candidates();

    // 5-7. Decide, (re)plan, advance.
    std::optional<DecisionRecord> decision;
    if (distance(robot_, cfg_.target) <= cfg_.cost.reach_eps) {
      finish_success();
    } else {
      plan(local_set, decision);
      if (!done()) {
        advance();
        if (distance(robot_, cfg_.target) <= cfg_.cost.reach_eps)
          finish_success();
      }
    }

    metrics_.series.push_back(make_row(tick_, decision));
    metrics_.peak_tree_nodes =
        std::max(metrics_.peak_tree_nodes, tree_.size());
    if (!done() && tick_ >= cfg_.max_ticks) {
      status_ = Status::Failed;
      metrics_.failure_reason = "max_ticks";
      finalize();
    }
  }

  EpisodeMetrics run() {
    while (!done()) step();
    return metrics_;
  }

 private:
  enum class Status { Running, Succeeded, Failed };

  struct Route {
    std::vector<Vec2> waypoints;
    std::size_t next = 0;
    bool direct = false;
    std::optional<std::pair<SubgoalSource, std::uint32_t>> target_node;

    bool finished() const { return next >= waypoints.size(); }
  };

  KnownTerrainView known_view() const { return {&known_, &hazards_}; }

  TickRow make_row(std::int64_t tick,
                   const std::optional<DecisionRecord>& decision) const {
    TickRow row;
    row.tick = tick;
    row.position = robot_;
    const auto e = field_.elevation_at(robot_);
    row.elevation = e ? *e : field_.cell_value_at(robot_);
    row.tree_nodes = tree_.size();
    row.graph_nodes = graph_.node_count();
    row.graph_edges = graph_.edge_count();
    row.decision = decision;
    return row;
  }

  void project_hazards() {
    for (std::int64_t key : hazards_.raw()) {
      const CellIndex c{static_cast<std::int32_t>(key >> 32),
                        static_cast<std::int32_t>(key & 0xffffffffLL)};
      map_.flag_hazard(c);
    }
  }

  /// O(n) pass over graph candidates: a candidate inside the window is
  /// re-measured; it is retired once its surroundings are explored past the
  /// threshold or the robot has effectively reached it.
  void refresh_graph_candidates() {
    for (const auto& [id, n] : graph_.nodes()) {
      if (n.kind != GraphNodeKind::CandidateTarget || n.consumed) continue;
      if (distance(n.position, robot_) <= cfg_.cost.reach_eps) {
        graph_.mark_consumed(id);
        continue;
      }
      if (map_.in_window(n.position)) {
        const double nabla =
            coverage_ratio(n.position, map_, cfg_.extension_radius);
        graph_.update_nabla(id, nabla);
        if (nabla > cfg_.cost.delta) graph_.mark_consumed(id);
      }
    }
  }

  std::vector<Subgoal> global_set() const {
    std::vector<Subgoal> out;
    for (const auto& [id, n] : graph_.nodes()) {
      if (n.kind != GraphNodeKind::CandidateTarget || n.consumed) continue;
      if (map_.in_window(n.position)) continue;  // local scope handles these
      out.push_back({n.position, SubgoalSource::Global, id, n.nabla_max, 0.0});
    }
    return out;
  }

  /// A followed route is replanned only when finished or when an upcoming
  /// segment crosses a fresh hazard or stops checking Feasible; the state of
  /// the subgoal it was planned for does not retract a route.
  bool route_valid() const {
    if (!route_ || route_->finished()) return false;
    Vec2 prev = robot_;
    for (std::size_t i = route_->next; i < route_->waypoints.size(); ++i) {
      const Vec2& wp = route_->waypoints[i];
      if (distance(prev, wp) > 0.0 &&
          !check_feasibility(known_view(), prev, wp, cfg_.feasibility)
               .feasible()) {
        return false;
      }
      prev = wp;
    }
    return true;
  }

  void plan(const std::vector<Subgoal>& local_set,
            std::optional<DecisionRecord>& decision) {
    // Short-circuit straight to the target whenever it is in the window and
    // the direct edge checks out; subgoal selection never blocks termination.
    if (tick_ >= direct_retry_tick_ && map_.in_window(cfg_.target) &&
        check_feasibility(map_, robot_, cfg_.target, cfg_.feasibility)
            .feasible()) {
      route_ = Route{{cfg_.target}, 0, true, std::nullopt};
      return;
    }
    if (route_valid()) return;

    route_.reset();
    std::vector<Subgoal> global = global_set();
    std::vector<Subgoal> local = local_set;
    while (true) {
      const auto sel =
          select_subgoal(local, global, cfg_.cost, cfg_.target, tree_);
      if (!sel) {
        // Both subgoal sets empty. The tree may just not have grown out to
        // the window boundary yet, so keep extending for a bounded number of
        // ticks before declaring the episode stuck.
        if (++planless_ticks_ >= kNoSubgoalPatience) {
          status_ = Status::Failed;
          metrics_.failure_reason = "no_subgoal";
          finalize();
        }
        return;
      }
      planless_ticks_ = 0;
      Route candidate_route;
      bool ok = false;
      if (sel->route == SubgoalSource::Local) {
        candidate_route.waypoints.clear();
        for (NodeId id : tree_.path_from_root(sel->subgoal.node))
          candidate_route.waypoints.push_back(tree_.node(id).position);
        candidate_route.target_node = {SubgoalSource::Local,
                                       sel->subgoal.node};
        ok = true;
      } else {
        const auto path = graph_.shortest_path(robot_, sel->subgoal.node,
                                               known_view(), cfg_.feasibility);
        if (path) {
          for (GraphNodeId id : path->nodes)
            candidate_route.waypoints.push_back(graph_.node(id).position);
          candidate_route.target_node = {SubgoalSource::Global,
                                         sel->subgoal.node};
          ok = true;
        }
      }
      if (ok) {
        route_ = candidate_route;
        // Reject routes that are already invalid (e.g. crossing a fresh
        // hazard); retire the subgoal so the next pick differs.
        if (!route_valid()) {
          route_.reset();
          ok = false;
        }
      }
      if (ok) {
        DecisionRecord rec;
        rec.tick = tick_;
        rec.n_local = static_cast<int>(local.size());
        rec.n_global = static_cast<int>(global.size());
        rec.subgoal = sel->subgoal.position;
        rec.cost = sel->subgoal.cost;
        rec.branch = sel->route;
        decision = rec;
        metrics_.decisions.push_back(rec);
        return;
      }
      retire(sel->subgoal, local, global);
    }
  }

  void retire(const Subgoal& s, std::vector<Subgoal>& local,
              std::vector<Subgoal>& global) {
    if (s.source == SubgoalSource::Local) {
      if (tree_.contains(s.node)) {
        tree_.mutable_node(s.node).candidate.phase =
            CandidateState::Phase::Disqualified;
      }
      std::erase_if(local, [&](const Subgoal& x) { return x.node == s.node; });
    } else {
      if (graph_.contains(s.node)) graph_.mark_consumed(s.node);
      std::erase_if(global, [&](const Subgoal& x) { return x.node == s.node; });
    }
  }

  void advance() {
    if (!route_) return;
    double budget = cfg_.speed;
    while (budget > 1e-12 && !route_->finished()) {
      // Greedy line-of-sight shortcut: skip waypoints that can be bypassed
      // by a feasible straight edge.
      while (route_->next + 1 < route_->waypoints.size() &&
             check_feasibility(known_view(), robot_,
                               route_->waypoints[route_->next + 1],
                               cfg_.feasibility)
                 .feasible()) {
        ++route_->next;
      }
      const Vec2& wp = route_->waypoints[route_->next];
      const double d = distance(robot_, wp);
      if (d <= 1e-12) {
        ++route_->next;
        continue;
      }
      const double step_len = std::min(d, budget);
      const Vec2 to =
          step_len == d
              ? wp
              : Vec2{robot_.x + (wp.x - robot_.x) * (step_len / d),
                     robot_.y + (wp.y - robot_.y) * (step_len / d)};
      if (!check_feasibility(known_view(), robot_, to, cfg_.feasibility)
               .feasible()) {
        // Executing this piece is not provably safe; retire the route and
        // let the next tick replan.
        if (route_->direct) direct_retry_tick_ = tick_ + 20;
        if (route_->target_node) {
          const auto& [src, id] = *route_->target_node;
          if (src == SubgoalSource::Local && tree_.contains(id)) {
            tree_.mutable_node(id).candidate.phase =
                CandidateState::Phase::Disqualified;
          } else if (src == SubgoalSource::Global && graph_.contains(id)) {
            graph_.mark_consumed(id);
          }
        }
        route_.reset();
        return;
      }
      metrics_.executed.push_back({robot_, to});
      record_traversal(robot_, to);
      metrics_.path_length += step_len;
      const auto h_from = field_.elevation_at(robot_);
      const auto h_to = field_.elevation_at(to);
      if (h_from && h_to) abs_climb_ += std::abs(*h_to - *h_from);
      robot_ = to;
      budget -= step_len;
      if (robot_ == wp) ++route_->next;
    }
    if (route_->finished()) route_.reset();
  }

  void record_traversal(const Vec2& from, const Vec2& to) {
    traverse_cells(from, to, field_.resolution(), [&](const CellIndex& c) {
      visited_.insert(cell_key(c));
      return true;
    });
  }

  void finish_success() {
    status_ = Status::Succeeded;
    finalize();
  }

  void finalize() {
    metrics_.success = status_ == Status::Succeeded;
    metrics_.ticks_used = tick_;
    metrics_.roughness =
        metrics_.path_length > 0.0 ? abs_climb_ / metrics_.path_length : 0.0;
    // The standing root becomes history too: harvest so the final rebase
    // position is recorded in the graph.
    const auto new_ids = graph_.harvest(tree_, cfg_.extension_radius);
    graph_.connect(new_ids, known_view(), cfg_.feasibility, cfg_.graph_k_nn);
    metrics_.final_tree_nodes = tree_.size();
    metrics_.peak_tree_nodes =
        std::max(metrics_.peak_tree_nodes, tree_.size());
    metrics_.final_graph_nodes = graph_.node_count();
    metrics_.final_graph_edges = graph_.edge_count();
  }

  EpisodeConfig cfg_;
  HeightField field_;
  KnownTerrain known_;
  HazardLayer hazards_;
  LocalGridMap map_;
  Tree tree_;
  Graph graph_;
  Rng rng_;
  Vec2 robot_;
  Vec2 last_rebase_;
  std::optional<Route> route_;
  std::unordered_set<std::int64_t> visited_;
  static constexpr int kNoSubgoalPatience = 25;

  std::int64_t tick_ = 0;
  std::int64_t direct_retry_tick_ = 0;
  int planless_ticks_ = 0;
  double abs_climb_ = 0.0;
  Status status_ = Status::Running;
  EpisodeMetrics metrics_;
};

inline EpisodeMetrics run_episode(const EpisodeConfig& config) {
  Episode ep(config);
  return ep.run();
}

}  // namespace terranav
