#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "terranav/feasibility.hpp"
#include "terranav/geometry.hpp"
#include "terranav/grid_map.hpp"
#include "terranav/tree.hpp"

namespace terranav {

using GraphNodeId = std::uint32_t;

enum class GraphNodeKind { CandidateTarget, Root, Waypoint };

inline const char* to_string(GraphNodeKind k) {
  switch (k) {
    case GraphNodeKind::CandidateTarget: return "candidate";
    case GraphNodeKind::Root: return "root";
    default: return "waypoint";
  }
}

struct GraphNode {
  GraphNodeId id = 0;
  Vec2 position;
  double elevation = 0.0;
  GraphNodeKind kind = GraphNodeKind::Waypoint;
  double nabla_max = 0.0;  // recorded coverage ratio, CandidateTarget only
  bool consumed = false;
};

struct GraphEdge {
  GraphNodeId to = 0;
  double weight = 0.0;    // planar length, meters
  double gradient = 0.0;  // mean |slope| annotation
};

/// Persistent roadmap of harvested tree nodes. Vertices come from the tree,
/// never from fresh sampling; the structure only grows for the life of the
/// mission.
class Graph {
 public:
  explicit Graph(double merge_radius) : merge_radius_(merge_radius) {
    if (merge_radius <= 0.0)
      throw std::invalid_argument("graph: merge radius must be positive");
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::map<GraphNodeId, GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphNodeId>& root_sequence() const {
    return root_sequence_;
  }

  const GraphNode& node(GraphNodeId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::out_of_range("graph: no such node");
    return it->second;
  }
  bool contains(GraphNodeId id) const { return nodes_.count(id) != 0; }

  void mark_consumed(GraphNodeId id) { nodes_.at(id).consumed = true; }
  void update_nabla(GraphNodeId id, double nabla) {
    GraphNode& n = nodes_.at(id);
    n.nabla_max = std::max(n.nabla_max, std::min(1.0, std::max(0.0, nabla)));
  }

  const std::vector<GraphEdge>& edges_of(GraphNodeId id) const {
    static const std::vector<GraphEdge> kEmpty;
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? kEmpty : it->second;
  }

  /// Nearest node id, ties by lowest id; nullopt on an empty graph.
  std::optional<GraphNodeId> nearest(const Vec2& p) const {
    std::optional<GraphNodeId> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [id, n] : nodes_) {
      const double d = distance(n.position, p);
      if (d < best_d) {
        best_d = d;
        best = id;
      }
    }
    return best;
  }

  /// Adds or merges a node. Positions within the merge radius fold into the
  /// existing node, keeping the more specific kind
  /// (CandidateTarget > Root > Waypoint) and the larger nabla_max.
  GraphNodeId add_or_merge(const Vec2& position, double elevation,
                           GraphNodeKind kind, double nabla_max,
                           bool* merged = nullptr) {
    for (auto& [id, n] : nodes_) {
      if (distance(n.position, position) <= merge_radius_) {
        if (rank(kind) > rank(n.kind)) n.kind = kind;
        if (kind == GraphNodeKind::CandidateTarget)
          n.nabla_max = std::max(n.nabla_max, nabla_max);
        if (merged) *merged = true;
        return id;
      }
    }
    GraphNode n;
    n.id = next_id_++;
    n.position = position;
    n.elevation = elevation;
    n.kind = kind;
    n.nabla_max = kind == GraphNodeKind::CandidateTarget ? nabla_max : 0.0;
    const GraphNodeId id = n.id;
    nodes_.emplace(id, n);
    if (merged) *merged = false;
    return id;
  }

  /// Harvests the tree into the graph at a rebase: the outgoing root, every
  /// current candidate-target node, and the branch nodes from the root to
  /// each candidate (subsampled to at least the spacing). Returns ids of
  /// nodes that are new or were re-merged by this call.
  std::vector<GraphNodeId> harvest(const Tree& tree, double spacing) {
    std::vector<GraphNodeId> touched;
    if (tree.empty()) return touched;

    const TreeNode& root = tree.node(tree.root_id());
    const GraphNodeId root_gid = add_or_merge(
        root.position, root.elevation, GraphNodeKind::Root, 0.0);
    touched.push_back(root_gid);
    root_sequence_.push_back(root_gid);

    for (const auto& [tid, tn] : tree.nodes()) {
      if (tn.candidate.phase != CandidateState::Phase::Candidate) continue;
      const GraphNodeId cand_gid =
          add_or_merge(tn.position, tn.elevation,
                       GraphNodeKind::CandidateTarget, tn.candidate.nabla_max);
      touched.push_back(cand_gid);

      // Branch waypoints, spaced >= `spacing` along the root path.
      double since_last = 0.0;
      const std::vector<NodeId> path = tree.path_from_root(tid);
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const TreeNode& wp = tree.node(path[i]);
        since_last += wp.edge_length;
        if (since_last >= spacing) {
          touched.push_back(add_or_merge(wp.position, wp.elevation,
                                         GraphNodeKind::Waypoint, 0.0));
          since_last = 0.0;
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    return touched;
  }

  /// Tries edges from each new node to its k nearest peers; an edge is kept
  /// iff it checks Feasible over the known-terrain record. Returns the number
  /// of edges added.
  template <TerrainView V>
  int connect(const std::vector<GraphNodeId>& new_ids, const V& view,
              const FeasibilityParams& params, int k_nn) {
    int added = 0;
    for (GraphNodeId id : new_ids) {
      if (!contains(id)) continue;
      const GraphNode& n = nodes_.at(id);
      std::vector<std::pair<double, GraphNodeId>> peers;
      for (const auto& [oid, other] : nodes_) {
        if (oid == id) continue;
        peers.emplace_back(distance(other.position, n.position), oid);
      }
      std::sort(peers.begin(), peers.end());
      const int limit = std::min<std::size_t>(k_nn, peers.size());
      for (int i = 0; i < limit; ++i) {
        const GraphNodeId oid = peers[i].second;
        if (has_edge(id, oid)) continue;
        if (peers[i].first == 0.0) continue;
        if (!check_feasibility(view, n.position, nodes_.at(oid).position,
                               params)
                 .feasible())
          continue;
        const double grad = mean_abs_gradability(
            view, n.position, nodes_.at(oid).position, params.meta_len);
        add_edge(id, oid, peers[i].first, grad);
        ++added;
      }
    }
    return added;
  }

  bool has_edge(GraphNodeId a, GraphNodeId b) const {
    for (const GraphEdge& e : edges_of(a))
      if (e.to == b) return true;
    return false;
  }

  void add_edge(GraphNodeId a, GraphNodeId b, double weight, double gradient) {
    if (a == b) throw std::invalid_argument("graph: self loop");
    if (has_edge(a, b)) return;
    adjacency_[a].push_back({b, weight, gradient});
    adjacency_[b].push_back({a, weight, gradient});
    ++edge_count_;
  }

  struct PathResult {
    std::vector<GraphNodeId> nodes;
    double weight = 0.0;
  };

  /// Uniform-cost search from the graph node nearest `from` (which must be
  /// connectable by a feasible virtual edge) to `to`. nullopt when
  /// unreachable or when the entry edge is not feasible.
  template <TerrainView V>
  std::optional<PathResult> shortest_path(const Vec2& from, GraphNodeId to,
                                          const V& view,
                                          const FeasibilityParams& params) const {
    if (nodes_.empty() || !contains(to)) return std::nullopt;
    const auto entry = nearest(from);
    if (!entry) return std::nullopt;
    if (distance(nodes_.at(*entry).position, from) > 0.0 &&
        !check_feasibility(view, from, nodes_.at(*entry).position, params)
             .feasible()) {
      return std::nullopt;
    }
    return dijkstra(*entry, to);
  }

  /// Plain graph-only query between two nodes.
  std::optional<PathResult> dijkstra(GraphNodeId from, GraphNodeId to) const {
    if (!contains(from) || !contains(to)) return std::nullopt;
    std::map<GraphNodeId, double> dist;
    std::map<GraphNodeId, GraphNodeId> prev;
    using Item = std::pair<double, GraphNodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[from] = 0.0;
    open.push({0.0, from});
    while (!open.empty()) {
      const auto [d, cur] = open.top();
      open.pop();
      if (d > dist.at(cur)) continue;
      if (cur == to) break;
      for (const GraphEdge& e : edges_of(cur)) {
        const double nd = d + e.weight;
        auto it = dist.find(e.to);
        if (it == dist.end() || nd < it->second) {
          dist[e.to] = nd;
          prev[e.to] = cur;
          open.push({nd, e.to});
        }
      }
    }
    if (!dist.count(to)) return std::nullopt;
    PathResult res;
    res.weight = dist.at(to);
    GraphNodeId cur = to;
    res.nodes.push_back(cur);
    while (cur != from) {
      cur = prev.at(cur);
      res.nodes.push_back(cur);
    }
    std::reverse(res.nodes.begin(), res.nodes.end());
    return res;
  }

  /// Snapshot: header `N E`, then N node lines `id kind x y elev nabla_max`,
  /// then E edge lines `id_a id_b weight` (each undirected edge once,
  /// lower id first).
  void snapshot(std::ostream& os) const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu %zu\n", nodes_.size(), edge_count_);
    os << buf;
    for (const auto& [id, n] : nodes_) {
      std::snprintf(buf, sizeof(buf), "%u %s %.6f %.6f %.6f %.6f\n", id,
                    to_string(n.kind), n.position.x, n.position.y, n.elevation,
                    n.nabla_max);
      os << buf;
    }
    for (const auto& [id, edges] : adjacency_) {
      for (const GraphEdge& e : edges) {
        if (e.to < id) continue;
        std::snprintf(buf, sizeof(buf), "%u %u %.6f\n", id, e.to, e.weight);
        os << buf;
      }
    }
  }

 private:
  static int rank(GraphNodeKind k) {
    switch (k) {
      case GraphNodeKind::CandidateTarget: return 2;
      case GraphNodeKind::Root: return 1;
      default: return 0;
    }
  }

  double merge_radius_;
  GraphNodeId next_id_ = 1;
  std::size_t edge_count_ = 0;
  std::map<GraphNodeId, GraphNode> nodes_;
  std::map<GraphNodeId, std::vector<GraphEdge>> adjacency_;
  std::vector<GraphNodeId> root_sequence_;
};

}  // namespace terranav
