#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "terranav/feasibility.hpp"
#include "terranav/geometry.hpp"
#include "terranav/grid_map.hpp"

namespace terranav {

using NodeId = std::uint32_t;

/// Candidate-target lifecycle of a tree node. Disqualification is permanent:
/// a leaf that ever stops being a leaf, or whose coverage ratio ever exceeds
/// the threshold, cannot become a candidate again.
struct CandidateState {
  enum class Phase { Unseen, Candidate, Disqualified };
  Phase phase = Phase::Unseen;
  double nabla_max = 0.0;
  std::int64_t first_seen = -1;
};

struct TreeNode {
  NodeId id = 0;
  Vec2 position;
  double elevation = 0.0;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  std::uint8_t saturation = 0;    // blocked-sector bitmask, 8 sectors
  double edge_length = 0.0;       // planar length of the parent edge
  double edge_gradient = 0.0;     // mean |slope| of the parent edge
  double cum_length = 0.0;        // root -> node, meters
  double cum_gradient = 0.0;      // root -> node, summed edge gradients
  double cum_turn = 0.0;          // root -> node, summed |turn| in radians
  CandidateState candidate;

  int blocked_sectors() const { return std::popcount(saturation); }
};

struct ExtendResult {
  enum class Kind { Added, Rejected, SaturatedAndPruned };
  Kind kind = Kind::Rejected;
  NodeId node = 0;
};

/// Hazard-aware dynamic tree confined to the robot-centered sliding window.
class Tree {
 public:
  explicit Tree(double extension_radius)
      : r_ext_(extension_radius), bucket_size_(extension_radius / 3.0) {
    if (extension_radius <= 0.0)
      throw std::invalid_argument("tree.extension_radius: must be positive");
  }

  double extension_radius() const { return r_ext_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeId root_id() const { return root_id_; }
  const std::map<NodeId, TreeNode>& nodes() const { return nodes_; }

  const TreeNode& node(NodeId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::out_of_range("tree: no such node");
    return it->second;
  }
  bool contains(NodeId id) const { return nodes_.count(id) != 0; }

  TreeNode& mutable_node(NodeId id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::out_of_range("tree: no such node");
    return it->second;
  }

  void init_root(const Vec2& position, double elevation) {
    nodes_.clear();
    index_.clear();
    TreeNode root;
    root.id = next_id_++;
    root.position = position;
    root.elevation = elevation;
    root_id_ = root.id;
    index_insert(root.id, root.position);
    nodes_.emplace(root.id, std::move(root));
  }

  /// Planar nearest node; ties broken by lowest id.
  NodeId nearest(const Vec2& p) const {
    if (nodes_.empty()) throw std::logic_error("tree: empty");
    NodeId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    bool found = false;
    const CellIndex base = bucket_of(p);
    for (std::int32_t ring = 0; ring <= 512; ++ring) {
      for (std::int32_t dy = -ring; dy <= ring; ++dy) {
        for (std::int32_t dx = -ring; dx <= ring; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          auto it = index_.find(cell_key({base.x + dx, base.y + dy}));
          if (it == index_.end()) continue;
          for (const IndexEntry& e : it->second) {
            const double d = distance(e.position, p);
            if (d < best_d || (d == best_d && (!found || e.id < best))) {
              best_d = d;
              best = e.id;
              found = true;
            }
          }
        }
      }
      // A node in ring r+1 is at least r*bucket away, so stop once that
      // cannot beat the best found.
      if (found && static_cast<double>(ring) * bucket_size_ > best_d) {
        return best;
      }
    }
    if (found) return best;
    for (const auto& [id, n] : nodes_) {  // distant query fallback
      const double d = distance(n.position, p);
      if (d < best_d || (d == best_d && (!found || id < best))) {
        best_d = d;
        best = id;
        found = true;
      }
    }
    return best;
  }

  /// Node ids within radius r of p, ascending id.
  std::vector<NodeId> within_radius(const Vec2& p, double r) const {
    std::vector<NodeId> out;
    const std::int32_t span =
        static_cast<std::int32_t>(std::ceil(r / bucket_size_)) + 1;
    const CellIndex base = bucket_of(p);
    for (std::int32_t dy = -span; dy <= span; ++dy) {
      for (std::int32_t dx = -span; dx <= span; ++dx) {
        auto it = index_.find(cell_key({base.x + dx, base.y + dy}));
        if (it == index_.end()) continue;
        for (const IndexEntry& e : it->second) {
          if (distance(e.position, p) <= r) out.push_back(e.id);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  struct Sample {
    Vec2 candidate;
    NodeId nearest;
  };

  /// Uniform sample over the window, steered to within the extension radius
  /// of the nearest node. Deterministic given the rng state.
  Sample sample_new_node(const LocalGridMap& map, Rng& rng) const {
    if (nodes_.empty()) throw std::logic_error("tree: empty");
    const double res = map.resolution();
    const double ax = map.anchor().x * res;
    const double ay = map.anchor().y * res;
    Vec2 cand{rng.uniform(ax, ax + map.window_w() * res),
              rng.uniform(ay, ay + map.window_h() * res)};
    const NodeId near_id = nearest(cand);
    const Vec2& np = nodes_.at(near_id).position;
    const double d = distance(np, cand);
    if (d > r_ext_) {
      const double s = r_ext_ / d;
      cand = {np.x + (cand.x - np.x) * s, np.y + (cand.y - np.y) * s};
    }
    return {cand, near_id};
  }

  /// Marks the blocked sector of `node_id` toward `toward` after an
  /// infeasible connection attempt. Returns true when the node's blocked
  /// sector count reaches the saturation threshold.
  bool record_failure(NodeId node_id, const Vec2& toward, int n_s,
                      const FeasibilityResult& verdict) {
    if (!verdict.infeasible())
      throw std::logic_error("record_failure: edge verdict is not Infeasible");
    TreeNode& n = mutable_node(node_id);
    const int k = sector_of(bearing(n.position, toward));
    n.saturation |= static_cast<std::uint8_t>(1u << k);
    return n.blocked_sectors() >= n_s;
  }

  /// One expansion attempt: sample, steer, check, then either insert (with
  /// RRT*-style choose-parent, no rewiring), reject, or saturate-and-prune
  /// the nearest node. Hazard discs around saturated nodes go to `hazards`
  /// and are projected onto known cells of `map`.
  ExtendResult extend(LocalGridMap& map, Rng& rng,
                      const FeasibilityParams& params, int n_s,
                      HazardLayer& hazards,
                      const std::unordered_set<std::int64_t>* exempt_cells =
                          nullptr) {
    const Sample s = sample_new_node(map, rng);
    const TreeNode& near_node = nodes_.at(s.nearest);
    if (distance(near_node.position, s.candidate) == 0.0)
      return {ExtendResult::Kind::Rejected, 0};

    const FeasibilityResult fr =
        check_feasibility(map, near_node.position, s.candidate, params);
    if (fr.feasible()) {
      // Choose-parent: cheapest in-radius node with a feasible edge. Walk
      // candidates in ascending resulting cost so the first feasible hit is
      // the answer; the already-checked nearest node is the fallback.
      NodeId parent = s.nearest;
      const double fallback_cost =
          near_node.cum_length + distance(near_node.position, s.candidate);
      std::vector<std::pair<double, NodeId>> order;
      for (NodeId id : within_radius(s.candidate, r_ext_)) {
        if (id == s.nearest) continue;
        const TreeNode& cand_parent = nodes_.at(id);
        const double d = distance(cand_parent.position, s.candidate);
        if (d == 0.0) continue;
        const double cost = cand_parent.cum_length + d;
        if (cost < fallback_cost) order.emplace_back(cost, id);
      }
      std::sort(order.begin(), order.end());
      for (const auto& [cost, id] : order) {
        if (check_feasibility(map, nodes_.at(id).position, s.candidate, params)
                .feasible()) {
          parent = id;
          break;
        }
      }
      const auto elev = map.elevation_at(s.candidate);
      const double grad = mean_abs_gradability(
          map, nodes_.at(parent).position, s.candidate, params.meta_len);
      const NodeId id = insert_child(parent, s.candidate,
                                     elev ? *elev : near_node.elevation, grad);
      return {ExtendResult::Kind::Added, id};
    }
    if (fr.unknown()) return {ExtendResult::Kind::Rejected, 0};

    // Infeasible: mark the failed sector on the existing tree node.
    const bool saturated = record_failure(s.nearest, s.candidate, n_s, fr);
    if (!saturated) return {ExtendResult::Kind::Rejected, 0};
    if (s.nearest == root_id_) {
      // The robot occupies the root; it is evidently on traversable ground.
      // Reset instead of pruning the tree out from under the robot.
      mutable_node(root_id_).saturation = 0;
      return {ExtendResult::Kind::Rejected, 0};
    }
    const Vec2 pos = nodes_.at(s.nearest).position;
    for (const CellIndex& c : hazards.mark(pos, r_ext_, exempt_cells))
      map.flag_hazard(c);
    remove_saturated(s.nearest, map, params);
    return {ExtendResult::Kind::SaturatedAndPruned, s.nearest};
  }

  /// Nodes that the next prune pass would remove for the given window.
  std::vector<NodeId> nodes_outside(const LocalGridMap& map) const {
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_)
      if (!map.in_window(n.position)) out.push_back(id);
    return out;
  }

  /// Prunes everything outside the window (and anything sitting in a hazard
  /// cell), then re-roots at the surviving node nearest the robot. Returns
  /// copies of the removed nodes. Reinitializes at the robot if nothing
  /// survives.
  std::vector<TreeNode> prune_and_rebase(const Vec2& robot,
                                         const LocalGridMap& map) {
    auto keep = [&](const TreeNode& n) {
      return map.in_window(n.position) && !map.hazard_at(n.position);
    };
    NodeId new_root = 0;
    double best_d = std::numeric_limits<double>::infinity();
    bool found = false;
    for (const auto& [id, n] : nodes_) {
      if (!keep(n)) continue;
      const double d = distance(n.position, robot);
      if (d < best_d) {
        best_d = d;
        new_root = id;
        found = true;
      }
    }
    if (!found) {
      std::vector<TreeNode> removed;
      removed.reserve(nodes_.size());
      for (auto& [id, n] : nodes_) removed.push_back(n);
      const auto elev = map.elevation_at(robot);
      init_root(robot, elev ? *elev : 0.0);
      return removed;
    }

    reroot_at(new_root);

    // Keep only nodes reachable from the new root through surviving cells.
    std::set<NodeId> visited;
    std::deque<NodeId> queue{root_id_};
    visited.insert(root_id_);
    while (!queue.empty()) {
      const NodeId cur = queue.front();
      queue.pop_front();
      for (NodeId c : nodes_.at(cur).children) {
        if (keep(nodes_.at(c))) {
          visited.insert(c);
          queue.push_back(c);
        }
      }
    }
    std::vector<TreeNode> removed;
    for (auto it = nodes_.begin(); it != nodes_.end();) {
      if (!visited.count(it->first)) {
        removed.push_back(it->second);
        index_erase(it->first, it->second.position);
        it = nodes_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto& [id, n] : nodes_) {
      auto& ch = n.children;
      ch.erase(std::remove_if(ch.begin(), ch.end(),
                              [&](NodeId c) { return !visited.count(c); }),
               ch.end());
    }
    recompute_cumulative();
    return removed;
  }

  /// Full-tree baseline: the root follows the robot but nothing is removed.
  void rebase_only(const Vec2& robot) {
    if (nodes_.empty()) return;
    NodeId new_root = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [id, n] : nodes_) {
      const double d = distance(n.position, robot);
      if (d < best_d) {
        best_d = d;
        new_root = id;
      }
    }
    reroot_at(new_root);
    recompute_cumulative();
  }

  /// Parent chain root -> ... -> id.
  std::vector<NodeId> path_from_root(NodeId id) const {
    std::vector<NodeId> rev;
    std::optional<NodeId> cur = id;
    while (cur) {
      rev.push_back(*cur);
      cur = nodes_.at(*cur).parent;
    }
    return {rev.rbegin(), rev.rend()};
  }

  /// One node per line: `id parent x y elev sat_mask cum_len`.
  void snapshot(std::ostream& os) const {
    char buf[160];
    for (const auto& [id, n] : nodes_) {
      std::snprintf(buf, sizeof(buf), "%u %d %.6f %.6f %.6f %u %.6f\n", id,
                    n.parent ? static_cast<int>(*n.parent) : -1, n.position.x,
                    n.position.y, n.elevation, n.saturation, n.cum_length);
      os << buf;
    }
  }

  NodeId insert_child(NodeId parent_id, const Vec2& position, double elevation,
                      double edge_gradient) {
    const TreeNode& parent = node(parent_id);
    const double len = distance(parent.position, position);
    if (len <= 0.0)
      throw std::invalid_argument("tree: zero-length edge");
    TreeNode n;
    n.id = next_id_++;
    n.position = position;
    n.elevation = elevation;
    n.parent = parent_id;
    n.edge_length = len;
    n.edge_gradient = edge_gradient;
    n.cum_length = parent.cum_length + len;
    n.cum_gradient = parent.cum_gradient + edge_gradient;
    n.cum_turn = parent.cum_turn + incoming_turn(parent, position);
    const NodeId id = n.id;
    index_insert(id, position);
    nodes_.emplace(id, std::move(n));
    mutable_node(parent_id).children.push_back(id);
    return id;
  }

 private:
  struct IndexEntry {
    NodeId id;
    Vec2 position;
  };

  CellIndex bucket_of(const Vec2& p) const {
    return world_to_cell(p, bucket_size_);
  }

  void index_insert(NodeId id, const Vec2& p) {
    index_[cell_key(bucket_of(p))].push_back({id, p});
  }
  void index_erase(NodeId id, const Vec2& p) {
    auto it = index_.find(cell_key(bucket_of(p)));
    if (it == index_.end()) return;
    auto& v = it->second;
    v.erase(std::remove_if(v.begin(), v.end(),
                           [&](const IndexEntry& e) { return e.id == id; }),
            v.end());
    if (v.empty()) index_.erase(it);
  }

  double incoming_turn(const TreeNode& parent, const Vec2& child_pos) const {
    if (!parent.parent) return 0.0;
    const Vec2 prev_dir =
        parent.position - nodes_.at(*parent.parent).position;
    return turn_angle(prev_dir, child_pos - parent.position);
  }

  /// Reverses parent pointers along the path old-root -> new-root. Edge
  /// lengths and gradients ride along with the flipped edges.
  void reroot_at(NodeId new_root) {
    if (new_root == root_id_) return;
    std::vector<NodeId> chain;  // new_root up to old root
    std::optional<NodeId> cur = new_root;
    while (cur) {
      chain.push_back(*cur);
      cur = nodes_.at(*cur).parent;
    }
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      TreeNode& lower = mutable_node(chain[i]);      // was child
      TreeNode& upper = mutable_node(chain[i + 1]);  // was parent
      auto& uc = upper.children;
      uc.erase(std::remove(uc.begin(), uc.end(), lower.id), uc.end());
      lower.children.push_back(upper.id);
      upper.parent = lower.id;
      upper.edge_length = lower.edge_length;
      upper.edge_gradient = lower.edge_gradient;
    }
    TreeNode& root = mutable_node(new_root);
    root.parent.reset();
    root.edge_length = 0.0;
    root.edge_gradient = 0.0;
    root_id_ = new_root;
  }

  void recompute_cumulative() {
    if (nodes_.empty()) return;
    TreeNode& root = mutable_node(root_id_);
    root.cum_length = 0.0;
    root.cum_gradient = 0.0;
    root.cum_turn = 0.0;
    std::deque<NodeId> queue{root_id_};
    while (!queue.empty()) {
      const NodeId cur = queue.front();
      queue.pop_front();
      const TreeNode& p = nodes_.at(cur);
      for (NodeId cid : p.children) {
        TreeNode& c = mutable_node(cid);
        c.cum_length = p.cum_length + c.edge_length;
        c.cum_gradient = p.cum_gradient + c.edge_gradient;
        c.cum_turn = p.cum_turn + incoming_turn(p, c.position);
        queue.push_back(cid);
      }
    }
  }

  /// Removes a saturated node. Children reattach to the cheapest in-radius
  /// feasible node outside the removed subtree; unreattachable subtrees are
  /// discarded.
  void remove_saturated(NodeId id, const LocalGridMap& map,
                        const FeasibilityParams& params) {
    std::set<NodeId> subtree;
    std::deque<NodeId> queue{id};
    while (!queue.empty()) {
      const NodeId cur = queue.front();
      queue.pop_front();
      subtree.insert(cur);
      for (NodeId c : nodes_.at(cur).children) queue.push_back(c);
    }

    const std::vector<NodeId> children = nodes_.at(id).children;
    std::set<NodeId> doomed{id};
    for (NodeId cid : children) {
      TreeNode& child = mutable_node(cid);
      NodeId best = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      bool found = false;
      for (NodeId pid : within_radius(child.position, r_ext_)) {
        if (subtree.count(pid)) continue;
        const TreeNode& p = nodes_.at(pid);
        const double d = distance(p.position, child.position);
        if (d == 0.0) continue;
        const double cost = p.cum_length + d;
        if (cost < best_cost &&
            check_feasibility(map, p.position, child.position, params)
                .feasible()) {
          best = pid;
          best_cost = cost;
          found = true;
        }
      }
      if (found) {
        child.parent = best;
        child.edge_length = distance(nodes_.at(best).position, child.position);
        child.edge_gradient = mean_abs_gradability(
            map, nodes_.at(best).position, child.position, params.meta_len);
        mutable_node(best).children.push_back(cid);
        // The reattached subtree survives.
        std::deque<NodeId> q{cid};
        while (!q.empty()) {
          const NodeId cur = q.front();
          q.pop_front();
          subtree.erase(cur);
          for (NodeId c : nodes_.at(cur).children) q.push_back(c);
        }
      }
    }
    for (NodeId gone : subtree) doomed.insert(gone);
    for (NodeId gone : doomed) {
      auto it = nodes_.find(gone);
      if (it == nodes_.end()) continue;
      if (it->second.parent && nodes_.count(*it->second.parent)) {
        auto& pc = mutable_node(*it->second.parent).children;
        pc.erase(std::remove(pc.begin(), pc.end(), gone), pc.end());
      }
      index_erase(gone, it->second.position);
      nodes_.erase(it);
    }
    recompute_cumulative();
  }

  double r_ext_;
  double bucket_size_;
  NodeId next_id_ = 1;
  NodeId root_id_ = 0;
  std::map<NodeId, TreeNode> nodes_;
  std::unordered_map<std::int64_t, std::vector<IndexEntry>> index_;
};

}  // namespace terranav
