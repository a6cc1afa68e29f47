#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "terranav/geometry.hpp"
#include "terranav/graph.hpp"
#include "terranav/grid_map.hpp"
#include "terranav/tree.hpp"

namespace terranav {

/// Weights and thresholds of the subgoal evaluation. w_alpha/w_beta/lambda
/// are independent of the feasibility thresholds despite the paper-style
/// naming overlap.
struct CostParams {
  double w_alpha = 1.0;
  double w_beta = 1.0;
  double lambda = 0.5;
  double delta = 0.6;   // coverage threshold for candidacy
  int n_delta = 3;      // minimum local candidate count
  double reach_eps = 0.3;  // meters

  void validate() const {
    if (w_alpha < 0.0 || w_beta < 0.0 || lambda < 0.0)
      throw std::invalid_argument("cost weights: must be nonnegative");
    if (delta <= 0.0 || delta > 1.0)
      throw std::invalid_argument("cost.delta: must be in (0, 1]");
    if (n_delta < 1)
      throw std::invalid_argument("cost.n_delta: must be at least 1");
    if (reach_eps <= 0.0)
      throw std::invalid_argument("cost.reach_eps: must be positive");
  }
};

enum class SubgoalSource { Local, Global };

/// A scored navigation waypoint, drawn from the tree (Local) or the global
/// graph (Global).
struct Subgoal {
  Vec2 position;
  SubgoalSource source = SubgoalSource::Local;
  std::uint32_t node = 0;  // tree node id or graph node id per source
  double nabla_max = 0.0;
  double cost = 0.0;
};

/// Fraction of the disc around `p` that is known terrain. Cells outside the
/// window count as unknown, so a disc clipped by the window edge reads low.
inline double coverage_ratio(const Vec2& p, const LocalGridMap& map,
                             double radius) {
  if (radius <= 0.0)
    throw std::invalid_argument("coverage_ratio: radius must be positive");
  const double res = map.resolution();
  const CellIndex base = world_to_cell(p, res);
  const std::int32_t span =
      static_cast<std::int32_t>(std::ceil(radius / res)) + 1;
  std::size_t known = 0;
  for (std::int32_t dy = -span; dy <= span; ++dy) {
    for (std::int32_t dx = -span; dx <= span; ++dx) {
      const CellIndex c{base.x + dx, base.y + dy};
      if (distance(cell_center(c, res), p) > radius) continue;
      if (map.known(c)) ++known;
    }
  }
  const double ratio = (known * res * res) / (kPi * radius * radius);
  return std::min(1.0, ratio);
}

/// Re-evaluates candidacy of every childless leaf inside the window and
/// returns the local subgoal set (candidates inside the window, ascending
/// node id). Disqualification is permanent.
inline std::vector<Subgoal> update_candidates(Tree& tree,
                                              const LocalGridMap& map,
                                              const CostParams& params,
                                              std::int64_t tick,
                                              double disc_radius) {
  std::vector<Subgoal> local;
  std::vector<NodeId> ids;
  ids.reserve(tree.size());
  for (const auto& [id, n] : tree.nodes()) ids.push_back(id);

  for (NodeId id : ids) {
    TreeNode& n = tree.mutable_node(id);
    CandidateState& st = n.candidate;
    if (st.phase == CandidateState::Phase::Disqualified) continue;
    const bool leaf = n.children.empty();
    const bool in_win = map.in_window(n.position);

    if (st.phase == CandidateState::Phase::Candidate) {
      if (!leaf) {
        st.phase = CandidateState::Phase::Disqualified;
        continue;
      }
      if (in_win) {
        const double nabla = coverage_ratio(n.position, map, disc_radius);
        st.nabla_max = std::max(st.nabla_max, nabla);
        if (nabla > params.delta) {
          st.phase = CandidateState::Phase::Disqualified;
          continue;
        }
      }
    } else {
      // Not yet a candidate: candidacy begins at the first evaluation where
      // the node is a childless in-window leaf with a sparse surrounding.
      // A too-explored reading does not bar the node; the window may move
      // and put it at the boundary later.
      if (!leaf || !in_win) continue;
      const double nabla = coverage_ratio(n.position, map, disc_radius);
      if (nabla > params.delta) continue;
      st.phase = CandidateState::Phase::Candidate;
      st.first_seen = tick;
      st.nabla_max = nabla;
    }

    if (st.phase == CandidateState::Phase::Candidate && in_win) {
      local.push_back({n.position, SubgoalSource::Local, id, st.nabla_max, 0.0});
    }
  }
  return local;
}

/// Local cost (tree subgoals): the length and gradient shares are normalized
/// over the whole local set, discounted by exp(-lambda * turn), plus the
/// straight-line distance to the final target. A zero normalizer drops its
/// term entirely so flat (or degenerate) trees do not poison the score.
inline void score_local(std::vector<Subgoal>& set, const Tree& tree,
                        const Vec2& target, const CostParams& params) {
  double sum_len = 0.0;
  double sum_grad = 0.0;
  for (const Subgoal& s : set) {
    sum_len += tree.node(s.node).cum_length;
    sum_grad += tree.node(s.node).cum_gradient;
  }
  for (Subgoal& s : set) {
    const TreeNode& n = tree.node(s.node);
    const double len_term =
        sum_len > 0.0 ? params.w_alpha * n.cum_length / sum_len : 0.0;
    const double grad_term =
        sum_grad > 0.0 ? params.w_beta * n.cum_gradient / sum_grad : 0.0;
    s.cost = (len_term + grad_term) * std::exp(-params.lambda * n.cum_turn) +
             distance(s.position, target);
  }
}

/// Global cost (graph subgoals): distance to the target scaled up by how
/// explored the candidate's surroundings already were.
inline double global_cost(const Subgoal& s, const Vec2& target) {
  return distance(s.position, target) * std::exp(s.nabla_max);
}

inline void score_global(std::vector<Subgoal>& set, const Vec2& target) {
  for (Subgoal& s : set) s.cost = global_cost(s, target);
}

struct Selection {
  Subgoal subgoal;
  SubgoalSource route = SubgoalSource::Local;
};

/// Decision rule: the local set is used whenever it is large enough;
/// otherwise the global set. A small local set still wins over an empty
/// global set (the union being nonempty must yield a subgoal). nullopt only
/// when both sets are empty.
inline std::optional<Selection> select_subgoal(std::vector<Subgoal> local,
                                               std::vector<Subgoal> global,
                                               const CostParams& params,
                                               const Vec2& target,
                                               const Tree& tree) {
  auto argmin = [](const std::vector<Subgoal>& set) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < set.size(); ++i) {
      if (set[i].cost < set[best].cost ||
          (set[i].cost == set[best].cost && set[i].node < set[best].node)) {
        best = i;
      }
    }
    return set[best];
  };

  const bool use_local =
      static_cast<int>(local.size()) >= params.n_delta ||
      (global.empty() && !local.empty());
  if (use_local) {
    score_local(local, tree, target, params);
    return Selection{argmin(local), SubgoalSource::Local};
  }
  if (!global.empty()) {
    score_global(global, target);
    return Selection{argmin(global), SubgoalSource::Global};
  }
  return std::nullopt;
}

/// One structured row per decision tick.
struct DecisionRecord {
  std::int64_t tick = 0;
  int n_local = 0;
  int n_global = 0;
  Vec2 subgoal;
  double cost = 0.0;
  SubgoalSource branch = SubgoalSource::Local;
};

}  // namespace terranav
