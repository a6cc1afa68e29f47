#pragma once

#include <cmath>
#include <concepts>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "terranav/geometry.hpp"

namespace terranav {

/// Vehicle traversability limits. alpha_grad bounds the slope of any single
/// meta segment; beta_flat bounds the summed slopes of a whole edge.
struct FeasibilityParams {
  double alpha_grad = 0.5773502691896257;  // tan(30 deg)
  double beta_flat = 2.0;
  double meta_len = 0.25;  // meters; should not exceed 2x map resolution

  void validate(double map_resolution) const {
    if (alpha_grad <= 0.0)
      throw std::invalid_argument("feasibility.alpha_grad: must be positive");
    if (beta_flat <= 0.0)
      throw std::invalid_argument("feasibility.beta_flat: must be positive");
    if (meta_len <= 0.0)
      throw std::invalid_argument("feasibility.meta_len: must be positive");
    if (meta_len > 2.0 * map_resolution)
      throw std::invalid_argument(
          "feasibility.meta_len: must not exceed twice the map resolution");
  }
};

/// Concept for anything feasibility checks can run against: the local window,
/// the persistent known-terrain record, or ground truth.
template <typename V>
concept TerrainView = requires(const V& v, const Vec2& p, const CellIndex& c) {
  { v.elevation_at(p) } -> std::convertible_to<std::optional<double>>;
  { v.hazard_at(c) } -> std::convertible_to<bool>;
  { v.resolution() } -> std::convertible_to<double>;
};

/// Per-meta-segment slope (rise over run) along p -> q. The segment is split
/// into n = ceil(|pq| / meta_len) equal pieces; entries are nullopt where an
/// endpoint elevation is unknown.
template <TerrainView V>
std::vector<std::optional<double>> gradability(const V& view, const Vec2& p,
                                               const Vec2& q,
                                               double meta_len) {
  const double len = distance(p, q);
  if (len == 0.0) throw std::invalid_argument("gradability: p == q");
  const int n = static_cast<int>(std::ceil(len / meta_len));
  const double dl = len / n;
  std::vector<std::optional<double>> grads;
  grads.reserve(n);
  std::optional<double> h_prev = view.elevation_at(p);
  for (int k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    const Vec2 e{p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t};
    const std::optional<double> h = view.elevation_at(e);
    if (h_prev && h) {
      grads.push_back((*h - *h_prev) / dl);
    } else {
      grads.push_back(std::nullopt);
    }
    h_prev = h;
  }
  return grads;
}

enum class Verdict { Feasible, Infeasible, Unknown };

enum class InfeasibleReason { None, Slope, Flatness, Hazard };

struct FeasibilityResult {
  Verdict verdict = Verdict::Unknown;
  InfeasibleReason reason = InfeasibleReason::None;

  bool feasible() const { return verdict == Verdict::Feasible; }
  bool infeasible() const { return verdict == Verdict::Infeasible; }
  bool unknown() const { return verdict == Verdict::Unknown; }
};

inline const char* to_string(InfeasibleReason r) {
  switch (r) {
    case InfeasibleReason::Slope: return "slope";
    case InfeasibleReason::Flatness: return "flatness";
    case InfeasibleReason::Hazard: return "hazard";
    default: return "none";
  }
}

/// Edge feasibility. Precedence: a hazard-cell intersection is Infeasible
/// outright; a known meta segment steeper than alpha_grad is Infeasible even
/// if other segments are unknown; any unknown segment otherwise makes the
/// verdict Unknown; the flatness sum is only evaluated over fully known
/// edges. Both clauses use |l| so steep descents are rejected like ascents.
template <TerrainView V>
FeasibilityResult check_feasibility(const V& view, const Vec2& p,
                                    const Vec2& q,
                                    const FeasibilityParams& params) {
  bool hazard_hit = false;
  traverse_cells(p, q, view.resolution(), [&](const CellIndex& c) {
    if (view.hazard_at(c)) {
      hazard_hit = true;
      return false;
    }
    return true;
  });
  if (hazard_hit) return {Verdict::Infeasible, InfeasibleReason::Hazard};

  if (distance(p, q) == 0.0) return {Verdict::Feasible, InfeasibleReason::None};

  const auto grads = gradability(view, p, q, params.meta_len);
  bool any_unknown = false;
  double sum = 0.0;
  for (const auto& g : grads) {
    if (!g) {
      any_unknown = true;
      continue;
    }
    if (std::abs(*g) > params.alpha_grad)
      return {Verdict::Infeasible, InfeasibleReason::Slope};
    sum += std::abs(*g);
  }
  if (any_unknown) return {Verdict::Unknown, InfeasibleReason::None};
  if (sum > params.beta_flat)
    return {Verdict::Infeasible, InfeasibleReason::Flatness};
  return {Verdict::Feasible, InfeasibleReason::None};
}

/// Mean |slope| over the known meta segments of an edge; 0 for an edge with
/// no known segments. Used for edge annotations and cumulative gradients.
template <TerrainView V>
double mean_abs_gradability(const V& view, const Vec2& p, const Vec2& q,
                            double meta_len) {
  if (distance(p, q) == 0.0) return 0.0;
  const auto grads = gradability(view, p, q, meta_len);
  double sum = 0.0;
  int count = 0;
  for (const auto& g : grads) {
    if (g) {
      sum += std::abs(*g);
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace terranav
