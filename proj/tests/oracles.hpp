#pragma once

// Test-only reference implementations, kept independent of the library code
// they are used to check.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

namespace oracle {

/// Dense world-cell grid: cell (i, j) spans [i*res, (i+1)*res) etc., value at
/// the cell center, nullopt = unknown.
struct DenseGrid {
  int nx = 0;
  int ny = 0;
  double res = 1.0;
  std::vector<std::optional<float>> cells;  // row-major by j
  std::unordered_set<std::int64_t> hazards;

  static std::int64_t key(int i, int j) {
    return (static_cast<std::int64_t>(i) << 32) |
           static_cast<std::int64_t>(static_cast<std::uint32_t>(j));
  }

  std::optional<float>& at(int i, int j) {
    return cells[static_cast<std::size_t>(j) * nx + i];
  }
  const std::optional<float>& at(int i, int j) const {
    return cells[static_cast<std::size_t>(j) * nx + i];
  }
};

inline std::optional<double> bilinear(const DenseGrid& g, double x, double y) {
  const double u = x / g.res - 0.5;
  const double v = y / g.res - 0.5;
  const int i = static_cast<int>(std::floor(u));
  const int j = static_cast<int>(std::floor(v));
  if (i < 0 || j < 0 || i + 1 >= g.nx || j + 1 >= g.ny) return std::nullopt;
  const auto& c00 = g.at(i, j);
  const auto& c10 = g.at(i + 1, j);
  const auto& c01 = g.at(i, j + 1);
  const auto& c11 = g.at(i + 1, j + 1);
  if (!c00 || !c10 || !c01 || !c11) return std::nullopt;
  const double fu = u - i;
  const double fv = v - j;
  return (1.0 - fu) * (1.0 - fv) * *c00 + fu * (1.0 - fv) * *c10 +
         (1.0 - fu) * fv * *c01 + fu * fv * *c11;
}

enum class Verdict { Feasible, InfeasibleSlope, InfeasibleFlatness,
                     InfeasibleHazard, Unknown };

/// First-principles segment evaluation: hazard cells first (dense sampling
/// rather than grid traversal), then per-meta slopes against alpha, then
/// unknowns, then the flatness sum against beta.
inline Verdict check_segment(const DenseGrid& g, double px, double py,
                             double qx, double qy, double alpha, double beta,
                             double meta_len) {
  const double len = std::hypot(qx - px, qy - py);
  {
    const int steps = std::max(2, static_cast<int>(std::ceil(
                                      len / (g.res / 16.0))));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const double x = px + (qx - px) * t;
      const double y = py + (qy - py) * t;
      const int ci = static_cast<int>(std::floor(x / g.res));
      const int cj = static_cast<int>(std::floor(y / g.res));
      if (g.hazards.count(DenseGrid::key(ci, cj)))
        return Verdict::InfeasibleHazard;
    }
  }
  if (len == 0.0) return Verdict::Feasible;
  const int n = static_cast<int>(std::ceil(len / meta_len));
  const double dl = len / n;
  bool any_unknown = false;
  double sum = 0.0;
  std::optional<double> prev = bilinear(g, px, py);
  for (int k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    const std::optional<double> h =
        bilinear(g, px + (qx - px) * t, py + (qy - py) * t);
    if (prev && h) {
      const double grad = (*h - *prev) / dl;
      if (std::abs(grad) > alpha) return Verdict::InfeasibleSlope;
      sum += std::abs(grad);
    } else {
      any_unknown = true;
    }
    prev = h;
  }
  if (any_unknown) return Verdict::Unknown;
  if (sum > beta) return Verdict::InfeasibleFlatness;
  return Verdict::Feasible;
}

/// Exhaustive shortest path over all simple paths; usable for graphs of a
/// dozen nodes. Edges as (a, b, w) triples, undirected.
struct TinyGraph {
  int n = 0;
  std::vector<std::array<double, 3>> edges;  // a, b, w

  std::optional<double> shortest(int from, int to) const {
    std::vector<bool> used(n, false);
    double best = std::numeric_limits<double>::infinity();
    dfs(from, to, used, 0.0, best);
    if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
    return best;
  }

 private:
  void dfs(int cur, int to, std::vector<bool>& used, double acc,
           double& best) const {
    if (acc >= best) return;
    if (cur == to) {
      best = acc;
      return;
    }
    used[cur] = true;
    for (const auto& e : edges) {
      const int a = static_cast<int>(e[0]);
      const int b = static_cast<int>(e[1]);
      if (a == cur && !used[b]) dfs(b, to, used, acc + e[2], best);
      if (b == cur && !used[a]) dfs(a, to, used, acc + e[2], best);
    }
    used[cur] = false;
  }
};

}  // namespace oracle
