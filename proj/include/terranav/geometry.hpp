#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace terranav {

constexpr double kPi = 3.14159265358979323846;

/// Planar world position in meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Integer cell coordinate on the global grid lattice (spacing = map resolution,
/// anchored at the world origin).
struct CellIndex {
  std::int32_t x = 0;
  std::int32_t y = 0;

  bool operator==(const CellIndex& o) const { return x == o.x && y == o.y; }
  bool operator<(const CellIndex& o) const {
    return x != o.x ? x < o.x : y < o.y;
  }
};

inline std::int64_t cell_key(const CellIndex& c) {
  return (static_cast<std::int64_t>(c.x) << 32) |
         (static_cast<std::int64_t>(static_cast<std::uint32_t>(c.y)));
}

inline CellIndex world_to_cell(const Vec2& p, double resolution) {
  return {static_cast<std::int32_t>(std::floor(p.x / resolution)),
          static_cast<std::int32_t>(std::floor(p.y / resolution))};
}

inline Vec2 cell_center(const CellIndex& c, double resolution) {
  return {(c.x + 0.5) * resolution, (c.y + 0.5) * resolution};
}

/// Bearing of q as seen from p, in [0, 2*pi).
inline double bearing(const Vec2& p, const Vec2& q) {
  double a = std::atan2(q.y - p.y, q.x - p.x);
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

/// Eight-sector index of a bearing: sector k spans [k*pi/4, (k+1)*pi/4),
/// measured counterclockwise from +x.
inline int sector_of(double bearing_rad) {
  int k = static_cast<int>(std::floor(bearing_rad / (kPi / 4.0)));
  if (k < 0) k = 0;
  if (k > 7) k = 7;
  return k;
}

/// Absolute angle between two direction vectors, in [0, pi].
inline double turn_angle(const Vec2& dir_a, const Vec2& dir_b) {
  const double na = dir_a.norm();
  const double nb = dir_b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = (dir_a.x * dir_b.x + dir_a.y * dir_b.y) / (na * nb);
  c = std::max(-1.0, std::min(1.0, c));
  return std::acos(c);
}

/// Visits every lattice cell crossed by the segment [a, b] (Amanatides-Woo
/// traversal). Both endpoint cells are included. Returns early if the visitor
/// returns false.
inline void traverse_cells(const Vec2& a, const Vec2& b, double resolution,
                           const std::function<bool(const CellIndex&)>& visit) {
  CellIndex cur = world_to_cell(a, resolution);
  const CellIndex end = world_to_cell(b, resolution);
  if (!visit(cur)) return;
  if (cur == end) return;

  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);

  auto boundary = [&](std::int32_t cell, int step) {
    return (step > 0 ? cell + 1 : cell) * resolution;
  };
  double t_max_x = step_x != 0 ? (boundary(cur.x, step_x) - a.x) / dx
                               : std::numeric_limits<double>::infinity();
  double t_max_y = step_y != 0 ? (boundary(cur.y, step_y) - a.y) / dy
                               : std::numeric_limits<double>::infinity();
  const double t_delta_x = step_x != 0 ? resolution / std::abs(dx)
                                       : std::numeric_limits<double>::infinity();
  const double t_delta_y = step_y != 0 ? resolution / std::abs(dy)
                                       : std::numeric_limits<double>::infinity();

  // Bounded by the cell count of the segment's bounding box.
  const long max_steps =
      2L * (std::abs(end.x - cur.x) + std::abs(end.y - cur.y)) + 4;
  for (long i = 0; i < max_steps; ++i) {
    if (t_max_x < t_max_y) {
      cur.x += step_x;
      t_max_x += t_delta_x;
    } else {
      cur.y += step_y;
      t_max_y += t_delta_y;
    }
    if (!visit(cur)) return;
    if (cur == end) return;
  }
}

/// Deterministic PRNG wrapper. Uses a fixed 53-bit mantissa construction so
/// that streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace terranav
