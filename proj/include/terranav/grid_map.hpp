#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "terranav/geometry.hpp"
#include "terranav/height_field.hpp"

namespace terranav {

/// Monotone world-indexed set of hazard-flagged cells. Flags are never
/// cleared. Optionally clipped to the world's cell bounds.
class HazardLayer {
 public:
  explicit HazardLayer(double resolution) : resolution_(resolution) {
    if (resolution <= 0.0)
      throw std::invalid_argument("resolution: must be positive");
  }

  void set_bounds(const CellIndex& lo, const CellIndex& hi) {
    has_bounds_ = true;
    lo_ = lo;
    hi_ = hi;
  }

  double resolution() const { return resolution_; }
  std::size_t size() const { return cells_.size(); }

  bool contains(const CellIndex& c) const {
    return cells_.count(cell_key(c)) != 0;
  }
  bool contains(const Vec2& p) const {
    return contains(world_to_cell(p, resolution_));
  }

  /// Flags the cell containing `center` plus every cell whose center lies
  /// within `radius`. Cells in `exempt` are skipped: ground the robot has
  /// already traversed is evidently traversable. Returns the newly flagged
  /// cells.
  std::vector<CellIndex> mark(
      const Vec2& center, double radius,
      const std::unordered_set<std::int64_t>* exempt = nullptr) {
    std::vector<CellIndex> added;
    auto flag = [&](const CellIndex& c) {
      if (exempt && exempt->count(cell_key(c))) return;
      if (has_bounds_ &&
          (c.x < lo_.x || c.x > hi_.x || c.y < lo_.y || c.y > hi_.y))
        return;
      if (cells_.insert(cell_key(c)).second) added.push_back(c);
    };
    flag(world_to_cell(center, resolution_));
    const std::int32_t span =
        static_cast<std::int32_t>(std::ceil(radius / resolution_)) + 1;
    const CellIndex base = world_to_cell(center, resolution_);
    for (std::int32_t dy = -span; dy <= span; ++dy) {
      for (std::int32_t dx = -span; dx <= span; ++dx) {
        const CellIndex c{base.x + dx, base.y + dy};
        if (distance(cell_center(c, resolution_), center) <= radius) flag(c);
      }
    }
    return added;
  }

  const std::unordered_set<std::int64_t>& raw() const { return cells_; }

 private:
  double resolution_;
  bool has_bounds_ = false;
  CellIndex lo_{0, 0}, hi_{0, 0};
  std::unordered_set<std::int64_t> cells_;
};

/// The robot's W x H windowed 2.5D belief, recentered on the robot at every
/// sense. Cells live on the global lattice so that window motion preserves
/// cell identity.
class LocalGridMap {
 public:
  LocalGridMap() = default;
  LocalGridMap(std::int32_t window_w, std::int32_t window_h, double resolution)
      : w_(window_w), h_(window_h), resolution_(resolution),
        cells_(static_cast<std::size_t>(window_w) * window_h) {
    if (window_w < 2 || window_h < 2)
      throw std::invalid_argument("window: must be at least 2x2 cells");
    if (resolution <= 0.0)
      throw std::invalid_argument("resolution: must be positive");
  }

  struct Cell {
    float elevation = 0.0f;
    bool known = false;
    bool hazard = false;
  };

  bool empty() const { return cells_.empty(); }
  std::int32_t window_w() const { return w_; }
  std::int32_t window_h() const { return h_; }
  double resolution() const { return resolution_; }
  const Vec2& center() const { return center_; }
  CellIndex anchor() const { return anchor_; }

  bool in_window(const CellIndex& c) const {
    return c.x >= anchor_.x && c.x < anchor_.x + w_ && c.y >= anchor_.y &&
           c.y < anchor_.y + h_;
  }
  bool in_window(const Vec2& p) const {
    return !empty() && in_window(world_to_cell(p, resolution_));
  }

  const Cell& cell(const CellIndex& c) const {
    return cells_[index_of(c)];
  }

  bool known(const CellIndex& c) const {
    return in_window(c) && cells_[index_of(c)].known;
  }
  bool hazard_at(const CellIndex& c) const {
    return in_window(c) && cells_[index_of(c)].hazard;
  }
  bool hazard_at(const Vec2& p) const {
    return hazard_at(world_to_cell(p, resolution_));
  }

  void set_cell(const CellIndex& c, float elevation) {
    Cell& cc = cells_[index_of(c)];
    cc.elevation = elevation;
    cc.known = true;
  }

  /// Hazard flags require known elevation; unknown cells are skipped here and
  /// picked up when a later sense reveals them.
  bool flag_hazard(const CellIndex& c) {
    if (!in_window(c)) return false;
    Cell& cc = cells_[index_of(c)];
    if (!cc.known) return false;
    cc.hazard = true;
    return true;
  }

  std::optional<double> elevation_at(const Vec2& p) const {
    if (empty()) return std::nullopt;
    return bilinear_world(
        p.x, p.y, resolution_,
        [&](std::int32_t cx, std::int32_t cy) {
          return known(CellIndex{cx, cy});
        },
        [&](std::int32_t cx, std::int32_t cy) {
          return static_cast<double>(cells_[index_of({cx, cy})].elevation);
        });
  }

  std::size_t known_count() const {
    std::size_t n = 0;
    for (const Cell& c : cells_)
      if (c.known) ++n;
    return n;
  }

  /// Recenters the window on `robot` and fills it: cells within the sensing
  /// radius are sampled from the field, cells already known in the previous
  /// window keep their values (and hazard flags), the rest are unknown.
  static LocalGridMap sense(const HeightField& field, const Vec2& robot,
                            double sensing_radius, std::int32_t window_w,
                            std::int32_t window_h, const LocalGridMap* prior) {
    if (!field.in_bounds(robot))
      throw std::invalid_argument("sense: robot outside field bounds");
    LocalGridMap map(window_w, window_h, field.resolution());
    const CellIndex robot_cell = world_to_cell(robot, map.resolution_);
    map.anchor_ = {robot_cell.x - window_w / 2, robot_cell.y - window_h / 2};
    map.center_ = robot;

    const double res = map.resolution_;
    const std::int32_t fx0 = static_cast<std::int32_t>(
        std::llround(field.origin().x / res));
    const std::int32_t fy0 = static_cast<std::int32_t>(
        std::llround(field.origin().y / res));
    for (std::int32_t ly = 0; ly < window_h; ++ly) {
      for (std::int32_t lx = 0; lx < window_w; ++lx) {
        const CellIndex c{map.anchor_.x + lx, map.anchor_.y + ly};
        Cell& out = map.cells_[static_cast<std::size_t>(ly) * window_w + lx];
        const bool in_field = c.x >= fx0 && c.x < fx0 + field.cells_x() &&
                              c.y >= fy0 && c.y < fy0 + field.cells_y();
        if (in_field &&
            distance(cell_center(c, res), robot) <= sensing_radius) {
          out.elevation = field.at(c.x - fx0, c.y - fy0);
          out.known = true;
        } else if (prior && prior->known(c)) {
          out.elevation = prior->cell(c).elevation;
          out.known = true;
        }
        if (prior && prior->in_window(c) && prior->cell(c).hazard &&
            out.known) {
          out.hazard = true;
        }
      }
    }
    return map;
  }

 private:
  std::size_t index_of(const CellIndex& c) const {
    return static_cast<std::size_t>(c.y - anchor_.y) * w_ + (c.x - anchor_.x);
  }

  std::int32_t w_ = 0;
  std::int32_t h_ = 0;
  double resolution_ = 1.0;
  CellIndex anchor_{0, 0};
  Vec2 center_;
  std::vector<Cell> cells_;
};

/// World-sized sparse record of every cell ever sensed. Graph edges may span
/// beyond the current window, so their feasibility is evaluated against this
/// record rather than the transient window.
class KnownTerrain {
 public:
  explicit KnownTerrain(double resolution) : resolution_(resolution) {
    if (resolution <= 0.0)
      throw std::invalid_argument("resolution: must be positive");
  }

  double resolution() const { return resolution_; }
  std::size_t size() const { return cells_.size(); }

  void absorb(const LocalGridMap& map) {
    for (std::int32_t ly = 0; ly < map.window_h(); ++ly) {
      for (std::int32_t lx = 0; lx < map.window_w(); ++lx) {
        const CellIndex c{map.anchor().x + lx, map.anchor().y + ly};
        if (map.known(c)) cells_[cell_key(c)] = map.cell(c).elevation;
      }
    }
  }

  void insert(const CellIndex& c, float elevation) {
    cells_[cell_key(c)] = elevation;
  }

  bool known(const CellIndex& c) const { return cells_.count(cell_key(c)); }

  std::optional<double> elevation_at(const Vec2& p) const {
    return bilinear_world(
        p.x, p.y, resolution_,
        [&](std::int32_t cx, std::int32_t cy) {
          return cells_.count(cell_key(CellIndex{cx, cy})) != 0;
        },
        [&](std::int32_t cx, std::int32_t cy) {
          return static_cast<double>(
              cells_.find(cell_key(CellIndex{cx, cy}))->second);
        });
  }

 private:
  double resolution_;
  std::unordered_map<std::int64_t, float> cells_;
};

/// Terrain view pairing the persistent elevation record with the persistent
/// hazard layer; used for global-graph feasibility checks.
struct KnownTerrainView {
  const KnownTerrain* record = nullptr;
  const HazardLayer* hazards = nullptr;

  double resolution() const { return record->resolution(); }
  std::optional<double> elevation_at(const Vec2& p) const {
    return record->elevation_at(p);
  }
  bool hazard_at(const CellIndex& c) const {
    return hazards && hazards->contains(c);
  }
};

/// Ground-truth view: every in-field cell known, no hazards. Used by tests
/// and offline re-validation.
struct GroundTruthView {
  const HeightField* field = nullptr;

  double resolution() const { return field->resolution(); }
  std::optional<double> elevation_at(const Vec2& p) const {
    return field->elevation_at(p);
  }
  bool hazard_at(const CellIndex&) const { return false; }
};

}  // namespace terranav
