#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "terranav/geometry.hpp"

namespace terranav {

/// Bilinear lookup over the global cell-center lattice. `known` and `value`
/// address world cells; the four cells surrounding p must all be known,
/// otherwise nullopt. There is no clamping, so any two terrain views that
/// know the same cells return bit-identical values.
template <typename KnownFn, typename ValueFn>
std::optional<double> bilinear_world(double x, double y, double resolution,
                                     KnownFn&& known, ValueFn&& value) {
  const double u = x / resolution - 0.5;
  const double v = y / resolution - 0.5;
  const double fi = std::floor(u);
  const double fj = std::floor(v);
  if (std::abs(fi) > 1e9 || std::abs(fj) > 1e9) return std::nullopt;
  const std::int32_t i = static_cast<std::int32_t>(fi);
  const std::int32_t j = static_cast<std::int32_t>(fj);
  const double fu = u - fi;
  const double fv = v - fj;
  if (!known(i, j) || !known(i + 1, j) || !known(i, j + 1) ||
      !known(i + 1, j + 1)) {
    return std::nullopt;
  }
  const double e00 = value(i, j);
  const double e10 = value(i + 1, j);
  const double e01 = value(i, j + 1);
  const double e11 = value(i + 1, j + 1);
  return (1.0 - fu) * (1.0 - fv) * e00 + fu * (1.0 - fv) * e10 +
         (1.0 - fu) * fv * e01 + fu * fv * e11;
}

enum class TerrainKind { Hilly, Forest, Imported };

/// Parameters for synthetic world generation.
struct TerrainSpec {
  TerrainKind kind = TerrainKind::Hilly;
  std::uint64_t seed = 1;
  double area_w = 32.0;         // meters
  double area_h = 32.0;         // meters
  double resolution = 0.25;     // meters per cell
  double amplitude = 2.4;       // meters, peak-to-bottom bound of the hills
  double feature_scale = 10.0;  // meters, horizontal wavelength of the hills
  int cliff_count = 0;          // vertical insets (Hilly) / trunks (Forest)
  double cliff_height = 4.0;    // meters
  std::string file;             // source path for Imported

  void validate() const {
    if (area_w <= 0.0 || area_h <= 0.0)
      throw std::invalid_argument("terrain.area: must be positive");
    if (resolution <= 0.0)
      throw std::invalid_argument("terrain.resolution: must be positive");
    if (amplitude < 0.0)
      throw std::invalid_argument("terrain.amplitude: must be nonnegative");
    if (feature_scale <= 0.0)
      throw std::invalid_argument("terrain.feature_scale: must be positive");
    if (cliff_count < 0)
      throw std::invalid_argument("terrain.cliff_count: must be nonnegative");
  }
};

/// Ground-truth continuous terrain. Immutable after generation; cell (0,0)
/// spans [origin, origin + resolution)^2 and elevations are stored row-major
/// (y-major) as single-precision meters.
class HeightField {
 public:
  HeightField() = default;
  HeightField(std::int32_t nx, std::int32_t ny, double resolution,
              Vec2 origin = {0.0, 0.0})
      : nx_(nx), ny_(ny), resolution_(resolution), origin_(origin),
        elevations_(static_cast<std::size_t>(nx) * ny, 0.0f) {
    if (nx <= 0 || ny <= 0)
      throw std::invalid_argument("height field dimensions must be positive");
    if (resolution <= 0.0)
      throw std::invalid_argument("resolution: must be positive");
  }

  std::int32_t cells_x() const { return nx_; }
  std::int32_t cells_y() const { return ny_; }
  double resolution() const { return resolution_; }
  double width_m() const { return nx_ * resolution_; }
  double height_m() const { return ny_ * resolution_; }
  const Vec2& origin() const { return origin_; }

  float& at(std::int32_t ix, std::int32_t iy) {
    return elevations_[static_cast<std::size_t>(iy) * nx_ + ix];
  }
  float at(std::int32_t ix, std::int32_t iy) const {
    return elevations_[static_cast<std::size_t>(iy) * nx_ + ix];
  }

  bool in_bounds(const Vec2& p) const {
    return p.x >= origin_.x && p.y >= origin_.y &&
           p.x <= origin_.x + width_m() && p.y <= origin_.y + height_m();
  }

  /// Elevation at the center of the cell containing p. Requires in_bounds.
  float cell_value_at(const Vec2& p) const {
    std::int32_t ix = static_cast<std::int32_t>(
        std::floor((p.x - origin_.x) / resolution_));
    std::int32_t iy = static_cast<std::int32_t>(
        std::floor((p.y - origin_.y) / resolution_));
    ix = std::max(0, std::min(nx_ - 1, ix));
    iy = std::max(0, std::min(ny_ - 1, iy));
    return at(ix, iy);
  }

  /// Bilinear elevation at p over the cell-center lattice; nullopt outside
  /// the lattice hull. The field must be lattice-aligned (origin a multiple
  /// of resolution), which generate_terrain and load_height_field guarantee.
  std::optional<double> elevation_at(const Vec2& p) const {
    const std::int32_t bx =
        static_cast<std::int32_t>(std::llround(origin_.x / resolution_));
    const std::int32_t by =
        static_cast<std::int32_t>(std::llround(origin_.y / resolution_));
    return bilinear_world(
        p.x, p.y, resolution_,
        [&](std::int32_t cx, std::int32_t cy) {
          return cx >= bx && cx < bx + nx_ && cy >= by && cy < by + ny_;
        },
        [&](std::int32_t cx, std::int32_t cy) {
          return static_cast<double>(at(cx - bx, cy - by));
        });
  }

  float min_elevation() const {
    float m = elevations_.empty() ? 0.0f : elevations_[0];
    for (float e : elevations_) m = std::min(m, e);
    return m;
  }
  float max_elevation() const {
    float m = elevations_.empty() ? 0.0f : elevations_[0];
    for (float e : elevations_) m = std::max(m, e);
    return m;
  }

 private:
  std::int32_t nx_ = 0;
  std::int32_t ny_ = 0;
  double resolution_ = 1.0;
  Vec2 origin_;
  std::vector<float> elevations_;
};

namespace detail {

inline double noise_lattice_value(std::uint64_t seed, std::int64_t gx,
                                  std::int64_t gy, std::uint64_t octave) {
  std::uint64_t h = seed ^ (0x9e3779b97f4a7c15ULL * (octave + 1));
  h ^= static_cast<std::uint64_t>(gx) * 0xff51afd7ed558ccdULL;
  h ^= static_cast<std::uint64_t>(gy) * 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double smoothstep5(double t) {
  return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

/// Seeded value noise in [0, 1] with horizontal wavelength `scale`.
inline double value_noise(std::uint64_t seed, double x, double y, double scale,
                          std::uint64_t octave) {
  const double gx = x / scale;
  const double gy = y / scale;
  const std::int64_t ix = static_cast<std::int64_t>(std::floor(gx));
  const std::int64_t iy = static_cast<std::int64_t>(std::floor(gy));
  const double tx = smoothstep5(gx - ix);
  const double ty = smoothstep5(gy - iy);
  const double v00 = noise_lattice_value(seed, ix, iy, octave);
  const double v10 = noise_lattice_value(seed, ix + 1, iy, octave);
  const double v01 = noise_lattice_value(seed, ix, iy + 1, octave);
  const double v11 = noise_lattice_value(seed, ix + 1, iy + 1, octave);
  return (1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10 +
         (1.0 - tx) * ty * v01 + tx * ty * v11;
}

}  // namespace detail

/// Synthesizes a ground-truth world. Deterministic for a fixed spec.
inline HeightField generate_terrain(const TerrainSpec& spec) {
  spec.validate();
  if (spec.kind == TerrainKind::Imported)
    throw std::invalid_argument(
        "terrain.kind: Imported requires loading via load_height_field");

  const std::int32_t nx =
      static_cast<std::int32_t>(std::llround(spec.area_w / spec.resolution));
  const std::int32_t ny =
      static_cast<std::int32_t>(std::llround(spec.area_h / spec.resolution));
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("terrain.area: too small for resolution");

  HeightField field(nx, ny, spec.resolution);

  // Rolling base: two octaves of value noise scaled into [0, amplitude].
  for (std::int32_t iy = 0; iy < ny; ++iy) {
    for (std::int32_t ix = 0; ix < nx; ++ix) {
      const Vec2 c = cell_center({ix, iy}, spec.resolution);
      double n = 0.75 * detail::value_noise(spec.seed, c.x, c.y,
                                            spec.feature_scale, 0) +
                 0.25 * detail::value_noise(spec.seed, c.x, c.y,
                                            spec.feature_scale * 0.5, 1);
      field.at(ix, iy) = static_cast<float>(spec.amplitude * n);
    }
  }

  // Vertical insets: genuinely untraversable walls. Hilly uses square mesas,
  // Forest uses thin trunks scattered more densely.
  Rng rng(spec.seed * 1315423911ULL + 17);
  const int count =
      spec.kind == TerrainKind::Forest ? std::max(spec.cliff_count, 0)
                                       : spec.cliff_count;
  const double half_extent = spec.kind == TerrainKind::Forest
                                 ? 0.3
                                 : std::max(1.0, spec.feature_scale * 0.15);
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.1, 0.9) * spec.area_w;
    const double cy = rng.uniform(0.1, 0.9) * spec.area_h;
    const std::int32_t x_lo = static_cast<std::int32_t>(
        std::floor((cx - half_extent) / spec.resolution));
    const std::int32_t x_hi = static_cast<std::int32_t>(
        std::floor((cx + half_extent) / spec.resolution));
    const std::int32_t y_lo = static_cast<std::int32_t>(
        std::floor((cy - half_extent) / spec.resolution));
    const std::int32_t y_hi = static_cast<std::int32_t>(
        std::floor((cy + half_extent) / spec.resolution));
    for (std::int32_t iy = std::max(0, y_lo);
         iy <= std::min(ny - 1, y_hi); ++iy) {
      for (std::int32_t ix = std::max(0, x_lo);
           ix <= std::min(nx - 1, x_hi); ++ix) {
        field.at(ix, iy) += static_cast<float>(spec.cliff_height);
      }
    }
  }
  return field;
}

/// Text heightmap format: line 1 `W H resolution`, then W*H row-major
/// elevations in meters. Values are printed with 9 significant digits, which
/// round-trips single-precision storage exactly.
inline void save_height_field(const HeightField& field, std::ostream& os) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d %d %.9g\n", field.cells_x(),
                field.cells_y(), field.resolution());
  os << buf;
  for (std::int32_t iy = 0; iy < field.cells_y(); ++iy) {
    for (std::int32_t ix = 0; ix < field.cells_x(); ++ix) {
      std::snprintf(buf, sizeof(buf), "%.9g", field.at(ix, iy));
      os << buf << (ix + 1 == field.cells_x() ? '\n' : ' ');
    }
  }
}

inline HeightField load_height_field(std::istream& is) {
  std::int32_t nx = 0, ny = 0;
  double resolution = 0.0;
  if (!(is >> nx >> ny >> resolution))
    throw std::runtime_error("heightmap: malformed header");
  if (nx <= 0 || ny <= 0 || resolution <= 0.0)
    throw std::runtime_error("heightmap: invalid dimensions or resolution");
  HeightField field(nx, ny, resolution);
  for (std::int32_t iy = 0; iy < ny; ++iy) {
    for (std::int32_t ix = 0; ix < nx; ++ix) {
      float e;
      if (!(is >> e)) throw std::runtime_error("heightmap: truncated data");
      if (!std::isfinite(e))
        throw std::runtime_error("heightmap: non-finite elevation");
      field.at(ix, iy) = e;
    }
  }
  return field;
}

inline void save_height_field(const HeightField& field,
                              const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  save_height_field(field, os);
}

inline HeightField load_height_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open heightmap: " + path);
  return load_height_field(is);
}

}  // namespace terranav
