#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "terranav/grid_map.hpp"
#include "terranav/height_field.hpp"

using namespace terranav;

namespace {

HeightField flat_field(std::int32_t n = 64, double res = 0.25) {
  return HeightField(n, n, res);
}

HeightField noisy_field() {
  TerrainSpec s;
  s.seed = 3;
  s.area_w = 16.0;
  s.area_h = 16.0;
  s.resolution = 0.25;
  s.amplitude = 1.5;
  s.feature_scale = 6.0;
  return generate_terrain(s);
}

}  // namespace

TEST_CASE("sense with radius covering the window leaves no unknown cells") {
  const HeightField f = noisy_field();
  const Vec2 robot{8.0, 8.0};
  const auto map = LocalGridMap::sense(f, robot, 10.0, 21, 21, nullptr);
  std::size_t unknown = 0;
  for (std::int32_t ly = 0; ly < 21; ++ly)
    for (std::int32_t lx = 0; lx < 21; ++lx)
      if (!map.known({map.anchor().x + lx, map.anchor().y + ly})) ++unknown;
  REQUIRE(unknown == 0);
  REQUIRE(map.known_count() == 21 * 21);
}

TEST_CASE("sense at the field corner marks out-of-field cells unknown") {
  const HeightField f = noisy_field();
  const auto map = LocalGridMap::sense(f, {0.3, 0.3}, 10.0, 21, 21, nullptr);
  REQUIRE(map.known_count() < 21 * 21);
  REQUIRE_FALSE(map.known({-1, -1}));
  REQUIRE(map.known(world_to_cell({0.3, 0.3}, f.resolution())));
}

TEST_CASE("sense rejects a robot outside the field") {
  const HeightField f = noisy_field();
  REQUIRE_THROWS_AS(LocalGridMap::sense(f, {99.0, 0.0}, 5.0, 21, 21, nullptr),
                    std::invalid_argument);
}

TEST_CASE("known window cells agree exactly with the field at cell centers") {
  const HeightField f = noisy_field();
  const auto map = LocalGridMap::sense(f, {6.1, 9.7}, 4.0, 33, 33, nullptr);
  for (std::int32_t ly = 0; ly < 33; ++ly) {
    for (std::int32_t lx = 0; lx < 33; ++lx) {
      const CellIndex c{map.anchor().x + lx, map.anchor().y + ly};
      if (!map.known(c)) continue;
      REQUIRE(map.cell(c).elevation == f.at(c.x, c.y));
    }
  }
}

TEST_CASE("sensing is idempotent at a fixed pose") {
  const HeightField f = noisy_field();
  const auto a = LocalGridMap::sense(f, {5.0, 5.0}, 3.0, 21, 21, nullptr);
  const auto b = LocalGridMap::sense(f, {5.0, 5.0}, 3.0, 21, 21, &a);
  for (std::int32_t ly = 0; ly < 21; ++ly) {
    for (std::int32_t lx = 0; lx < 21; ++lx) {
      const CellIndex c{a.anchor().x + lx, a.anchor().y + ly};
      REQUIRE(a.known(c) == b.known(c));
      if (a.known(c)) REQUIRE(a.cell(c).elevation == b.cell(c).elevation);
    }
  }
}

TEST_CASE("window displaced by a full window width shares no prior cells") {
  // Window 21 cells x 0.25 m = 5.25 m. Displacement of exactly one window
  // width moves the anchor by 21 cells: the windows are disjoint, so with a
  // zero-ish second radius every carried cell must be unknown.
  const HeightField f = flat_field(128, 0.25);
  const Vec2 first{8.0, 8.0};
  const auto a = LocalGridMap::sense(f, first, 10.0, 21, 21, nullptr);
  REQUIRE(a.known_count() == 21 * 21);
  const Vec2 second{8.0 + 21 * 0.25, 8.0};
  const auto b = LocalGridMap::sense(f, second, 0.05, 21, 21, &a);
  // only cells within the tiny radius are known; nothing carried from `a`
  for (std::int32_t ly = 0; ly < 21; ++ly) {
    for (std::int32_t lx = 0; lx < 21; ++lx) {
      const CellIndex c{b.anchor().x + lx, b.anchor().y + ly};
      if (!b.known(c)) continue;
      REQUIRE(distance(cell_center(c, 0.25), second) <= 0.05);
    }
  }
  REQUIRE(b.anchor().x - a.anchor().x == 21);
}

TEST_CASE("recentring carries known cells and never changes their values") {
  const HeightField f = noisy_field();
  Vec2 robot{4.0, 4.0};
  auto map = LocalGridMap::sense(f, robot, 3.0, 25, 25, nullptr);
  Rng rng(99);
  for (int step = 0; step < 20; ++step) {
    const Vec2 next{robot.x + rng.uniform(-0.6, 0.9),
                    robot.y + rng.uniform(-0.6, 0.9)};
    if (!f.in_bounds(next)) continue;
    const auto fresh = LocalGridMap::sense(f, next, 3.0, 25, 25, &map);
    for (std::int32_t ly = 0; ly < 25; ++ly) {
      for (std::int32_t lx = 0; lx < 25; ++lx) {
        const CellIndex c{fresh.anchor().x + lx, fresh.anchor().y + ly};
        if (map.known(c)) {
          REQUIRE(fresh.known(c));
          REQUIRE(fresh.cell(c).elevation == map.cell(c).elevation);
        }
      }
    }
    map = fresh;
    robot = next;
  }
}

TEST_CASE("hazard flags carry over and require known elevation") {
  const HeightField f = flat_field();
  auto map = LocalGridMap::sense(f, {8.0, 8.0}, 3.0, 21, 21, nullptr);
  const CellIndex known_cell = world_to_cell({8.5, 8.5}, 0.25);
  REQUIRE(map.flag_hazard(known_cell));
  REQUIRE(map.hazard_at(known_cell));

  // unknown cell: flag refused
  const CellIndex far_cell = world_to_cell({8.0 + 2.9, 8.0 + 2.9}, 0.25);
  if (!map.known(far_cell)) REQUIRE_FALSE(map.flag_hazard(far_cell));

  // carried across a recenter
  const auto moved = LocalGridMap::sense(f, {8.6, 8.2}, 3.0, 21, 21, &map);
  REQUIRE(moved.hazard_at(known_cell));
}

TEST_CASE("hazard layer marking geometry") {
  HazardLayer layer(0.25);

  SECTION("zero radius flags only the containing cell") {
    const auto added = layer.mark({1.13, 2.71}, 0.0);
    REQUIRE(added.size() == 1);
    REQUIRE(added[0] == world_to_cell({1.13, 2.71}, 0.25));
  }

  SECTION("overlapping discs flag fewer cells than two disjoint discs") {
    const auto a = layer.mark({4.0, 4.0}, 0.5);
    const auto b = layer.mark({4.25, 4.0}, 0.5);  // half-radius apart
    HazardLayer other(0.25);
    const auto c = other.mark({10.0, 10.0}, 0.5);
    REQUIRE(a.size() == c.size());
    REQUIRE(b.size() < c.size());  // overlap suppressed duplicates
    REQUIRE(layer.size() == a.size() + b.size());
  }

  SECTION("marks are monotone and idempotent") {
    layer.mark({4.0, 4.0}, 0.5);
    const std::size_t n = layer.size();
    const auto again = layer.mark({4.0, 4.0}, 0.5);
    REQUIRE(again.empty());
    REQUIRE(layer.size() == n);
  }

  SECTION("bounds clip without error") {
    HazardLayer clipped(0.25);
    clipped.set_bounds({0, 0}, {63, 63});
    clipped.mark({0.1, 0.1}, 1.0);
    for (std::int64_t key : clipped.raw()) {
      const auto x = static_cast<std::int32_t>(key >> 32);
      const auto y = static_cast<std::int32_t>(key & 0xffffffffLL);
      REQUIRE(x >= 0);
      REQUIRE(y >= 0);
    }
  }

  SECTION("exempt cells are never flagged") {
    HazardLayer ex(0.25);
    std::unordered_set<std::int64_t> visited{
        cell_key(world_to_cell({4.0, 4.0}, 0.25))};
    ex.mark({4.05, 4.05}, 0.6, &visited);
    REQUIRE_FALSE(ex.contains(world_to_cell({4.0, 4.0}, 0.25)));
    REQUIRE(ex.size() > 0);
  }
}

TEST_CASE("known terrain record absorbs senses and matches the window") {
  const HeightField f = noisy_field();
  KnownTerrain record(f.resolution());
  const auto map = LocalGridMap::sense(f, {7.0, 7.0}, 3.0, 25, 25, nullptr);
  record.absorb(map);
  // bilinear agreement wherever the window is defined
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{rng.uniform(5.0, 9.0), rng.uniform(5.0, 9.0)};
    const auto a = map.elevation_at(p);
    const auto b = record.elevation_at(p);
    REQUIRE(a.has_value() == b.has_value());
    if (a) REQUIRE(*a == *b);
  }
}
