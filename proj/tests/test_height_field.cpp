#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "terranav/height_field.hpp"

using namespace terranav;

namespace {

TerrainSpec hilly_spec(std::uint64_t seed = 7) {
  TerrainSpec s;
  s.kind = TerrainKind::Hilly;
  s.seed = seed;
  s.area_w = 32.0;
  s.area_h = 32.0;
  s.resolution = 0.25;
  s.amplitude = 2.4;
  s.feature_scale = 10.0;
  return s;
}

}  // namespace

TEST_CASE("generate_terrain is deterministic per seed") {
  const HeightField a = generate_terrain(hilly_spec());
  const HeightField b = generate_terrain(hilly_spec());
  REQUIRE(a.cells_x() == b.cells_x());
  for (std::int32_t j = 0; j < a.cells_y(); ++j)
    for (std::int32_t i = 0; i < a.cells_x(); ++i)
      REQUIRE(a.at(i, j) == b.at(i, j));

  const HeightField c = generate_terrain(hilly_spec(8));
  bool any_diff = false;
  for (std::int32_t j = 0; j < a.cells_y() && !any_diff; ++j)
    for (std::int32_t i = 0; i < a.cells_x() && !any_diff; ++i)
      any_diff = a.at(i, j) != c.at(i, j);
  REQUIRE(any_diff);
}

TEST_CASE("zero amplitude gives a uniformly flat field") {
  TerrainSpec s = hilly_spec();
  s.amplitude = 0.0;
  const HeightField f = generate_terrain(s);
  for (std::int32_t j = 0; j < f.cells_y(); ++j)
    for (std::int32_t i = 0; i < f.cells_x(); ++i)
      REQUIRE(f.at(i, j) == 0.0f);
}

TEST_CASE("hilly elevations stay within amplitude bounds with real spread") {
  const HeightField f = generate_terrain(hilly_spec());
  const float lo = f.min_elevation();
  const float hi = f.max_elevation();
  REQUIRE(lo >= 0.0f);
  REQUIRE(hi <= 2.4f);
  // Table-I-like spread: the realized relief is a large fraction of the
  // amplitude, not a degenerate ripple.
  REQUIRE(hi - lo > 0.25f * 2.4f);
}

TEST_CASE("cliff insets create genuinely infeasible walls") {
  TerrainSpec s = hilly_spec();
  s.amplitude = 0.0;
  s.cliff_count = 3;
  s.cliff_height = 4.0;
  const HeightField f = generate_terrain(s);
  REQUIRE(f.max_elevation() >= 4.0f);
  REQUIRE(f.min_elevation() == 0.0f);
}

TEST_CASE("terrain spec validation names the offending field") {
  TerrainSpec s = hilly_spec();
  s.resolution = -0.1;
  REQUIRE_THROWS_WITH(generate_terrain(s),
                      Catch::Matchers::ContainsSubstring("resolution"));
  s = hilly_spec();
  s.area_w = 0.0;
  REQUIRE_THROWS_WITH(generate_terrain(s),
                      Catch::Matchers::ContainsSubstring("area"));
  s = hilly_spec();
  s.kind = TerrainKind::Imported;
  REQUIRE_THROWS_AS(generate_terrain(s), std::invalid_argument);
}

TEST_CASE("bilinear lookup: cell-center identity and linear midpoint") {
  HeightField f(4, 4, 0.5);
  // column i holds elevation i (linear in x), constant in y
  for (std::int32_t j = 0; j < 4; ++j)
    for (std::int32_t i = 0; i < 4; ++i) f.at(i, j) = static_cast<float>(i);

  // exact interior cell center
  const Vec2 c11 = cell_center({1, 1}, 0.5);
  REQUIRE(f.elevation_at(c11).has_value());
  REQUIRE(*f.elevation_at(c11) == Catch::Approx(1.0).margin(1e-12));

  // midway between centers with elevations 1.0 and 2.0
  const Vec2 mid{(cell_center({1, 1}, 0.5).x + cell_center({2, 1}, 0.5).x) / 2,
                 c11.y};
  REQUIRE(*f.elevation_at(mid) == Catch::Approx(1.5).margin(1e-12));

  // outside the lattice hull
  REQUIRE_FALSE(f.elevation_at({-1.0, 0.3}).has_value());
  REQUIRE_FALSE(f.elevation_at({10.0, 0.3}).has_value());
}

TEST_CASE("heightmap text format round-trips bit-exactly") {
  const HeightField f = generate_terrain(hilly_spec(42));
  std::stringstream ss;
  save_height_field(f, ss);
  const HeightField g = load_height_field(ss);
  REQUIRE(g.cells_x() == f.cells_x());
  REQUIRE(g.cells_y() == f.cells_y());
  REQUIRE(g.resolution() == f.resolution());
  for (std::int32_t j = 0; j < f.cells_y(); ++j)
    for (std::int32_t i = 0; i < f.cells_x(); ++i)
      REQUIRE(g.at(i, j) == f.at(i, j));

  // second round trip is textually identical too
  std::stringstream ss2;
  save_height_field(g, ss2);
  std::stringstream ss3;
  save_height_field(f, ss3);
  REQUIRE(ss2.str() == ss3.str());
}

TEST_CASE("heightmap loader rejects malformed input") {
  std::stringstream bad_header("x y z");
  REQUIRE_THROWS_AS(load_height_field(bad_header), std::runtime_error);
  std::stringstream truncated("2 2 0.5\n1.0 2.0 3.0");
  REQUIRE_THROWS_AS(load_height_field(truncated), std::runtime_error);
  std::stringstream nonfinite("2 2 0.5\n1 2 3 nan");
  REQUIRE_THROWS_AS(load_height_field(nonfinite), std::runtime_error);
  std::stringstream bad_dims("0 2 0.5\n");
  REQUIRE_THROWS_AS(load_height_field(bad_dims), std::runtime_error);
}
