#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "terranav/feasibility.hpp"
#include "terranav/grid_map.hpp"
#include "terranav/height_field.hpp"

using namespace terranav;

namespace {

/// Field h(x, y) = slope * x, fully sensed into a window.
LocalGridMap ramp_map(double slope, std::int32_t n = 41, double res = 0.25) {
  HeightField f(n, n, res);
  for (std::int32_t j = 0; j < n; ++j)
    for (std::int32_t i = 0; i < n; ++i)
      f.at(i, j) = static_cast<float>(slope * cell_center({i, 0}, res).x);
  const Vec2 mid{n * res / 2.0, n * res / 2.0};
  return LocalGridMap::sense(f, mid, n * res, n, n, nullptr);
}

FeasibilityParams params(double alpha, double beta, double meta) {
  FeasibilityParams p;
  p.alpha_grad = alpha;
  p.beta_flat = beta;
  p.meta_len = meta;
  return p;
}

}  // namespace

TEST_CASE("gradability: flat terrain gives all-zero slopes") {
  const auto map = ramp_map(0.0);
  const auto grads = gradability(map, {2.0, 3.0}, {4.5, 4.0}, 0.25);
  for (const auto& g : grads) {
    REQUIRE(g.has_value());
    REQUIRE(*g == Catch::Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("gradability: linear ramp yields the exact uniform slope") {
  // h(x,y) = 0.1 x; a 1 m segment along x at meta 0.2 gives five segments
  // of slope 0.1 each (bilinear reproduces a linear field exactly).
  const auto map = ramp_map(0.1);
  const auto grads = gradability(map, {3.0, 5.0}, {4.0, 5.0}, 0.2);
  REQUIRE(grads.size() == 5);
  for (const auto& g : grads) {
    REQUIRE(g.has_value());
    REQUIRE(*g == Catch::Approx(0.1).margin(1e-6));
  }
}

TEST_CASE("gradability rejects a degenerate segment") {
  const auto map = ramp_map(0.0);
  REQUIRE_THROWS_AS(gradability(map, {2.0, 2.0}, {2.0, 2.0}, 0.25),
                    std::invalid_argument);
}

TEST_CASE("check_feasibility clauses") {
  SECTION("flat ground is feasible") {
    const auto map = ramp_map(0.0);
    const auto r = check_feasibility(map, {2.0, 2.0}, {5.0, 6.0},
                                     params(0.5, 2.0, 0.25));
    REQUIRE(r.feasible());
  }

  SECTION("a slope just over alpha fires the slope clause") {
    const double alpha = 0.5;
    const auto map = ramp_map(alpha * 1.01);
    const auto r = check_feasibility(map, {3.0, 5.0}, {4.0, 5.0},
                                     params(alpha, 100.0, 0.25));
    REQUIRE(r.infeasible());
    REQUIRE(r.reason == InfeasibleReason::Slope);
  }

  SECTION("descents violate alpha like ascents") {
    const double alpha = 0.5;
    const auto map = ramp_map(alpha * 1.01);
    const auto r = check_feasibility(map, {4.0, 5.0}, {3.0, 5.0},
                                     params(alpha, 100.0, 0.25));
    REQUIRE(r.infeasible());
    REQUIRE(r.reason == InfeasibleReason::Slope);
  }

  SECTION("ten meta segments of beta/9 each fire the flatness clause") {
    // slope 0.1 per meta over a 2 m segment, meta 0.2: sum = 1.0 > beta 0.9
    // while alpha 0.5 never trips.
    const auto map = ramp_map(0.1);
    const auto r = check_feasibility(map, {3.0, 5.0}, {5.0, 5.0},
                                     params(0.5, 0.9, 0.2));
    REQUIRE(r.infeasible());
    REQUIRE(r.reason == InfeasibleReason::Flatness);
  }

  SECTION("unknown terrain yields Unknown") {
    HeightField f(41, 41, 0.25);
    const auto map = LocalGridMap::sense(f, {5.0, 5.0}, 1.5, 41, 41, nullptr);
    const auto r = check_feasibility(map, {5.0, 5.0}, {9.0, 9.0},
                                     params(0.5, 2.0, 0.25));
    REQUIRE(r.unknown());
  }

  SECTION("a known slope violation dominates unknown segments") {
    HeightField f(41, 41, 0.25);
    // wall right next to the start, rest of the segment unsensed
    for (std::int32_t j = 0; j < 41; ++j)
      for (std::int32_t i = 24; i < 41; ++i) f.at(i, j) = 8.0f;
    const auto map = LocalGridMap::sense(f, {5.0, 5.0}, 1.8, 41, 41, nullptr);
    const auto r = check_feasibility(map, {5.0, 5.0}, {9.5, 5.0},
                                     params(0.5, 2.0, 0.25));
    REQUIRE(r.infeasible());
    REQUIRE(r.reason == InfeasibleReason::Slope);
  }

  SECTION("hazard-cell intersection is infeasible") {
    auto map = ramp_map(0.0);
    // flag a strip crossing the segment midway
    for (std::int32_t j = 0; j < 41; ++j)
      map.flag_hazard({world_to_cell({3.6, 0.0}, 0.25).x, map.anchor().y + j});
    const auto r = check_feasibility(map, {2.0, 5.0}, {5.0, 5.0},
                                     params(0.5, 2.0, 0.25));
    REQUIRE(r.infeasible());
    REQUIRE(r.reason == InfeasibleReason::Hazard);
  }

  SECTION("zero-length edge with no hazard is feasible") {
    const auto map = ramp_map(0.0);
    REQUIRE(check_feasibility(map, {2.0, 2.0}, {2.0, 2.0},
                              params(0.5, 2.0, 0.25))
                .feasible());
  }
}

TEST_CASE("feasibility agrees with the brute-force evaluator") {
  // Randomized cross-check on a synthetic field holding gentle and harsh
  // slopes plus a hazard patch; the acceptance suite runs the full-size
  // version of this comparison.
  TerrainSpec spec;
  spec.seed = 11;
  spec.area_w = 5.0;
  spec.area_h = 5.0;
  spec.resolution = 0.1;
  spec.amplitude = 0.9;
  spec.feature_scale = 1.6;
  const HeightField f = generate_terrain(spec);
  auto map = LocalGridMap::sense(f, {2.5, 2.5}, 10.0, 50, 50, nullptr);

  oracle::DenseGrid grid;
  grid.nx = 50;
  grid.ny = 50;
  grid.res = 0.1;
  grid.cells.resize(50 * 50);
  for (int j = 0; j < 50; ++j)
    for (int i = 0; i < 50; ++i) grid.at(i, j) = f.at(i, j);

  // hazard patch in both views
  for (int j = 20; j < 24; ++j) {
    for (int i = 30; i < 34; ++i) {
      map.flag_hazard({i, j});
      grid.hazards.insert(oracle::DenseGrid::key(i, j));
    }
  }

  const FeasibilityParams p = params(0.45, 1.6, 0.1);
  Rng rng(000'777);
  int infeasible_seen = 0, feasible_seen = 0;
  for (int k = 0; k < 400; ++k) {
    const Vec2 a{rng.uniform(0.2, 4.8), rng.uniform(0.2, 4.8)};
    const Vec2 b{rng.uniform(0.2, 4.8), rng.uniform(0.2, 4.8)};
    if (distance(a, b) == 0.0) continue;
    const auto got = check_feasibility(map, a, b, p);
    const auto want =
        oracle::check_segment(grid, a.x, a.y, b.x, b.y, 0.45, 1.6, 0.1);
    switch (want) {
      case oracle::Verdict::Feasible:
        REQUIRE(got.feasible());
        ++feasible_seen;
        break;
      case oracle::Verdict::Unknown:
        REQUIRE(got.unknown());
        break;
      case oracle::Verdict::InfeasibleSlope:
        REQUIRE(got.infeasible());
        REQUIRE(got.reason == InfeasibleReason::Slope);
        ++infeasible_seen;
        break;
      case oracle::Verdict::InfeasibleFlatness:
        REQUIRE(got.infeasible());
        REQUIRE(got.reason == InfeasibleReason::Flatness);
        ++infeasible_seen;
        break;
      case oracle::Verdict::InfeasibleHazard:
        REQUIRE(got.infeasible());
        REQUIRE(got.reason == InfeasibleReason::Hazard);
        ++infeasible_seen;
        break;
    }
  }
  // the instance must exercise both outcomes to be meaningful
  REQUIRE(infeasible_seen > 20);
  REQUIRE(feasible_seen > 20);
}

TEST_CASE("mean_abs_gradability averages known meta slopes") {
  const auto map = ramp_map(0.2);
  REQUIRE(mean_abs_gradability(map, {3.0, 5.0}, {4.0, 5.0}, 0.25) ==
          Catch::Approx(0.2).margin(1e-6));
  REQUIRE(mean_abs_gradability(map, {3.0, 5.0}, {3.0, 5.0}, 0.25) == 0.0);
}
