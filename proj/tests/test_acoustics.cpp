#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "occusense/acoustics.hpp"

using namespace occusense;

namespace {

AbsorptionTable paper_materials() { return default_room().table; }

}  // namespace

TEST_CASE("absorption_at returns tabulated coefficients") {
  const AbsorptionTable table = paper_materials();
  CHECK(absorption_at(table, "brick", 3087) == 0.020448859);
  CHECK(absorption_at(table, "carpet", 3087) == 0.612724866);
  CHECK(absorption_at(table, "concrete", 235) == 0.02);
}

TEST_CASE("absorption_at with a single-point table is constant in frequency") {
  AbsorptionTable table;
  table.add_material("concrete", {{1000, 0.05}});
  for (double f : {1.0, 999.0, 1000.0, 1001.0, 1e6}) {
    CHECK(absorption_at(table, "concrete", f) == 0.05);
  }
}

TEST_CASE("absorption_at nearest lookup, ties toward the lower frequency") {
  AbsorptionTable table;
  table.add_material("m", {{100, 0.1}, {200, 0.2}, {400, 0.4}});
  CHECK(absorption_at(table, "m", 120) == 0.1);
  CHECK(absorption_at(table, "m", 180) == 0.2);
  CHECK(absorption_at(table, "m", 150) == 0.1);  // equidistant -> lower
  CHECK(absorption_at(table, "m", 300) == 0.2);  // equidistant -> lower
  CHECK(absorption_at(table, "m", 5000) == 0.4);
}

TEST_CASE("absorption_at linear mode interpolates and clamps") {
  AbsorptionTable table;
  table.add_material("m", {{100, 0.1}, {200, 0.3}});
  CHECK_THAT(absorption_at(table, "m", 150, FrequencyLookup::linear),
             Catch::Matchers::WithinRel(0.2, 1e-12));
  CHECK(absorption_at(table, "m", 50, FrequencyLookup::linear) == 0.1);
  CHECK(absorption_at(table, "m", 250, FrequencyLookup::linear) == 0.3);
}

TEST_CASE("absorption_at errors") {
  const AbsorptionTable table = paper_materials();
  CHECK_THROWS_AS(absorption_at(table, "marble", 1000), MaterialNotFound);
  CHECK_THROWS_AS(absorption_at(table, "brick", 0.0), InvalidFrequency);
  CHECK_THROWS_AS(absorption_at(table, "brick", -10.0), InvalidFrequency);
}

TEST_CASE("absorption table rejects invalid points") {
  AbsorptionTable table;
  CHECK_THROWS_AS(table.add_material("m", {}), InvalidTable);
  CHECK_THROWS_AS(table.add_material("m", {{100, 0.0}}), InvalidTable);
  CHECK_THROWS_AS(table.add_material("m", {{100, 1.5}}), InvalidTable);
  CHECK_THROWS_AS(table.add_material("m", {{-5, 0.5}}), InvalidTable);
  CHECK_THROWS_AS(table.add_material("m", {{100, 0.5}, {100, 0.6}}), InvalidTable);
}

TEST_CASE("mean_absorption of a single surface is that surface's coefficient") {
  AbsorptionTable table;
  table.add_material("carpet", {{3087, 0.612724866}});
  const std::vector<Surface> surfaces = {{"floor", 50.0, "carpet"}};
  const MeanAbsorption alpha = mean_absorption(surfaces, table, 3087);
  CHECK(alpha.value == 0.612724866);
  CHECK(alpha.frequency == 3087);
}

TEST_CASE("mean_absorption is the area-weighted mean") {
  AbsorptionTable table;
  table.add_material("a", {{1000, 0.02}});
  table.add_material("b", {{1000, 0.61}});
  const std::vector<Surface> surfaces = {{"s1", 10.0, "a"}, {"s2", 5.0, "b"}};
  // oracle: (10*0.02 + 5*0.61) / 15
  const double expected = (10.0 * 0.02 + 5.0 * 0.61) / 15.0;
  CHECK_THAT(mean_absorption(surfaces, table, 1000).value,
             Catch::Matchers::WithinAbs(expected, 1e-9));
  CHECK_THAT(mean_absorption(surfaces, table, 1000).value,
             Catch::Matchers::WithinAbs(0.216667, 1e-6));
}

TEST_CASE("mean_absorption is invariant under uniform area scaling") {
  AbsorptionTable table;
  table.add_material("a", {{1000, 0.25}});
  table.add_material("b", {{1000, 0.75}});
  std::vector<Surface> surfaces = {{"s1", 4.0, "a"}, {"s2", 6.0, "b"}};
  const double base = mean_absorption(surfaces, table, 1000).value;
  for (Surface& s : surfaces) s.area *= 3.0;
  CHECK(mean_absorption(surfaces, table, 1000).value == base);
}

TEST_CASE("mean_absorption properties: convexity and permutation invariance") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> area_dist(0.1, 500.0);
  std::uniform_real_distribution<double> coeff_dist(0.01, 1.0);
  std::uniform_int_distribution<int> count_dist(1, 8);

  for (int iter = 0; iter < 200; ++iter) {
    AbsorptionTable table;
    std::vector<Surface> surfaces;
    const int n = count_dist(rng);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::string id = "m" + std::to_string(i);
      const double c = coeff_dist(rng);
      table.add_material(id, {{1000, c}});
      surfaces.push_back({id, area_dist(rng), id});
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    const double value = mean_absorption(surfaces, table, 1000).value;
    CHECK(value >= lo - 1e-12);
    CHECK(value <= hi + 1e-12);

    std::shuffle(surfaces.begin(), surfaces.end(), rng);
    const double shuffled = mean_absorption(surfaces, table, 1000).value;
    CHECK_THAT(shuffled, Catch::Matchers::WithinRel(value, 1e-12));
  }
}

TEST_CASE("mean_absorption errors") {
  const AbsorptionTable table = paper_materials();
  CHECK_THROWS_AS(mean_absorption(std::vector<Surface>{}, table, 1000), EmptySurfaces);
  const std::vector<Surface> unknown = {{"floor", 10.0, "marble"}};
  CHECK_THROWS_AS(mean_absorption(unknown, table, 1000), MaterialNotFound);
}

TEST_CASE("reverberation_time collapses to the Sabine constant when V equals S") {
  const RoomGeometry geometry{10.0, 10.0, 10.0 / 3.0};  // V = S = 1000/3
  const double T = reverberation_time(geometry, {1.0, 1000.0});
  CHECK_THAT(T, Catch::Matchers::WithinRel(0.161, 1e-12));

  const RoomGeometry box{10.0, 5.0, 2.0};  // V = 100, S = 160
  CHECK_THAT(reverberation_time(box, {1.0, 1000.0}),
             Catch::Matchers::WithinRel(0.161 * 100.0 / 160.0, 1e-12));
}

TEST_CASE("reverberation_time matches the worked room") {
  // 70 x 30 x 12 feet in meters
  const RoomGeometry geometry{70 * 0.3048, 30 * 0.3048, 12 * 0.3048};
  CHECK_THAT(geometry.volume(), Catch::Matchers::WithinAbs(713.58, 0.01));
  CHECK_THAT(geometry.boundary_area(), Catch::Matchers::WithinAbs(613.16, 0.01));
  const double T = reverberation_time(geometry, {0.131, 1000.0});
  CHECK_THAT(T, Catch::Matchers::WithinAbs(1.4303, 1e-3));
}

TEST_CASE("reverberation_time halves when absorption doubles") {
  const RoomGeometry geometry{7.3, 4.1, 2.9};
  const double T1 = reverberation_time(geometry, {0.17, 500.0});
  const double T2 = reverberation_time(geometry, {0.34, 500.0});
  CHECK(T2 == T1 / 2.0);
}

TEST_CASE("reverberation_time rejects non-positive absorption") {
  const RoomGeometry geometry{5, 4, 3};
  CHECK_THROWS_AS(reverberation_time(geometry, {0.0, 100.0}), InvalidAbsorption);
  CHECK_THROWS_AS(reverberation_time(geometry, {-0.2, 100.0}), InvalidAbsorption);
  CHECK_THROWS_AS(reverberation_time(RoomGeometry{0, 4, 3}, {0.5, 100.0}), InvalidGeometry);
}

TEST_CASE("Sabine monotonicity") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dim(0.5, 40.0);
  std::uniform_real_distribution<double> alpha_dist(0.05, 0.95);
  for (int iter = 0; iter < 100; ++iter) {
    const RoomGeometry g{dim(rng), dim(rng), dim(rng)};
    const double a = alpha_dist(rng);
    const double T = reverberation_time(g, {a, 1000.0});
    CHECK(T > 0.0);
    CHECK(reverberation_time(g, {a * 1.2, 1000.0}) < T);
    RoomGeometry bigger = g;
    bigger.length *= 1.3;  // scales V by 1.3 and S by less
    CHECK(reverberation_time(bigger, {a, 1000.0}) > T);
  }
}

TEST_CASE("room_reverberation composes lookup, averaging, and Sabine") {
  RoomModel room;
  room.geometry = {10.0, 5.0, 2.0};
  room.table.add_material("m", {{1000, 0.05}});
  // every surface the same single-point material
  room.surfaces = {{"floor", 50.0, "m"}, {"ceiling", 50.0, "m"}, {"walls", 60.0, "m"}};
  const double expected = 0.161 * room.geometry.volume() /
                          (room.geometry.boundary_area() * 0.05);
  CHECK_THAT(room_reverberation(room, 1234.0), Catch::Matchers::WithinRel(expected, 1e-12));

  // V = S makes the ratio collapse to 0.161 / alpha
  RoomModel unit;
  unit.geometry = {10.0, 10.0, 10.0 / 3.0};
  unit.table.add_material("m", {{1000, 0.05}});
  unit.surfaces = {{"all", 100.0, "m"}};
  CHECK_THAT(room_reverberation(unit, 500.0),
             Catch::Matchers::WithinRel(0.161 / 0.05, 1e-12));
}

TEST_CASE("room_reverberation equals the two sub-operations composed") {
  const RoomModel room = default_room();
  for (double f : {235.0, 900.0, 3087.0, 50000.0}) {
    const MeanAbsorption alpha = mean_absorption(room.surfaces, room.table, f, room.lookup);
    const double manual = reverberation_time(room.geometry, alpha);
    CHECK(room_reverberation(room, f) == manual);
  }
}

TEST_CASE("frequency outside the table matches the nearest tabulated point") {
  const RoomModel room = default_room();
  CHECK(room_reverberation(room, 50.0) == room_reverberation(room, 235.0));
  CHECK(room_reverberation(room, 99999.0) == room_reverberation(room, 3087.0));
}

TEST_CASE("room_reverberation is deterministic") {
  const RoomModel room = default_room();
  const double first = room_reverberation(room, 2409.0);
  for (int i = 0; i < 5; ++i) CHECK(room_reverberation(room, 2409.0) == first);
}

TEST_CASE("room config load converts feet and matches the built-in room") {
  const RoomModel loaded = load_room_config(std::string(OCCUSENSE_SOURCE_DIR) +
                                            "/configs/room_default.json");
  const RoomModel builtin = default_room();
  CHECK(loaded.geometry.length == builtin.geometry.length);
  CHECK(loaded.geometry.width == builtin.geometry.width);
  CHECK(loaded.geometry.height == builtin.geometry.height);
  REQUIRE(loaded.surfaces.size() == builtin.surfaces.size());
  for (std::size_t i = 0; i < loaded.surfaces.size(); ++i) {
    CHECK(loaded.surfaces[i].area == builtin.surfaces[i].area);
    CHECK(loaded.surfaces[i].material == builtin.surfaces[i].material);
  }
  REQUIRE(loaded.table.materials.size() == 3);
  for (const auto& [id, points] : builtin.table.materials) {
    const auto& other = loaded.table.materials.at(id);
    REQUIRE(other.size() == points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      CHECK(other[i].frequency == points[i].frequency);
      CHECK(other[i].coefficient == points[i].coefficient);
    }
  }
}

TEST_CASE("room config in meters skips conversion") {
  std::istringstream json(R"({
    "unit": "meters", "length": 10, "width": 5, "height": 2,
    "surfaces": [ { "name": "all", "area": 100, "material": "m" } ],
    "materials": { "m": [[1000, 0.5]] }
  })");
  nlohmann::json doc;
  json >> doc;
  const RoomModel room = parse_room_config(doc);
  CHECK(room.geometry.length == 10.0);
  CHECK(room.surfaces.front().area == 100.0);
}

TEST_CASE("room config rejects malformed documents") {
  auto parse = [](const char* text) {
    return parse_room_config(nlohmann::json::parse(text));
  };
  CHECK_THROWS_AS(parse(R"({"unit":"yards","length":1,"width":1,"height":1,
    "surfaces":[{"name":"a","area":1,"material":"m"}],"materials":{"m":[[100,0.5]]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse(R"({"unit":"meters","length":0,"width":1,"height":1,
    "surfaces":[{"name":"a","area":1,"material":"m"}],"materials":{"m":[[100,0.5]]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse(R"({"unit":"meters","length":1,"width":1,"height":1,
    "surfaces":[],"materials":{"m":[[100,0.5]]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse(R"({"unit":"meters","length":1,"width":1,"height":1,
    "surfaces":[{"name":"a","area":1,"material":"granite"}],"materials":{"m":[[100,0.5]]}})"),
                  ConfigError);
  CHECK_THROWS_AS(load_room_config("/nonexistent/room.json"), IoError);
}
