#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "occusense/errors.hpp"

namespace occusense {

// Sabine constant for SI units (volume m^3, area m^2, T seconds).
constexpr double kSabineConstant = 0.161;
constexpr double kFeetToMeters = 0.3048;
constexpr double kSquareFeetToSquareMeters = 0.09290304;

// Room box dimensions in meters.
struct RoomGeometry {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;

  double volume() const { return length * width * height; }
  double boundary_area() const {
    return 2.0 * (length * width + length * height + width * height);
  }
  void validate() const {
    if (!(length > 0.0) || !(width > 0.0) || !(height > 0.0)) {
      throw InvalidGeometry("room dimensions must be positive");
    }
  }
};

// One absorbing surface of the enclosure, in square meters.
struct Surface {
  std::string name;
  double area = 0.0;
  std::string material;
};

struct AbsorptionPoint {
  double frequency;    // hertz
  double coefficient;  // fraction of incident energy absorbed, (0, 1]
};

// Per-material absorption coefficient samples, sorted by frequency.
struct AbsorptionTable {
  std::map<std::string, std::vector<AbsorptionPoint>> materials;

  // Sorts the points and enforces the table invariants.
  void add_material(const std::string& id, std::vector<AbsorptionPoint> points) {
    if (points.empty()) {
      throw InvalidTable("material '" + id + "' has no absorption points");
    }
    std::sort(points.begin(), points.end(),
              [](const AbsorptionPoint& a, const AbsorptionPoint& b) {
                return a.frequency < b.frequency;
              });
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i].frequency > 0.0) || !std::isfinite(points[i].frequency)) {
        throw InvalidTable("material '" + id + "': frequency must be positive");
      }
      if (!(points[i].coefficient > 0.0) || !(points[i].coefficient <= 1.0)) {
        throw InvalidTable("material '" + id + "': coefficient must be in (0, 1]");
      }
      if (i > 0 && !(points[i].frequency > points[i - 1].frequency)) {
        throw InvalidTable("material '" + id + "': duplicate frequency " +
                           std::to_string(points[i].frequency));
      }
    }
    materials[id] = std::move(points);
  }
};

enum class FrequencyLookup { nearest, linear };

// Area-weighted mean absorption coefficient at one frequency.
struct MeanAbsorption {
  double value = 0.0;
  double frequency = 0.0;
};

// Coefficient of one material at the given frequency. Nearest mode picks the
// closest tabulated point (ties toward the lower frequency); linear mode
// interpolates between neighbours and clamps outside the tabulated range.
inline double absorption_at(const AbsorptionTable& table, const std::string& material_id,
                            double frequency,
                            FrequencyLookup lookup = FrequencyLookup::nearest) {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw InvalidFrequency("frequency must be positive, got " + std::to_string(frequency));
  }
  const auto it = table.materials.find(material_id);
  if (it == table.materials.end()) {
    throw MaterialNotFound("unknown material '" + material_id + "'");
  }
  const std::vector<AbsorptionPoint>& points = it->second;

  if (lookup == FrequencyLookup::linear) {
    if (frequency <= points.front().frequency) return points.front().coefficient;
    if (frequency >= points.back().frequency) return points.back().coefficient;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (frequency <= points[i].frequency) {
        const AbsorptionPoint& lo = points[i - 1];
        const AbsorptionPoint& hi = points[i];
        const double t = (frequency - lo.frequency) / (hi.frequency - lo.frequency);
        return lo.coefficient + t * (hi.coefficient - lo.coefficient);
      }
    }
  }

  // Nearest point; ascending scan keeps the lower frequency on a tie.
  const AbsorptionPoint* best = &points.front();
  double best_dist = std::abs(frequency - best->frequency);
  for (const AbsorptionPoint& p : points) {
    const double dist = std::abs(frequency - p.frequency);
    if (dist < best_dist) {
      best = &p;
      best_dist = dist;
    }
  }
  return best->coefficient;
}

inline MeanAbsorption mean_absorption(std::span<const Surface> surfaces,
                                      const AbsorptionTable& table, double frequency,
                                      FrequencyLookup lookup = FrequencyLookup::nearest) {
  if (surfaces.empty()) {
    throw EmptySurfaces("no surfaces to average over");
  }
  double weighted = 0.0;
  double total_area = 0.0;
  for (const Surface& s : surfaces) {
    if (!(s.area > 0.0)) {
      throw InvalidGeometry("surface '" + s.name + "' area must be positive");
    }
    weighted += s.area * absorption_at(table, s.material, frequency, lookup);
    total_area += s.area;
  }
  return {weighted / total_area, frequency};
}

// Sabine reverberation time T = 0.161 * V / (S * alpha), seconds.
inline double reverberation_time(const RoomGeometry& geometry, const MeanAbsorption& alpha) {
  geometry.validate();
  if (!(alpha.value > 0.0)) {
    throw InvalidAbsorption("mean absorption must be positive, got " +
                            std::to_string(alpha.value));
  }
  return kSabineConstant * geometry.volume() / (geometry.boundary_area() * alpha.value);
}

// Room geometry plus its absorbing surfaces and material table.
struct RoomModel {
  RoomGeometry geometry;
  std::vector<Surface> surfaces;
  AbsorptionTable table;
  FrequencyLookup lookup = FrequencyLookup::nearest;
};

// Entry point used by the feature pipeline: mean absorption at the sensed
// frequency, then Sabine.
inline double room_reverberation(const RoomModel& room, double frequency) {
  const MeanAbsorption alpha = mean_absorption(room.surfaces, room.table, frequency, room.lookup);
  return reverberation_time(room.geometry, alpha);
}

// --- room config -----------------------------------------------------------
//
// {
//   "unit": "feet" | "meters",
//   "length": 70, "width": 30, "height": 12,
//   "lookup": "nearest" | "linear",          (optional, default nearest)
//   "surfaces": [ { "name": "floor", "area": 2100, "material": "carpet" }, ... ],
//   "materials": { "brick": [[235, 0.047578626], ...], ... }
// }
//
// Lengths and areas follow the unit flag (feet -> meters, square feet ->
// square meters on load).

inline RoomModel parse_room_config(const nlohmann::json& doc) {
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw ConfigError(std::string("room config: missing '") + key + "'");
    return doc.at(key);
  };
  auto number = [](const nlohmann::json& v, const char* what) -> double {
    if (!v.is_number()) throw ConfigError(std::string("room config: '") + what + "' must be a number");
    return v.get<double>();
  };

  const std::string unit = require("unit").is_string() ? doc.at("unit").get<std::string>() : "";
  double length_scale = 0.0;
  double area_scale = 0.0;
  if (unit == "feet") {
    length_scale = kFeetToMeters;
    area_scale = kSquareFeetToSquareMeters;
  } else if (unit == "meters") {
    length_scale = 1.0;
    area_scale = 1.0;
  } else {
    throw ConfigError("room config: unit must be \"feet\" or \"meters\"");
  }

  RoomModel room;
  room.geometry.length = number(require("length"), "length") * length_scale;
  room.geometry.width = number(require("width"), "width") * length_scale;
  room.geometry.height = number(require("height"), "height") * length_scale;
  try {
    room.geometry.validate();
  } catch (const InvalidGeometry& e) {
    throw ConfigError(std::string("room config: ") + e.what());
  }

  if (doc.contains("lookup")) {
    const std::string mode = doc.at("lookup").is_string() ? doc.at("lookup").get<std::string>() : "";
    if (mode == "nearest") {
      room.lookup = FrequencyLookup::nearest;
    } else if (mode == "linear") {
      room.lookup = FrequencyLookup::linear;
    } else {
      throw ConfigError("room config: lookup must be \"nearest\" or \"linear\"");
    }
  }

  const nlohmann::json& surfaces = require("surfaces");
  if (!surfaces.is_array() || surfaces.empty()) {
    throw ConfigError("room config: 'surfaces' must be a non-empty array");
  }
  for (const nlohmann::json& s : surfaces) {
    Surface surface;
    surface.name = s.contains("name") && s.at("name").is_string() ? s.at("name").get<std::string>() : "";
    if (!s.contains("area") || !s.contains("material")) {
      throw ConfigError("room config: each surface needs 'area' and 'material'");
    }
    surface.area = number(s.at("area"), "surface area") * area_scale;
    if (!(surface.area > 0.0)) {
      throw ConfigError("room config: surface '" + surface.name + "' area must be positive");
    }
    if (!s.at("material").is_string()) {
      throw ConfigError("room config: surface 'material' must be a string");
    }
    surface.material = s.at("material").get<std::string>();
    room.surfaces.push_back(std::move(surface));
  }

  const nlohmann::json& materials = require("materials");
  if (!materials.is_object() || materials.empty()) {
    throw ConfigError("room config: 'materials' must be a non-empty object");
  }
  for (const auto& [id, points_json] : materials.items()) {
    if (!points_json.is_array()) {
      throw ConfigError("room config: material '" + id + "' must be an array of [frequency, coefficient] pairs");
    }
    std::vector<AbsorptionPoint> points;
    for (const nlohmann::json& p : points_json) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw ConfigError("room config: material '" + id + "' entries must be [frequency, coefficient]");
      }
      points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    try {
      room.table.add_material(id, std::move(points));
    } catch (const InvalidTable& e) {
      throw ConfigError(std::string("room config: ") + e.what());
    }
  }

  for (const Surface& s : room.surfaces) {
    if (room.table.materials.find(s.material) == room.table.materials.end()) {
      throw ConfigError("room config: surface '" + s.name + "' references unknown material '" +
                        s.material + "'");
    }
  }
  return room;
}

inline RoomModel load_room_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open room config '" + path.string() + "'");
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("room config '" + path.string() + "': " + e.what());
  }
  return parse_room_config(doc);
}

// Built-in room: 70 x 30 x 12 feet, carpeted floor, concrete ceiling, brick
// walls, coefficients sampled at ten frequencies per material. Matches
// configs/room_default.json.
inline RoomModel default_room() {
  RoomModel room;
  room.geometry = {70.0 * kFeetToMeters, 30.0 * kFeetToMeters, 12.0 * kFeetToMeters};
  room.surfaces = {
      {"floor", 2100.0 * kSquareFeetToSquareMeters, "carpet"},
      {"ceiling", 2100.0 * kSquareFeetToSquareMeters, "concrete"},
      {"walls", 2400.0 * kSquareFeetToSquareMeters, "brick"},
  };
  room.table.add_material("brick", {{235, 0.047578626},
                                    {562, 0.030277425},
                                    {1003, 0.03},
                                    {1243, 0.03},
                                    {2017, 0.028228353},
                                    {2409, 0.023168347},
                                    {2750, 0.028228353},
                                    {2922, 0.020448859},
                                    {3029, 0.029637413},
                                    {3087, 0.020448859}});
  room.table.add_material("concrete", {{235, 0.02},
                                       {562, 0.024392294},
                                       {1003, 0.042393423},
                                       {1243, 0.047578626},
                                       {2017, 0.05},
                                       {2409, 0.05},
                                       {2750, 0.05},
                                       {2922, 0.05},
                                       {3029, 0.05},
                                       {3087, 0.05}});
  room.table.add_material("carpet", {{235, 0.480870573},
                                     {562, 0.5},
                                     {1003, 0.531691993},
                                     {1243, 0.612724866},
                                     {2017, 0.612},
                                     {2409, 0.612724866},
                                     {2750, 0.608789159},
                                     {2922, 0.612724866},
                                     {3029, 0.623},
                                     {3087, 0.612724866}});
  return room;
}

}  // namespace occusense
