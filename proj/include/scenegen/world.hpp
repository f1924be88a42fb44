#pragma once
// Static world description: lanes (polyline centerlines with a width), the
// class of bare ground, and fixed props. Loaded from JSON:
//
//   {"lanes": [{"name": "main", "centerline": [[0, -50], [0, 150]], "width": 3.5}],
//    "ground": "ground",
//    "props": [{"class": "Building", "x": 20, "y": 40, "heading": 0,
//               "length": 12, "width": 10, "height": 9}]}
//
// Prop headings are degrees; prop dimensions default to the class defaults.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenegen/errors.hpp"
#include "scenegen/scene_object.hpp"

namespace scenegen {

class WorldError : public Error {
 public:
  using Error::Error;
};

struct Lane {
  std::string name;
  std::vector<Vec2> centerline;
  double width = 0.0;

  double length() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < centerline.size(); ++i)
      total += (centerline[i + 1] - centerline[i]).norm();
    return total;
  }

  /// Point and tangent heading at arc length s from the first vertex,
  /// clamped to the polyline.
  std::pair<Vec2, double> at_arc_length(double s) const {
    for (std::size_t i = 0; i + 1 < centerline.size(); ++i) {
      const Vec2 a = centerline[i], b = centerline[i + 1];
      const double seg = (b - a).norm();
      if (seg <= 0.0) continue;
      const bool last = i + 2 == centerline.size();
      if (s <= seg || last) {
        const double t = std::fmin(std::fmax(s / seg, 0.0), 1.0);
        return {a + (b - a) * t, heading_of(b - a)};
      }
      s -= seg;
    }
    return {centerline.front(), 0.0};
  }

  friend bool operator==(const Lane&, const Lane&) = default;
};

struct WorldModel {
  std::vector<Lane> lanes;
  SemanticClass groundClass = SemanticClass::Ground;
  std::vector<SceneObject> staticProps;

  const Lane* lane(const std::string& name) const {
    for (const auto& l : lanes)
      if (l.name == name) return &l;
    return nullptr;
  }

  /// Class of the ground surface at (x, y): road inside any lane, else ground.
  SemanticClass surface_class(Vec2 p) const {
    for (const auto& l : lanes)
      if (distance_to_polyline(p, l.centerline) <= l.width / 2.0) return SemanticClass::Road;
    return groundClass;
  }

  void validate() const {
    std::set<std::string> names;
    for (const auto& l : lanes) {
      if (!names.insert(l.name).second) throw WorldError("duplicate lane name '" + l.name + "'");
      if (l.centerline.size() < 2) throw WorldError("lane '" + l.name + "' needs at least 2 points");
      if (!(l.width > 0.0)) throw WorldError("lane '" + l.name + "' needs a positive width");
    }
  }

  friend bool operator==(const WorldModel&, const WorldModel&) = default;
};

inline constexpr int kPropIdBase = 1000;

inline WorldModel world_from_json(const nlohmann::json& j) {
  WorldModel w;
  try {
    for (const auto& jl : j.value("lanes", nlohmann::json::array())) {
      Lane l;
      l.name = jl.at("name").get<std::string>();
      for (const auto& p : jl.at("centerline")) l.centerline.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      l.width = jl.at("width").get<double>();
      w.lanes.push_back(std::move(l));
    }
    const std::string ground = j.value("ground", std::string("ground"));
    auto gc = class_from_name(ground);
    if (!gc) throw WorldError("unknown ground class '" + ground + "'");
    w.groundClass = *gc;
    int next = kPropIdBase;
    for (const auto& jp : j.value("props", nlohmann::json::array())) {
      const std::string cls = jp.at("class").get<std::string>();
      auto info = object_class(cls);
      if (!info) throw WorldError("unknown prop class '" + cls + "'");
      SceneObject o;
      o.id = next++;
      o.className = cls;
      o.semantic = info->semantic;
      o.kind = AgentKind::Static;
      o.x = jp.at("x").get<double>();
      o.y = jp.at("y").get<double>();
      o.heading = normalize_angle(deg_to_rad(jp.value("heading", 0.0)));
      o.length = jp.value("length", info->length);
      o.width = jp.value("width", info->width);
      o.height = jp.value("height", info->height);
      if (!(o.length > 0 && o.width > 0 && o.height > 0)) throw WorldError("prop dimensions must be positive");
      w.staticProps.push_back(std::move(o));
    }
  } catch (const nlohmann::json::exception& e) {
    throw WorldError(std::string("malformed world file: ") + e.what());
  }
  w.validate();
  return w;
}

inline WorldModel load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw WorldError("cannot open world file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw WorldError("malformed world file " + path.string() + ": " + e.what());
  }
  return world_from_json(j);
}

}  // namespace scenegen
