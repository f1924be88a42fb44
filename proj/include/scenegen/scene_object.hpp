#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scenegen/geometry.hpp"
#include "scenegen/object_classes.hpp"
#include "scenegen/semantic.hpp"
#include "scenegen/value.hpp"

namespace scenegen {

struct BehaviorBinding {
  std::string name;
  std::vector<Value> args;
  friend bool operator==(const BehaviorBinding&, const BehaviorBinding&) = default;
};

/// One placed object. (x, y) is the footprint center; the box sits on the
/// ground (bottom face at z = 0).
struct SceneObject {
  int id = 0;
  std::string name;  // binding name, empty if anonymous
  std::string className;
  SemanticClass semantic = SemanticClass::Vehicle;
  AgentKind kind = AgentKind::Vehicle;
  double x = 0.0, y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]
  double length = 0.0, width = 0.0, height = 0.0;
  std::optional<BehaviorBinding> behavior;
  bool isEgo = false;
  bool allowCollisions = false;

  Footprint footprint() const { return {{x, y}, heading, length, width}; }
  Vec3 center() const { return {x, y, height / 2.0}; }

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

inline bool footprints_overlap(const SceneObject& a, const SceneObject& b) {
  return rectangles_overlap(a.footprint(), b.footprint());
}

}  // namespace scenegen
