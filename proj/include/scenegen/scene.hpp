#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenegen/scene_object.hpp"
#include "scenegen/world.hpp"

namespace scenegen {

/// One sampled static world.
struct Scene {
  std::vector<SceneObject> objects;  // declaration order, ids 1..n
  WorldModel world;
  std::uint64_t seed = 0;
  std::uint64_t programHash = 0;
  std::map<std::string, Value> params;  // sampled parameter values
  int rejections = 0;                   // attempts rejected before this one

  const SceneObject& ego() const {
    for (const auto& o : objects)
      if (o.isEgo) return o;
    throw std::logic_error("scene has no ego");
  }
  const SceneObject* find(int id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    for (const auto& o : world.staticProps)
      if (o.id == id) return &o;
    return nullptr;
  }
  const SceneObject* find_named(const std::string& name) const {
    for (const auto& o : objects)
      if (o.name == name) return &o;
    return nullptr;
  }

  friend bool operator==(const Scene&, const Scene&) = default;
};

}  // namespace scenegen
