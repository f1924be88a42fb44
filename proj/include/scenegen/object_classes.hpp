#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "scenegen/semantic.hpp"

namespace scenegen {

enum class AgentKind { Vehicle, Pedestrian, Static };

struct ObjectClassInfo {
  std::string_view name;
  SemanticClass semantic;
  AgentKind kind;
  double length, width, height;  // default dimensions, meters
};

inline constexpr std::array<ObjectClassInfo, 4> kObjectClasses{{
    {"Car", SemanticClass::Vehicle, AgentKind::Vehicle, 4.5, 2.0, 1.5},
    {"Truck", SemanticClass::Vehicle, AgentKind::Vehicle, 8.0, 2.5, 3.2},
    {"Pedestrian", SemanticClass::Pedestrian, AgentKind::Pedestrian, 0.6, 0.6, 1.8},
    {"Building", SemanticClass::Building, AgentKind::Static, 10.0, 10.0, 8.0},
}};

inline std::optional<ObjectClassInfo> object_class(std::string_view name) {
  for (const auto& c : kObjectClasses)
    if (c.name == name) return c;
  return std::nullopt;
}

}  // namespace scenegen
