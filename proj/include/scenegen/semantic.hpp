#pragma once
// Semantic class ids and palette. The numeric ids are part of the on-disk
// dataset format and never change.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace scenegen {

enum class SemanticClass : std::uint8_t {
  None = 0,
  Ground = 1,
  Road = 2,
  Building = 3,
  Vehicle = 4,
  Pedestrian = 5,
};

inline constexpr int kSemanticClassCount = 6;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct SemanticClassInfo {
  SemanticClass id;
  std::string_view name;
  Rgb color;
};

inline constexpr std::array<SemanticClassInfo, kSemanticClassCount> kSemanticClasses{{
    {SemanticClass::None, "none", {135, 206, 235}},
    {SemanticClass::Ground, "ground", {80, 120, 80}},
    {SemanticClass::Road, "road", {70, 70, 70}},
    {SemanticClass::Building, "building", {150, 150, 150}},
    {SemanticClass::Vehicle, "vehicle", {0, 0, 200}},
    {SemanticClass::Pedestrian, "pedestrian", {200, 0, 0}},
}};

inline constexpr const SemanticClassInfo& class_info(SemanticClass c) {
  return kSemanticClasses[static_cast<std::size_t>(c)];
}

inline constexpr std::string_view class_name(SemanticClass c) { return class_info(c).name; }
inline constexpr Rgb class_color(SemanticClass c) { return class_info(c).color; }

inline std::optional<SemanticClass> class_from_name(std::string_view name) {
  for (const auto& info : kSemanticClasses)
    if (info.name == name) return info.id;
  return std::nullopt;
}

inline std::optional<SemanticClass> class_from_id(int id) {
  if (id < 0 || id >= kSemanticClassCount) return std::nullopt;
  return static_cast<SemanticClass>(id);
}

}  // namespace scenegen
