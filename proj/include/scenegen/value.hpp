#pragma once

#include <string>
#include <variant>

#include "scenegen/geometry.hpp"

namespace scenegen {

struct ObjectRef {
  int id = 0;
  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

/// Runtime value of a scenario expression. Angles are in degrees, as in
/// the surface language.
using Value = std::variant<double, bool, Vec2, ObjectRef, std::string>;

inline const char* value_type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "scalar";
    case 1: return "bool";
    case 2: return "point";
    case 3: return "object";
    default: return "string";
  }
}

}  // namespace scenegen
