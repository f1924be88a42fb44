#pragma once
// Static scene sampling: parameters are drawn, objects are placed in
// declaration order by resolving their specifiers, and the attempt is
// accepted only if no footprints overlap and every active requirement holds.
//
// Soft requirements `require[p] C` are activated independently with
// probability p on each attempt; an active one must hold like a hard one,
// an inactive one is ignored for that attempt.

#include <map>
#include <string>
#include <vector>

#include "scenegen/dsl/checker.hpp"
#include "scenegen/eval.hpp"
#include "scenegen/scene.hpp"

namespace scenegen {

class SamplingError : public Error {
 public:
  using Error::Error;
};

class UnknownLane : public SamplingError {
 public:
  explicit UnknownLane(const std::string& lane) : SamplingError("unknown lane '" + lane + "'") {}
};

class UnplacedReference : public SamplingError {
 public:
  using SamplingError::SamplingError;
};

class RejectionBudgetExhausted : public SamplingError {
 public:
  RejectionBudgetExhausted(int attempts, std::string reason)
      : SamplingError("no acceptable scene after " + std::to_string(attempts) +
                      " attempts; last failure: " + reason),
        attempts_(attempts),
        reason_(std::move(reason)) {}
  int attempts() const { return attempts_; }
  const std::string& reason() const { return reason_; }

 private:
  int attempts_;
  std::string reason_;
};

inline constexpr int kDefaultMaxRejections = 2000;

/// Evaluation scope over a partially built scene.
class SamplingScope : public EvalScope {
 public:
  SamplingScope(const dsl::CheckedProgram& prog, Rng& rng) : prog_(prog), rng_(rng) {}

  std::optional<Value> lookup(const std::string& name) const override {
    if (auto it = params_.find(name); it != params_.end()) return it->second;
    for (const auto& o : placed_)
      if (!o.name.empty() && o.name == name) return ObjectRef{o.id};
    return std::nullopt;
  }
  std::optional<ObjectState> object_state(int id) const override {
    for (const auto& o : placed_)
      if (o.id == id) return ObjectState{o.x, o.y, o.heading, 0.0};
    return std::nullopt;
  }
  Rng& rng() override { return rng_; }

  std::map<std::string, Value>& params() { return params_; }
  std::vector<SceneObject>& placed() { return placed_; }
  const dsl::CheckedProgram& program() const { return prog_; }

 private:
  const dsl::CheckedProgram& prog_;
  Rng& rng_;
  std::map<std::string, Value> params_;
  std::vector<SceneObject> placed_;
};

/// Places one declared object given the objects placed before it.
inline SceneObject resolve_specifiers(const dsl::ObjectDecl& decl, int id, const WorldModel& world,
                                      SamplingScope& scope) {
  using K = dsl::Specifier::Kind;
  const auto info = object_class(decl.className);
  if (!info) throw SamplingError("unknown object class '" + decl.className + "'");

  SceneObject o;
  o.id = id;
  o.name = decl.binding;
  o.className = decl.className;
  o.semantic = info->semantic;
  o.kind = info->kind;
  o.length = info->length;
  o.width = info->width;
  o.height = info->height;
  o.isEgo = decl.binding == "ego";

  const dsl::Specifier* position = nullptr;
  const dsl::Specifier* heading = nullptr;
  for (const auto& s : decl.specifiers) {
    if (s.is_position() && !position) position = &s;
    if (s.is_heading() && !heading) heading = &s;
  }

  auto reference = [&](const dsl::Expr& e) {
    const Value v = evaluate(e, scope);
    const auto* ref = std::get_if<ObjectRef>(&v);
    if (!ref) throw EvalError(e.pos, "relative placement needs an object");
    auto st = scope.object_state(ref->id);
    if (!st) throw UnplacedReference("object " + std::to_string(ref->id) + " is not placed yet");
    return *st;
  };

  if (position) {
    switch (position->kind) {
      case K::At: {
        const Value v = evaluate(position->args[0], scope);
        const auto* p = std::get_if<Vec2>(&v);
        if (!p) throw EvalError(position->args[0].pos, "'at' needs a point");
        o.x = p->x;
        o.y = p->y;
        break;
      }
      case K::OnLane: {
        const Lane* lane = world.lane(position->name);
        if (!lane) throw UnknownLane(position->name);
        const double u = scope.rng().next_double();
        auto [pt, tangent] = lane->at_arc_length(u * lane->length());
        double offset = 0.0;
        if (!position->args.empty()) offset = evaluate_scalar(position->args[0], scope);
        const Vec2 f = heading_vector(tangent);
        const Vec2 left{-f.y, f.x};
        o.x = pt.x + left.x * offset;
        o.y = pt.y + left.y * offset;
        o.heading = tangent;
        break;
      }
      case K::AheadOf:
      case K::Behind:
      case K::LeftOf:
      case K::RightOf: {
        const ObjectState ref = reference(position->args[0]);
        const double d = evaluate_scalar(position->args[1], scope);
        double dir = ref.heading;
        double sign = 1.0;
        if (position->kind == K::Behind) sign = -1.0;
        if (position->kind == K::LeftOf) dir += kPi / 2.0;
        if (position->kind == K::RightOf) dir -= kPi / 2.0;
        const Vec2 u = heading_vector(dir);
        o.x = ref.x + sign * d * u.x;
        o.y = ref.y + sign * d * u.y;
        o.heading = ref.heading;
        break;
      }
      default: break;
    }
  }

  if (heading) {
    if (heading->kind == K::Facing) {
      o.heading = deg_to_rad(evaluate_scalar(heading->args[0], scope));
    } else {
      const Value v = evaluate(heading->args[0], scope);
      Vec2 target;
      if (const auto* p = std::get_if<Vec2>(&v)) {
        target = *p;
      } else {
        const auto* ref = std::get_if<ObjectRef>(&v);
        if (!ref) throw EvalError(heading->args[0].pos, "'facing toward' needs a point or object");
        auto st = scope.object_state(ref->id);
        if (!st) throw UnplacedReference("object " + std::to_string(ref->id) + " is not placed yet");
        target = {st->x, st->y};
      }
      o.heading = heading_of(target - Vec2{o.x, o.y});
    }
  }
  o.heading = normalize_angle(o.heading);

  for (const auto& s : decl.specifiers) {
    if (s.kind != K::With) continue;
    const dsl::Expr& v = s.args[0];
    if (s.name == "behavior") {
      BehaviorBinding b;
      b.name = v.text;
      for (const auto& a : v.args) b.args.push_back(evaluate(a, scope));
      o.behavior = std::move(b);
    } else if (s.name == "colorClass") {
      if (auto c = class_from_name(v.text)) o.semantic = *c;
    } else if (s.name == "allowCollisions") {
      o.allowCollisions = evaluate_bool(v, scope);
    } else {
      const double x = evaluate_scalar(v, scope);
      if (!(x > 0.0)) throw EvalError(v.pos, "'" + s.name + "' must be positive");
      if (s.name == "length") o.length = x;
      if (s.name == "width") o.width = x;
      if (s.name == "height") o.height = x;
    }
  }
  return o;
}

namespace detail {

inline std::string object_label(const SceneObject& o) {
  return o.name.empty() ? o.className + "#" + std::to_string(o.id) : o.name;
}

/// Returns an empty string if the attempt is acceptable, else the reason.
inline std::string first_violation(const dsl::CheckedProgram& prog, const WorldModel& world,
                                   SamplingScope& scope) {
  const auto& objs = scope.placed();
  for (std::size_t i = 0; i < objs.size(); ++i) {
    for (std::size_t j = i + 1; j < objs.size(); ++j) {
      if (objs[i].allowCollisions || objs[j].allowCollisions) continue;
      if (footprints_overlap(objs[i], objs[j]))
        return "objects " + object_label(objs[i]) + " and " + object_label(objs[j]) + " overlap";
    }
    if (objs[i].allowCollisions) continue;
    for (const auto& prop : world.staticProps)
      if (footprints_overlap(objs[i], prop))
        return "object " + object_label(objs[i]) + " overlaps a world prop";
  }
  for (const auto& r : prog.program.requirements) {
    if (r.probability && !(scope.rng().next_double() < *r.probability)) continue;
    if (!evaluate_bool(r.condition, scope))
      return "requirement at line " + std::to_string(r.pos.line) + " is not satisfied";
  }
  return {};
}

}  // namespace detail

/// Draws scenes from `rng` until one is accepted. The generator is left
/// positioned after the accepted attempt so dynamic sampling continues the
/// same stream.
inline Scene sample_scene(const dsl::CheckedProgram& prog, const WorldModel& world, Rng& rng,
                          int maxRejections = kDefaultMaxRejections) {
  if (maxRejections < 1) throw SamplingError("maxRejections must be at least 1");
  std::string reason;
  for (int attempt = 0; attempt < maxRejections; ++attempt) {
    SamplingScope scope(prog, rng);
    for (const auto& d : prog.program.params) scope.params()[d.name] = evaluate(d.value, scope);
    for (std::size_t i = 0; i < prog.program.objects.size(); ++i)
      scope.placed().push_back(
          resolve_specifiers(prog.program.objects[i], static_cast<int>(i) + 1, world, scope));

    reason = detail::first_violation(prog, world, scope);
    if (reason.empty()) {
      Scene s;
      s.objects = std::move(scope.placed());
      s.world = world;
      s.seed = rng.seed();
      s.programHash = prog.sourceHash;
      s.params = std::move(scope.params());
      s.rejections = attempt;
      return s;
    }
  }
  throw RejectionBudgetExhausted(maxRejections, reason);
}

inline Scene sample_scene(const dsl::CheckedProgram& prog, const WorldModel& world, std::uint64_t seed,
                          int maxRejections = kDefaultMaxRejections) {
  Rng rng(seed);
  return sample_scene(prog, world, rng, maxRejections);
}

}  // namespace scenegen
