#pragma once
// Expression evaluation shared by scene sampling and the behavior runtime.

#include <cmath>
#include <optional>
#include <string>

#include "scenegen/dsl/ast.hpp"
#include "scenegen/errors.hpp"
#include "scenegen/rng.hpp"
#include "scenegen/value.hpp"

namespace scenegen {

class EvalError : public SourceError {
 public:
  EvalError(dsl::SourcePos pos, const std::string& msg) : SourceError(pos.line, pos.col, msg) {}
};

/// Invalid distribution parameters (e.g. Uniform(b, a) with b > a).
class DomainError : public EvalError {
 public:
  using EvalError::EvalError;
};

struct ObjectState {
  double x = 0.0, y = 0.0;
  double heading = 0.0;  // radians
  double speed = 0.0;
};

class EvalScope {
 public:
  virtual ~EvalScope() = default;
  virtual std::optional<Value> lookup(const std::string& name) const = 0;
  virtual std::optional<ObjectRef> self() const { return std::nullopt; }
  virtual std::optional<ObjectState> object_state(int id) const = 0;
  virtual Rng& rng() = 0;
};

namespace detail {

inline double as_scalar(const Value& v, dsl::SourcePos pos) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw EvalError(pos, std::string("expected a scalar, got ") + value_type_name(v));
}
inline bool as_bool(const Value& v, dsl::SourcePos pos) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw EvalError(pos, std::string("expected a bool, got ") + value_type_name(v));
}

}  // namespace detail

/// Samples Uniform(lo, hi).
inline double sample_uniform(double lo, double hi, Rng& rng, dsl::SourcePos pos = {}) {
  if (!(hi >= lo)) throw DomainError(pos, "Uniform upper bound is below its lower bound");
  return lo + rng.next_double() * (hi - lo);
}

/// Samples Normal(mu, sigma) by Box-Muller from two draws.
inline double sample_normal(double mu, double sigma, Rng& rng, dsl::SourcePos pos = {}) {
  if (!(sigma >= 0.0)) throw DomainError(pos, "Normal standard deviation is negative");
  const double u1 = rng.next_double();
  const double u2 = rng.next_double();
  const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
  return mu + sigma * z;
}

Value evaluate(const dsl::Expr& e, EvalScope& scope);

namespace detail {

inline ObjectState state_of(const Value& v, EvalScope& scope, dsl::SourcePos pos) {
  const auto* ref = std::get_if<ObjectRef>(&v);
  if (!ref) throw EvalError(pos, std::string("expected an object, got ") + value_type_name(v));
  auto st = scope.object_state(ref->id);
  if (!st) throw EvalError(pos, "object " + std::to_string(ref->id) + " is not placed yet");
  return *st;
}

inline Vec2 position_of(const Value& v, EvalScope& scope, dsl::SourcePos pos) {
  if (const auto* p = std::get_if<Vec2>(&v)) return *p;
  const ObjectState s = state_of(v, scope, pos);
  return {s.x, s.y};
}

inline Value eval_call(const dsl::Expr& e, EvalScope& scope) {
  const std::string& f = e.text;
  const auto& a = e.args;
  if (f == "Uniform") {
    const double lo = as_scalar(evaluate(a[0], scope), a[0].pos);
    const double hi = as_scalar(evaluate(a[1], scope), a[1].pos);
    return sample_uniform(lo, hi, scope.rng(), e.pos);
  }
  if (f == "Normal") {
    const double mu = as_scalar(evaluate(a[0], scope), a[0].pos);
    const double sigma = as_scalar(evaluate(a[1], scope), a[1].pos);
    return sample_normal(mu, sigma, scope.rng(), e.pos);
  }
  if (f == "Options") {
    const auto& choices = a[0].args;
    if (a[0].kind != dsl::Expr::Kind::List || choices.empty())
      throw EvalError(e.pos, "Options needs a non-empty list");
    auto idx = static_cast<std::size_t>(scope.rng().next_double() * static_cast<double>(choices.size()));
    if (idx >= choices.size()) idx = choices.size() - 1;
    return as_scalar(evaluate(choices[idx], scope), choices[idx].pos);
  }
  if (f == "sample") return as_scalar(evaluate(a[0], scope), a[0].pos);
  if (f == "dist") {
    const Vec2 p = position_of(evaluate(a[0], scope), scope, a[0].pos);
    const Vec2 q = position_of(evaluate(a[1], scope), scope, a[1].pos);
    return (p - q).norm();
  }
  if (f == "headingOf") return rad_to_deg(state_of(evaluate(a[0], scope), scope, a[0].pos).heading);
  if (f == "speedOf") return state_of(evaluate(a[0], scope), scope, a[0].pos).speed;
  if (f == "positionOf") return position_of(evaluate(a[0], scope), scope, a[0].pos);
  if (f == "relativeHeading") {
    const double h0 = state_of(evaluate(a[0], scope), scope, a[0].pos).heading;
    const double h1 = state_of(evaluate(a[1], scope), scope, a[1].pos).heading;
    return rad_to_deg(normalize_angle(h1 - h0));
  }
  throw EvalError(e.pos, "unknown function '" + f + "'");
}

inline Value eval_binary(const dsl::Expr& e, EvalScope& scope) {
  const std::string& op = e.text;
  if (op == "and") {
    if (!as_bool(evaluate(e.args[0], scope), e.args[0].pos)) return false;
    return as_bool(evaluate(e.args[1], scope), e.args[1].pos);
  }
  if (op == "or") {
    if (as_bool(evaluate(e.args[0], scope), e.args[0].pos)) return true;
    return as_bool(evaluate(e.args[1], scope), e.args[1].pos);
  }
  const Value lhs = evaluate(e.args[0], scope);
  const Value rhs = evaluate(e.args[1], scope);
  if (op == "==") return lhs == rhs;
  if (op == "!=") return lhs != rhs;

  const auto* lp = std::get_if<Vec2>(&lhs);
  const auto* rp = std::get_if<Vec2>(&rhs);
  if (lp || rp) {
    if (lp && rp && op == "+") return *lp + *rp;
    if (lp && rp && op == "-") return *lp - *rp;
    if (lp && op == "*") return *lp * as_scalar(rhs, e.args[1].pos);
    if (rp && op == "*") return *rp * as_scalar(lhs, e.args[0].pos);
    if (lp && op == "/") {
      const double d = as_scalar(rhs, e.args[1].pos);
      if (d == 0.0) throw EvalError(e.pos, "division by zero");
      return *lp * (1.0 / d);
    }
    throw EvalError(e.pos, "operator '" + op + "' is not defined on points");
  }
  const double x = as_scalar(lhs, e.args[0].pos);
  const double y = as_scalar(rhs, e.args[1].pos);
  if (op == "+") return x + y;
  if (op == "-") return x - y;
  if (op == "*") return x * y;
  if (op == "/") {
    if (y == 0.0) throw EvalError(e.pos, "division by zero");
    return x / y;
  }
  if (op == "<") return x < y;
  if (op == "<=") return x <= y;
  if (op == ">") return x > y;
  if (op == ">=") return x >= y;
  throw EvalError(e.pos, "unknown operator '" + op + "'");
}

}  // namespace detail

inline Value evaluate(const dsl::Expr& e, EvalScope& scope) {
  using K = dsl::Expr::Kind;
  switch (e.kind) {
    case K::Number: return e.number;
    case K::String: return e.text;
    case K::Bool: return e.number != 0.0;
    case K::Name: {
      auto v = scope.lookup(e.text);
      if (!v) throw EvalError(e.pos, "'" + e.text + "' has no value here");
      return *v;
    }
    case K::Self: {
      auto s = scope.self();
      if (!s) throw EvalError(e.pos, "'self' is only available inside behaviors");
      return *s;
    }
    case K::Point:
      return Vec2{detail::as_scalar(evaluate(e.args[0], scope), e.args[0].pos),
                  detail::as_scalar(evaluate(e.args[1], scope), e.args[1].pos)};
    case K::List: throw EvalError(e.pos, "a list is only valid inside Options");
    case K::Unary: {
      const Value v = evaluate(e.args[0], scope);
      if (e.text == "not") return !detail::as_bool(v, e.args[0].pos);
      if (const auto* p = std::get_if<Vec2>(&v)) return *p * -1.0;
      return -detail::as_scalar(v, e.args[0].pos);
    }
    case K::Binary: return detail::eval_binary(e, scope);
    case K::Call: return detail::eval_call(e, scope);
  }
  throw EvalError(e.pos, "unsupported expression");
}

inline bool evaluate_bool(const dsl::Expr& e, EvalScope& scope) {
  return detail::as_bool(evaluate(e, scope), e.pos);
}
inline double evaluate_scalar(const dsl::Expr& e, EvalScope& scope) {
  return detail::as_scalar(evaluate(e, scope), e.pos);
}

}  // namespace scenegen
