#pragma once
// Static checks over a parsed Program: name resolution, ego uniqueness,
// specifier conflicts, behavior references and expression typing.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "scenegen/dsl/ast.hpp"
#include "scenegen/errors.hpp"
#include "scenegen/object_classes.hpp"

namespace scenegen::dsl {

enum class CheckErrorKind {
  UnknownName,
  DuplicateEgo,
  MissingEgo,
  ConflictingSpecifiers,
  UnknownBehavior,
  BadProbability,
  DuplicateName,
  ForwardReference,
  UnknownProperty,
  TypeMismatch,
  ArityMismatch,
};

inline const char* kind_name(CheckErrorKind k) {
  switch (k) {
    case CheckErrorKind::UnknownName: return "UnknownName";
    case CheckErrorKind::DuplicateEgo: return "DuplicateEgo";
    case CheckErrorKind::MissingEgo: return "MissingEgo";
    case CheckErrorKind::ConflictingSpecifiers: return "ConflictingSpecifiers";
    case CheckErrorKind::UnknownBehavior: return "UnknownBehavior";
    case CheckErrorKind::BadProbability: return "BadProbability";
    case CheckErrorKind::DuplicateName: return "DuplicateName";
    case CheckErrorKind::ForwardReference: return "ForwardReference";
    case CheckErrorKind::UnknownProperty: return "UnknownProperty";
    case CheckErrorKind::TypeMismatch: return "TypeMismatch";
    case CheckErrorKind::ArityMismatch: return "ArityMismatch";
  }
  return "?";
}

struct CheckError {
  CheckErrorKind kind;
  int line = 0;
  int col = 0;
  std::string message;
};

class CheckFailed : public Error {
 public:
  explicit CheckFailed(std::vector<CheckError> errors)
      : Error(summary(errors)), errors_(std::move(errors)) {}
  const std::vector<CheckError>& errors() const { return errors_; }

 private:
  static std::string summary(const std::vector<CheckError>& errors) {
    std::string s;
    for (const auto& e : errors) {
      if (!s.empty()) s += "\n";
      s += std::to_string(e.line) + ":" + std::to_string(e.col) + ": " + kind_name(e.kind) + ": " +
           e.message;
    }
    return s;
  }
  std::vector<CheckError> errors_;
};

struct Binding {
  enum class Kind { Param, Object, Behavior };
  Kind kind = Kind::Param;
  int index = 0;
  friend bool operator==(const Binding&, const Binding&) = default;
};

/// Properties accepted by `with`.
inline constexpr std::array<std::string_view, 6> kWithProperties{
    "behavior", "length", "width", "height", "colorClass", "allowCollisions"};

inline constexpr std::array<std::pair<std::string_view, int>, 9> kBuiltinFunctions{{
    {"Uniform", 2},
    {"Normal", 2},
    {"Options", 1},
    {"dist", 2},
    {"headingOf", 1},
    {"speedOf", 1},
    {"positionOf", 1},
    {"relativeHeading", 2},
    {"sample", 1},
}};

struct CheckedProgram {
  Program program;  // with per-expression type tags filled in
  std::map<std::string, Binding> bindings;
  int egoIndex = -1;  // into program.objects
  std::uint64_t sourceHash = 0;

  const BehaviorDef* behavior(const std::string& name) const {
    auto it = bindings.find(name);
    if (it == bindings.end() || it->second.kind != Binding::Kind::Behavior) return nullptr;
    return &program.behaviors[static_cast<std::size_t>(it->second.index)];
  }

  friend bool operator==(const CheckedProgram&, const CheckedProgram&) = default;
};

namespace detail {

inline bool scalar_like(ExprType t) {
  return t == ExprType::Scalar || t == ExprType::Heading || t == ExprType::Distribution;
}

class Checker {
 public:
  explicit Checker(Program p) { out_.program = std::move(p); }

  CheckedProgram run() {
    Program& p = out_.program;
    declare_globals(p);

    for (std::size_t i = 0; i < p.params.size(); ++i) {
      ctx_ = Context{Context::Scope::Param, static_cast<int>(i), 0, nullptr};
      auto& d = p.params[i];
      const ExprType t = infer(d.value);
      if (t == ExprType::String || t == ExprType::ObjectRef || t == ExprType::List ||
          t == ExprType::BehaviorCall)
        error(CheckErrorKind::TypeMismatch, d.value.pos,
              std::string("parameter '") + d.name + "' cannot hold a " + type_name(t));
    }

    for (std::size_t i = 0; i < p.objects.size(); ++i) check_object(static_cast<int>(i));

    ctx_ = Context{Context::Scope::Global, 0, static_cast<int>(p.objects.size()), nullptr};
    for (auto& r : p.requirements) {
      if (r.probability && !(*r.probability > 0.0 && *r.probability <= 1.0))
        error(CheckErrorKind::BadProbability, r.pos, "requirement probability must lie in (0, 1]");
      expect(r.condition, ExprType::Bool, "requirement");
    }

    for (auto& b : p.behaviors) check_behavior(b);

    if (egoCount_ == 0) error(CheckErrorKind::MissingEgo, {1, 1}, "no object is bound to 'ego'");
    if (!errors_.empty()) throw CheckFailed(std::move(errors_));
    return std::move(out_);
  }

 private:
  struct Context {
    enum class Scope { Param, Object, Global, Behavior };
    Scope scope = Scope::Global;
    int paramLimit = 0;   // params visible: [0, paramLimit) in Param scope
    int objectLimit = 0;  // objects visible: [0, objectLimit)
    const std::set<std::string>* locals = nullptr;
  };

  void error(CheckErrorKind k, SourcePos pos, std::string msg) {
    errors_.push_back({k, pos.line, pos.col, std::move(msg)});
  }

  void declare_globals(Program& p) {
    auto declare = [&](const std::string& name, Binding b, SourcePos pos) {
      if (name == "self") {
        error(CheckErrorKind::DuplicateName, pos, "'self' is reserved");
        return;
      }
      if (!out_.bindings.emplace(name, b).second)
        error(CheckErrorKind::DuplicateName, pos, "'" + name + "' is already declared");
    };
    for (std::size_t i = 0; i < p.params.size(); ++i)
      declare(p.params[i].name, {Binding::Kind::Param, static_cast<int>(i)}, p.params[i].pos);
    for (std::size_t i = 0; i < p.behaviors.size(); ++i)
      declare(p.behaviors[i].name, {Binding::Kind::Behavior, static_cast<int>(i)}, p.behaviors[i].pos);
    for (std::size_t i = 0; i < p.objects.size(); ++i) {
      const auto& o = p.objects[i];
      if (o.binding.empty()) continue;
      if (o.binding == "ego") {
        ++egoCount_;
        if (egoCount_ > 1) {
          error(CheckErrorKind::DuplicateEgo, o.pos, "'ego' is declared more than once");
          continue;
        }
        out_.egoIndex = static_cast<int>(i);
      }
      declare(o.binding, {Binding::Kind::Object, static_cast<int>(i)}, o.pos);
    }
  }

  void check_object(int index) {
    auto& o = out_.program.objects[static_cast<std::size_t>(index)];
    ctx_ = Context{Context::Scope::Object, 0, index, nullptr};
    if (!object_class(o.className))
      error(CheckErrorKind::UnknownName, o.pos, "unknown object class '" + o.className + "'");

    const Specifier* position = nullptr;
    const Specifier* heading = nullptr;
    std::set<std::string> props;
    for (auto& s : o.specifiers) {
      if (s.is_position()) {
        if (position)
          error(CheckErrorKind::ConflictingSpecifiers, s.pos,
                "object already has a position specifier at line " +
                    std::to_string(position->pos.line));
        else
          position = &s;
      }
      if (s.is_heading()) {
        if (heading)
          error(CheckErrorKind::ConflictingSpecifiers, s.pos, "object already has a heading specifier");
        else
          heading = &s;
      }
      using K = Specifier::Kind;
      switch (s.kind) {
        case K::At: expect(s.args[0], ExprType::Point, "'at'"); break;
        case K::OnLane:
          if (!s.args.empty()) expect_scalar(s.args[0], "lane offset");
          break;
        case K::AheadOf:
        case K::Behind:
        case K::LeftOf:
        case K::RightOf:
          expect(s.args[0], ExprType::ObjectRef, "relative placement");
          expect_scalar(s.args[1], "placement distance");
          break;
        case K::Facing: expect_scalar(s.args[0], "'facing'"); break;
        case K::FacingToward: {
          const ExprType t = infer(s.args[0]);
          if (t != ExprType::Point && t != ExprType::ObjectRef && t != ExprType::Unknown)
            error(CheckErrorKind::TypeMismatch, s.args[0].pos,
                  std::string("'facing toward' needs a point or object, got ") + type_name(t));
          break;
        }
        case K::With: check_with(s, props); break;
      }
    }
  }

  void check_with(Specifier& s, std::set<std::string>& seen) {
    bool known = false;
    for (auto p : kWithProperties) known = known || p == s.name;
    if (!known) {
      error(CheckErrorKind::UnknownProperty, s.pos, "unknown property '" + s.name + "'");
      return;
    }
    if (!seen.insert(s.name).second)
      error(CheckErrorKind::ConflictingSpecifiers, s.pos, "property '" + s.name + "' set twice");
    Expr& v = s.args[0];
    if (s.name == "behavior") {
      if (v.kind != Expr::Kind::Call) {
        error(CheckErrorKind::TypeMismatch, v.pos, "'with behavior' needs a behavior call");
        return;
      }
      const BehaviorDef* b = find_behavior(v.text);
      if (!b) {
        error(CheckErrorKind::UnknownBehavior, v.pos, "unknown behavior '" + v.text + "'");
        return;
      }
      if (b->params.size() != v.args.size())
        error(CheckErrorKind::ArityMismatch, v.pos,
              "behavior '" + v.text + "' takes " + std::to_string(b->params.size()) + " arguments");
      for (auto& a : v.args) {
        const ExprType t = infer(a);
        if (t == ExprType::List || t == ExprType::BehaviorCall)
          error(CheckErrorKind::TypeMismatch, a.pos, "invalid behavior argument");
      }
      v.type = ExprType::BehaviorCall;
    } else if (s.name == "colorClass") {
      if (v.kind != Expr::Kind::String || !class_from_name(v.text)) {
        error(CheckErrorKind::TypeMismatch, v.pos, "'colorClass' needs a semantic class name");
        return;
      }
      v.type = ExprType::String;
    } else if (s.name == "allowCollisions") {
      expect(v, ExprType::Bool, "'allowCollisions'");
    } else {
      expect_scalar(v, "'" + s.name + "'");
    }
  }

  void collect_locals(const std::vector<Stmt>& body, std::set<std::string>& out) {
    for (const auto& s : body) {
      if (s.kind == Stmt::Kind::Assign) out.insert(s.name);
      collect_locals(s.body, out);
      collect_locals(s.elseBody, out);
      for (const auto& h : s.handlers) collect_locals(h.body, out);
    }
  }

  void check_behavior(BehaviorDef& b) {
    std::set<std::string> locals(b.params.begin(), b.params.end());
    if (locals.size() != b.params.size())
      error(CheckErrorKind::DuplicateName, b.pos, "duplicate parameter in behavior '" + b.name + "'");
    collect_locals(b.body, locals);
    ctx_ = Context{Context::Scope::Behavior, 0, static_cast<int>(out_.program.objects.size()), &locals};
    check_block(b.body);
  }

  void check_block(std::vector<Stmt>& body) {
    for (auto& s : body) check_stmt(s);
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Take:
        for (auto& a : s.args) expect_scalar(a, "action component");
        break;
      case Stmt::Kind::Wait: break;
      case Stmt::Kind::Do: {
        const BehaviorDef* b = find_behavior(s.name);
        if (!b) {
          error(CheckErrorKind::UnknownBehavior, s.pos, "unknown behavior '" + s.name + "'");
        } else if (b->params.size() != s.args.size()) {
          error(CheckErrorKind::ArityMismatch, s.pos,
                "behavior '" + s.name + "' takes " + std::to_string(b->params.size()) + " arguments");
        }
        for (auto& a : s.args) infer(a);
        break;
      }
      case Stmt::Kind::Assign: {
        const ExprType t = infer(s.args[0]);
        if (t == ExprType::List || t == ExprType::BehaviorCall)
          error(CheckErrorKind::TypeMismatch, s.args[0].pos, "cannot assign a " + std::string(type_name(t)));
        break;
      }
      case Stmt::Kind::If:
        expect(s.args[0], ExprType::Bool, "'if' condition");
        check_block(s.body);
        check_block(s.elseBody);
        break;
      case Stmt::Kind::While:
        expect(s.args[0], ExprType::Bool, "'while' condition");
        check_block(s.body);
        break;
      case Stmt::Kind::Try:
        check_block(s.body);
        for (auto& h : s.handlers) {
          expect(h.condition, ExprType::Bool, "interrupt condition");
          check_block(h.body);
        }
        break;
    }
  }

  const BehaviorDef* find_behavior(const std::string& name) const {
    auto it = out_.bindings.find(name);
    if (it == out_.bindings.end() || it->second.kind != Binding::Kind::Behavior) return nullptr;
    return &out_.program.behaviors[static_cast<std::size_t>(it->second.index)];
  }

  void expect(Expr& e, ExprType want, const std::string& what) {
    const ExprType t = infer(e);
    if (t != want && t != ExprType::Unknown)
      error(CheckErrorKind::TypeMismatch, e.pos,
            what + " needs a " + type_name(want) + ", got " + type_name(t));
  }
  void expect_scalar(Expr& e, const std::string& what) {
    const ExprType t = infer(e);
    if (!scalar_like(t) && t != ExprType::Unknown)
      error(CheckErrorKind::TypeMismatch, e.pos, what + " needs a scalar, got " + type_name(t));
  }

  ExprType resolve_name(const Expr& e) {
    if (ctx_.locals && ctx_.locals->count(e.text)) return ExprType::Unknown;  // dynamic
    auto it = out_.bindings.find(e.text);
    if (it == out_.bindings.end()) {
      error(CheckErrorKind::UnknownName, e.pos, "unknown name '" + e.text + "'");
      return ExprType::Unknown;
    }
    const Binding& b = it->second;
    switch (b.kind) {
      case Binding::Kind::Param: {
        if (ctx_.scope == Context::Scope::Param && b.index >= ctx_.paramLimit) {
          error(CheckErrorKind::ForwardReference, e.pos,
                "parameter '" + e.text + "' is used before its declaration");
          return ExprType::Unknown;
        }
        const Expr& v = out_.program.params[static_cast<std::size_t>(b.index)].value;
        return v.type == ExprType::Distribution ? ExprType::Scalar : v.type;
      }
      case Binding::Kind::Object:
        if (ctx_.scope == Context::Scope::Param) {
          error(CheckErrorKind::UnknownName, e.pos, "parameters cannot refer to object '" + e.text + "'");
          return ExprType::Unknown;
        }
        if (b.index >= ctx_.objectLimit) {
          error(CheckErrorKind::ForwardReference, e.pos,
                "object '" + e.text + "' is referenced before it is declared");
          return ExprType::Unknown;
        }
        return ExprType::ObjectRef;
      case Binding::Kind::Behavior:
        error(CheckErrorKind::TypeMismatch, e.pos, "behavior '" + e.text + "' used as a value");
        return ExprType::Unknown;
    }
    return ExprType::Unknown;
  }

  ExprType infer(Expr& e) {
    e.type = infer_impl(e);
    return e.type;
  }

  ExprType infer_impl(Expr& e) {
    using K = Expr::Kind;
    switch (e.kind) {
      case K::Number: return ExprType::Scalar;
      case K::String: return ExprType::String;
      case K::Bool: return ExprType::Bool;
      case K::Self:
        if (ctx_.scope != Context::Scope::Behavior) {
          error(CheckErrorKind::UnknownName, e.pos, "'self' is only available inside behaviors");
          return ExprType::Unknown;
        }
        return ExprType::ObjectRef;
      case K::Name: return resolve_name(e);
      case K::Point: {
        for (auto& a : e.args) expect_scalar(a, "point coordinate");
        return ExprType::Point;
      }
      case K::List: {
        for (auto& a : e.args) expect_scalar(a, "list element");
        return ExprType::List;
      }
      case K::Unary: {
        const ExprType t = infer(e.args[0]);
        if (e.text == "not") {
          if (t != ExprType::Bool && t != ExprType::Unknown)
            error(CheckErrorKind::TypeMismatch, e.pos, "'not' needs a bool");
          return ExprType::Bool;
        }
        if (t == ExprType::Point || scalar_like(t) || t == ExprType::Unknown) return t;
        error(CheckErrorKind::TypeMismatch, e.pos, std::string("cannot negate a ") + type_name(t));
        return ExprType::Unknown;
      }
      case K::Binary: return infer_binary(e);
      case K::Call: return infer_call(e);
    }
    return ExprType::Unknown;
  }

  ExprType infer_binary(Expr& e) {
    const ExprType a = infer(e.args[0]);
    const ExprType b = infer(e.args[1]);
    const std::string& op = e.text;
    const bool unknown = a == ExprType::Unknown || b == ExprType::Unknown;
    auto mismatch = [&](ExprType result) {
      if (!unknown)
        error(CheckErrorKind::TypeMismatch, e.pos,
              "operator '" + op + "' cannot combine " + type_name(a) + " and " + type_name(b));
      return result;
    };
    if (op == "and" || op == "or") {
      if ((a == ExprType::Bool || a == ExprType::Unknown) && (b == ExprType::Bool || b == ExprType::Unknown))
        return ExprType::Bool;
      return mismatch(ExprType::Bool);
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      if ((scalar_like(a) || a == ExprType::Unknown) && (scalar_like(b) || b == ExprType::Unknown))
        return ExprType::Bool;
      return mismatch(ExprType::Bool);
    }
    if (op == "==" || op == "!=") {
      if (unknown || (scalar_like(a) && scalar_like(b)) || a == b) return ExprType::Bool;
      return mismatch(ExprType::Bool);
    }
    // arithmetic
    if (a == ExprType::Point || b == ExprType::Point) {
      if ((op == "+" || op == "-") && (a == ExprType::Point || a == ExprType::Unknown) &&
          (b == ExprType::Point || b == ExprType::Unknown))
        return ExprType::Point;
      if ((op == "*" || op == "/") && a == ExprType::Point && (scalar_like(b) || b == ExprType::Unknown))
        return ExprType::Point;
      if (op == "*" && b == ExprType::Point && (scalar_like(a) || a == ExprType::Unknown))
        return ExprType::Point;
      return mismatch(ExprType::Unknown);
    }
    if (unknown) {
      if ((scalar_like(a) || a == ExprType::Unknown) && (scalar_like(b) || b == ExprType::Unknown))
        return a == ExprType::Distribution || b == ExprType::Distribution ? ExprType::Distribution
                                                                         : ExprType::Unknown;
      return mismatch(ExprType::Unknown);
    }
    if (!scalar_like(a) || !scalar_like(b)) return mismatch(ExprType::Unknown);
    if (a == ExprType::Distribution || b == ExprType::Distribution) return ExprType::Distribution;
    if ((op == "+" || op == "-") && (a == ExprType::Heading || b == ExprType::Heading))
      return ExprType::Heading;
    return ExprType::Scalar;
  }

  ExprType infer_call(Expr& e) {
    int arity = -1;
    for (const auto& [name, n] : kBuiltinFunctions)
      if (name == e.text) arity = n;
    if (arity < 0) {
      if (find_behavior(e.text))
        error(CheckErrorKind::TypeMismatch, e.pos,
              "behavior '" + e.text + "' can only be attached with 'with behavior' or run with 'do'");
      else
        error(CheckErrorKind::UnknownName, e.pos, "unknown function '" + e.text + "'");
      for (auto& a : e.args) infer(a);
      return ExprType::Unknown;
    }
    if (static_cast<int>(e.args.size()) != arity) {
      error(CheckErrorKind::ArityMismatch, e.pos,
            "'" + e.text + "' takes " + std::to_string(arity) + " arguments");
      for (auto& a : e.args) infer(a);
      return ExprType::Unknown;
    }
    auto object_or_point = [&](Expr& a) {
      const ExprType t = infer(a);
      if (t != ExprType::ObjectRef && t != ExprType::Point && t != ExprType::Unknown)
        error(CheckErrorKind::TypeMismatch, a.pos,
              "'" + e.text + "' needs an object or point, got " + type_name(t));
    };
    const std::string& f = e.text;
    if (f == "Uniform" || f == "Normal") {
      expect_scalar(e.args[0], "'" + f + "' argument");
      expect_scalar(e.args[1], "'" + f + "' argument");
      return ExprType::Distribution;
    }
    if (f == "Options") {
      expect(e.args[0], ExprType::List, "'Options'");
      if (e.args[0].kind == Expr::Kind::List && e.args[0].args.empty())
        error(CheckErrorKind::TypeMismatch, e.args[0].pos, "'Options' needs at least one choice");
      return ExprType::Distribution;
    }
    if (f == "dist") {
      object_or_point(e.args[0]);
      object_or_point(e.args[1]);
      return ExprType::Scalar;
    }
    if (f == "sample") {
      expect(e.args[0], ExprType::Distribution, "'sample'");
      return ExprType::Scalar;
    }
    for (auto& a : e.args) expect(a, ExprType::ObjectRef, "'" + f + "'");
    if (f == "headingOf" || f == "relativeHeading") return ExprType::Heading;
    if (f == "speedOf") return ExprType::Scalar;
    return ExprType::Point;  // positionOf
  }

  CheckedProgram out_;
  Context ctx_;
  std::vector<CheckError> errors_;
  int egoCount_ = 0;
};

}  // namespace detail

/// Validates and annotates a parsed program. Throws CheckFailed listing
/// every problem found.
inline CheckedProgram check(Program program) { return detail::Checker(std::move(program)).run(); }

}  // namespace scenegen::dsl
