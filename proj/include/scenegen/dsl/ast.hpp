#pragma once
// Scenario program syntax tree. Nodes are plain values; children are held
// by value in vectors so whole programs copy and compare structurally.

#include <optional>
#include <string>
#include <vector>

namespace scenegen::dsl {

/// Source location carried by nodes for diagnostics. Locations are not part
/// of a node's structural identity: two nodes parsed from differently
/// formatted text compare equal.
struct SourcePos {
  int line = 0;
  int col = 0;
  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

enum class ExprType {
  Unknown,
  Scalar,
  Point,
  Heading,
  ObjectRef,
  Bool,
  Distribution,  // distribution of scalar; usable wherever a scalar is
  String,
  BehaviorCall,
  List,
};

const char* type_name(ExprType t);

struct Expr {
  enum class Kind { Number, String, Bool, Name, Self, Point, List, Call, Unary, Binary };

  Kind kind = Kind::Number;
  double number = 0.0;  // Number, Bool (0/1)
  std::string text;     // String value, Name, Call callee, operator
  std::vector<Expr> args;
  ExprType type = ExprType::Unknown;  // filled in by check()
  SourcePos pos;

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct Stmt;

struct InterruptHandler {
  Expr condition;
  std::vector<Stmt> body;
  SourcePos pos;
  friend bool operator==(const InterruptHandler&, const InterruptHandler&) = default;
};

struct Stmt {
  enum class Kind { Take, Wait, Do, Assign, If, While, Try };

  Kind kind = Kind::Wait;
  std::string name;        // Do: behavior; Assign: variable
  std::vector<Expr> args;  // Take: throttle, steer, brake; Do: call args; Assign/If/While: [value|cond]
  std::vector<Stmt> body;
  std::vector<Stmt> elseBody;
  std::vector<InterruptHandler> handlers;
  SourcePos pos;

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct Specifier {
  enum class Kind { At, OnLane, AheadOf, Behind, LeftOf, RightOf, Facing, FacingToward, With };

  Kind kind = Kind::At;
  std::string name;        // OnLane: lane name; With: property
  std::vector<Expr> args;  // At: [point]; OnLane: [offset]?; AheadOf..RightOf: [object, distance];
                           // Facing: [heading]; FacingToward: [point]; With: [value]
  SourcePos pos;

  bool is_position() const {
    return kind == Kind::At || kind == Kind::OnLane || kind == Kind::AheadOf ||
           kind == Kind::Behind || kind == Kind::LeftOf || kind == Kind::RightOf;
  }
  bool is_heading() const { return kind == Kind::Facing || kind == Kind::FacingToward; }

  friend bool operator==(const Specifier&, const Specifier&) = default;
};

struct ObjectDecl {
  std::string binding;  // empty when anonymous
  std::string className;
  std::vector<Specifier> specifiers;
  SourcePos pos;
  friend bool operator==(const ObjectDecl&, const ObjectDecl&) = default;
};

struct ParamDecl {
  std::string name;
  Expr value;
  SourcePos pos;
  friend bool operator==(const ParamDecl&, const ParamDecl&) = default;
};

struct Requirement {
  Expr condition;
  std::optional<double> probability;  // absent for hard requirements
  SourcePos pos;
  friend bool operator==(const Requirement&, const Requirement&) = default;
};

struct BehaviorDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;
  SourcePos pos;
  friend bool operator==(const BehaviorDef&, const BehaviorDef&) = default;
};

struct Program {
  std::vector<ParamDecl> params;
  std::vector<ObjectDecl> objects;
  std::vector<Requirement> requirements;
  std::vector<BehaviorDef> behaviors;
  std::optional<std::string> worldRef;
  SourcePos worldPos;
  friend bool operator==(const Program&, const Program&) = default;
};

inline const char* type_name(ExprType t) {
  switch (t) {
    case ExprType::Unknown: return "unknown";
    case ExprType::Scalar: return "scalar";
    case ExprType::Point: return "point";
    case ExprType::Heading: return "heading";
    case ExprType::ObjectRef: return "object";
    case ExprType::Bool: return "bool";
    case ExprType::Distribution: return "distribution";
    case ExprType::String: return "string";
    case ExprType::BehaviorCall: return "behavior call";
    case ExprType::List: return "list";
  }
  return "?";
}

}  // namespace scenegen::dsl
