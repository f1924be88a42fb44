#pragma once
// Canonical source rendering of a Program. Output reparses to a structurally
// equal tree; binary and unary operators are always parenthesized.

#include <charconv>
#include <string>

#include "scenegen/dsl/ast.hpp"

namespace scenegen::dsl {

namespace detail {

inline std::string format_number(double v) {
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace detail

inline std::string to_source(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number:
      // Negative literals only arise from constant folding elsewhere; keep
      // them reparseable.
      if (e.number < 0) return "(-" + detail::format_number(-e.number) + ")";
      return detail::format_number(e.number);
    case Expr::Kind::String: return detail::quote(e.text);
    case Expr::Kind::Bool: return e.number != 0.0 ? "true" : "false";
    case Expr::Kind::Name: return e.text;
    case Expr::Kind::Self: return "self";
    case Expr::Kind::Point: return "(" + to_source(e.args[0]) + ", " + to_source(e.args[1]) + ")";
    case Expr::Kind::List:
    case Expr::Kind::Call: {
      std::string s = e.kind == Expr::Kind::List ? "[" : e.text + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += to_source(e.args[i]);
      }
      return s + (e.kind == Expr::Kind::List ? "]" : ")");
    }
    case Expr::Kind::Unary:
      return "(" + e.text + (e.text == "not" ? " " : "") + to_source(e.args[0]) + ")";
    case Expr::Kind::Binary:
      return "(" + to_source(e.args[0]) + " " + e.text + " " + to_source(e.args[1]) + ")";
  }
  return "";
}

namespace detail {

inline void print_block(std::string& out, const std::vector<Stmt>& body, int depth);

inline void print_stmt(std::string& out, const Stmt& s, int depth) {
  const std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Take:
      out += ind + "take Action(" + to_source(s.args[0]) + ", " + to_source(s.args[1]) + ", " +
             to_source(s.args[2]) + ")\n";
      break;
    case Stmt::Kind::Wait: out += ind + "wait\n"; break;
    case Stmt::Kind::Do: {
      out += ind + "do " + s.name + "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) out += ", ";
        out += to_source(s.args[i]);
      }
      out += ")\n";
      break;
    }
    case Stmt::Kind::Assign: out += ind + s.name + " = " + to_source(s.args[0]) + "\n"; break;
    case Stmt::Kind::If:
      out += ind + "if " + to_source(s.args[0]) + ":\n";
      print_block(out, s.body, depth + 1);
      if (!s.elseBody.empty()) {
        out += ind + "else:\n";
        print_block(out, s.elseBody, depth + 1);
      }
      out += ind + "end\n";
      break;
    case Stmt::Kind::While:
      out += ind + "while " + to_source(s.args[0]) + ":\n";
      print_block(out, s.body, depth + 1);
      out += ind + "end\n";
      break;
    case Stmt::Kind::Try:
      out += ind + "try:\n";
      print_block(out, s.body, depth + 1);
      for (const auto& h : s.handlers) {
        out += ind + "interrupt when " + to_source(h.condition) + ":\n";
        print_block(out, h.body, depth + 1);
      }
      out += ind + "end\n";
      break;
  }
}

inline void print_block(std::string& out, const std::vector<Stmt>& body, int depth) {
  for (const auto& s : body) print_stmt(out, s, depth);
}

inline std::string specifier_source(const Specifier& s) {
  using K = Specifier::Kind;
  switch (s.kind) {
    case K::At: return "at " + to_source(s.args[0]);
    case K::OnLane: {
      std::string r = "on lane(" + quote(s.name) + ")";
      if (!s.args.empty()) r += " offset by " + to_source(s.args[0]);
      return r;
    }
    case K::AheadOf: return "ahead of " + to_source(s.args[0]) + " by " + to_source(s.args[1]);
    case K::Behind: return "behind " + to_source(s.args[0]) + " by " + to_source(s.args[1]);
    case K::LeftOf: return "left of " + to_source(s.args[0]) + " by " + to_source(s.args[1]);
    case K::RightOf: return "right of " + to_source(s.args[0]) + " by " + to_source(s.args[1]);
    case K::Facing: return "facing " + to_source(s.args[0]);
    case K::FacingToward: return "facing toward " + to_source(s.args[0]);
    case K::With: return "with " + s.name + " " + to_source(s.args[0]);
  }
  return "";
}

}  // namespace detail

/// Renders in the order: world, params, behaviors, objects, requirements.
inline std::string to_source(const Program& p) {
  std::string out;
  if (p.worldRef) out += "world " + detail::quote(*p.worldRef) + "\n";
  for (const auto& d : p.params) out += "param " + d.name + " = " + to_source(d.value) + "\n";
  for (const auto& b : p.behaviors) {
    out += "behavior " + b.name + "(";
    for (std::size_t i = 0; i < b.params.size(); ++i) {
      if (i) out += ", ";
      out += b.params[i];
    }
    out += "):\n";
    detail::print_block(out, b.body, 1);
    out += "end\n";
  }
  for (const auto& o : p.objects) {
    if (!o.binding.empty()) out += o.binding + " = ";
    out += "new " + o.className;
    for (std::size_t i = 0; i < o.specifiers.size(); ++i)
      out += (i ? ", " : " ") + detail::specifier_source(o.specifiers[i]);
    out += "\n";
  }
  for (const auto& r : p.requirements) {
    out += "require";
    if (r.probability) out += "[" + detail::format_number(*r.probability) + "]";
    out += " " + to_source(r.condition) + "\n";
  }
  return out;
}

}  // namespace scenegen::dsl
