#pragma once
// Recursive-descent parser for scenario programs.
//
//   program     := (paramDecl | worldDecl | objectDecl | requireStmt | behaviorDef)*
//   paramDecl   := "param" ident "=" expr
//   worldDecl   := "world" string
//   objectDecl  := [ident "="] "new" ident specifier ("," specifier)*
//   specifier   := "at" expr | "on" "lane" "(" string ")" ["offset" "by" expr]
//                | ("ahead" "of" | "behind") expr "by" expr
//                | ("left" "of" | "right" "of") expr "by" expr
//                | "facing" "toward" expr | "facing" expr | "with" name expr
//   requireStmt := "require" ["[" number "]"] expr
//   behaviorDef := "behavior" ident "(" [ident ("," ident)*] ")" ":" stmt+ "end"
//   stmt        := "take" "Action" "(" expr "," expr "," expr ")" | "wait"
//                | "do" ident "(" args ")" | ident "=" expr
//                | "if" expr ":" stmt+ ["else" ":" stmt+] "end"
//                | "while" expr ":" stmt+ "end"
//                | "try" ":" stmt+ ("interrupt" "when" expr ":" stmt+)+ "end"

#include <charconv>
#include <set>
#include <string>
#include <vector>

#include "scenegen/dsl/ast.hpp"
#include "scenegen/dsl/lexer.hpp"

namespace scenegen::dsl {

class ParseError : public SourceError {
 public:
  ParseError(int line, int col, std::set<std::string> expected, const std::string& found)
      : SourceError(line, col, describe(expected, found)), expected_(std::move(expected)) {}

  const std::set<std::string>& expected() const { return expected_; }

 private:
  static std::string describe(const std::set<std::string>& expected, const std::string& found) {
    std::string msg = "expected ";
    bool first = true;
    for (const auto& e : expected) {
      if (!first) msg += " or ";
      msg += e;
      first = false;
    }
    return msg + ", found " + found;
  }

  std::set<std::string> expected_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {
    if (!toks_.empty()) {
      const Token& last = toks_.back();
      eofLine_ = last.line;
      eofCol_ = last.col + last.length;
    }
  }

  Program program() {
    Program p;
    while (!at_end()) {
      const Token& t = peek();
      if (t.is_keyword("param")) {
        p.params.push_back(param_decl());
      } else if (t.is_keyword("world")) {
        const SourcePos pos = take_pos();
        if (p.worldRef) fail({"declaration"});
        p.worldRef = expect_string();
        p.worldPos = pos;
      } else if (t.is_keyword("require")) {
        p.requirements.push_back(requirement());
      } else if (t.is_keyword("behavior")) {
        p.behaviors.push_back(behavior_def());
      } else if (t.is_keyword("new") || t.kind == TokenKind::Ident) {
        p.objects.push_back(object_decl());
      } else {
        fail({"'param'", "'world'", "'require'", "'behavior'", "'new'", "identifier"});
      }
    }
    return p;
  }

 private:
  // --- token helpers ---------------------------------------------------
  bool at_end() const { return i_ >= toks_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token kEof{};
    return i_ + ahead < toks_.size() ? toks_[i_ + ahead] : kEof;
  }
  bool peek_keyword(std::string_view k, std::size_t ahead = 0) const {
    return i_ + ahead < toks_.size() && toks_[i_ + ahead].is_keyword(k);
  }
  bool peek_punct(std::string_view p, std::size_t ahead = 0) const {
    return i_ + ahead < toks_.size() && toks_[i_ + ahead].is_punct(p);
  }
  SourcePos pos() const {
    if (at_end()) return {eofLine_, eofCol_};
    return {peek().line, peek().col};
  }
  SourcePos take_pos() {
    SourcePos p = pos();
    ++i_;
    return p;
  }

  [[noreturn]] void fail(std::set<std::string> expected) const {
    const SourcePos p = pos();
    std::string found = "end of input";
    if (!at_end()) found = std::string(kind_name(peek().kind)) + " '" + peek().lexeme + "'";
    throw ParseError(p.line, p.col, std::move(expected), found);
  }

  void expect_keyword(std::string_view k) {
    if (!peek_keyword(k)) fail({"'" + std::string(k) + "'"});
    ++i_;
  }
  void expect_punct(std::string_view p) {
    if (!peek_punct(p)) fail({"'" + std::string(p) + "'"});
    ++i_;
  }
  std::string expect_ident() {
    if (at_end() || peek().kind != TokenKind::Ident) fail({"identifier"});
    return toks_[i_++].lexeme;
  }
  std::string expect_string() {
    if (at_end() || peek().kind != TokenKind::String) fail({"string"});
    return toks_[i_++].lexeme;
  }
  double expect_number() {
    if (at_end() || peek().kind != TokenKind::Number) fail({"number"});
    return to_double(toks_[i_++].lexeme);
  }
  static double to_double(const std::string& s) {
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
  }

  // --- declarations ----------------------------------------------------
  ParamDecl param_decl() {
    ParamDecl d;
    d.pos = take_pos();
    d.name = expect_ident();
    expect_punct("=");
    d.value = expr();
    return d;
  }

  Requirement requirement() {
    Requirement r;
    r.pos = take_pos();
    if (peek_punct("[")) {
      ++i_;
      r.probability = expect_number();
      expect_punct("]");
    }
    r.condition = expr();
    return r;
  }

  ObjectDecl object_decl() {
    ObjectDecl d;
    d.pos = pos();
    if (peek().kind == TokenKind::Ident) {
      d.binding = expect_ident();
      expect_punct("=");
    }
    expect_keyword("new");
    d.className = expect_ident();
    d.specifiers.push_back(specifier());
    while (peek_punct(",")) {
      ++i_;
      d.specifiers.push_back(specifier());
    }
    return d;
  }

  Specifier specifier() {
    Specifier s;
    s.pos = pos();
    const Token& t = peek();
    using K = Specifier::Kind;
    if (t.is_keyword("at")) {
      ++i_;
      s.kind = K::At;
      s.args.push_back(expr());
    } else if (t.is_keyword("on")) {
      ++i_;
      s.kind = K::OnLane;
      expect_keyword("lane");
      expect_punct("(");
      s.name = expect_string();
      expect_punct(")");
      if (peek_keyword("offset")) {
        ++i_;
        expect_keyword("by");
        s.args.push_back(expr());
      }
    } else if (t.is_keyword("ahead") || t.is_keyword("left") || t.is_keyword("right")) {
      s.kind = t.is_keyword("ahead") ? K::AheadOf : (t.is_keyword("left") ? K::LeftOf : K::RightOf);
      ++i_;
      expect_keyword("of");
      s.args.push_back(expr());
      expect_keyword("by");
      s.args.push_back(expr());
    } else if (t.is_keyword("behind")) {
      ++i_;
      s.kind = K::Behind;
      s.args.push_back(expr());
      expect_keyword("by");
      s.args.push_back(expr());
    } else if (t.is_keyword("facing")) {
      ++i_;
      if (peek_keyword("toward")) {
        ++i_;
        s.kind = K::FacingToward;
      } else {
        s.kind = K::Facing;
      }
      s.args.push_back(expr());
    } else if (t.is_keyword("with")) {
      ++i_;
      s.kind = K::With;
      if (peek_keyword("behavior")) {
        ++i_;
        s.name = "behavior";
      } else if (!at_end() && peek().kind == TokenKind::Ident) {
        s.name = expect_ident();
      } else {
        fail({"property name"});
      }
      s.args.push_back(expr());
    } else {
      fail({"specifier"});
    }
    return s;
  }

  BehaviorDef behavior_def() {
    BehaviorDef b;
    b.pos = take_pos();
    b.name = expect_ident();
    expect_punct("(");
    if (!peek_punct(")")) {
      b.params.push_back(expect_ident());
      while (peek_punct(",")) {
        ++i_;
        b.params.push_back(expect_ident());
      }
    }
    expect_punct(")");
    expect_punct(":");
    b.body = block({"end"});
    expect_keyword("end");
    return b;
  }

  // --- statements ------------------------------------------------------
  bool at_block_end(std::initializer_list<std::string_view> terminators) const {
    if (at_end()) return true;
    for (auto t : terminators)
      if (peek_keyword(t)) return true;
    return false;
  }

  std::vector<Stmt> block(std::initializer_list<std::string_view> terminators) {
    std::vector<Stmt> out;
    out.push_back(statement());
    while (!at_block_end(terminators)) out.push_back(statement());
    return out;
  }

  Stmt statement() {
    Stmt s;
    s.pos = pos();
    const Token& t = peek();
    if (t.is_keyword("take")) {
      ++i_;
      s.kind = Stmt::Kind::Take;
      expect_keyword("Action");
      expect_punct("(");
      s.args.push_back(expr());
      expect_punct(",");
      s.args.push_back(expr());
      expect_punct(",");
      s.args.push_back(expr());
      expect_punct(")");
    } else if (t.is_keyword("wait")) {
      ++i_;
      s.kind = Stmt::Kind::Wait;
    } else if (t.is_keyword("do")) {
      ++i_;
      s.kind = Stmt::Kind::Do;
      s.name = expect_ident();
      s.args = call_args();
    } else if (t.is_keyword("if")) {
      ++i_;
      s.kind = Stmt::Kind::If;
      s.args.push_back(expr());
      expect_punct(":");
      s.body = block({"else", "end"});
      if (peek_keyword("else")) {
        ++i_;
        expect_punct(":");
        s.elseBody = block({"end"});
      }
      expect_keyword("end");
    } else if (t.is_keyword("while")) {
      ++i_;
      s.kind = Stmt::Kind::While;
      s.args.push_back(expr());
      expect_punct(":");
      s.body = block({"end"});
      expect_keyword("end");
    } else if (t.is_keyword("try")) {
      ++i_;
      s.kind = Stmt::Kind::Try;
      expect_punct(":");
      s.body = block({"interrupt"});
      if (!peek_keyword("interrupt")) fail({"'interrupt'"});
      while (peek_keyword("interrupt")) {
        InterruptHandler h;
        h.pos = take_pos();
        expect_keyword("when");
        h.condition = expr();
        expect_punct(":");
        h.body = block({"interrupt", "end"});
        s.handlers.push_back(std::move(h));
      }
      expect_keyword("end");
    } else if (t.kind == TokenKind::Ident && peek_punct("=", 1)) {
      s.kind = Stmt::Kind::Assign;
      s.name = expect_ident();
      ++i_;
      s.args.push_back(expr());
    } else {
      fail({"statement"});
    }
    return s;
  }

  // --- expressions -----------------------------------------------------
  static Expr make(Expr::Kind k, SourcePos p) {
    Expr e;
    e.kind = k;
    e.pos = p;
    return e;
  }
  static Expr binary(std::string op, Expr lhs, Expr rhs, SourcePos p) {
    Expr e = make(Expr::Kind::Binary, p);
    e.text = std::move(op);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

 public:
  Expr expr() { return or_expr(); }

 private:
  Expr or_expr() {
    Expr lhs = and_expr();
    while (peek_keyword("or")) {
      const SourcePos p = take_pos();
      lhs = binary("or", std::move(lhs), and_expr(), p);
    }
    return lhs;
  }
  Expr and_expr() {
    Expr lhs = not_expr();
    while (peek_keyword("and")) {
      const SourcePos p = take_pos();
      lhs = binary("and", std::move(lhs), not_expr(), p);
    }
    return lhs;
  }
  Expr not_expr() {
    if (peek_keyword("not")) {
      Expr e = make(Expr::Kind::Unary, take_pos());
      e.text = "not";
      e.args.push_back(not_expr());
      return e;
    }
    return comparison();
  }
  Expr comparison() {
    Expr lhs = additive();
    static constexpr std::string_view kOps[] = {"<", "<=", ">", ">=", "==", "!="};
    for (auto op : kOps) {
      if (peek_punct(op)) {
        const SourcePos p = take_pos();
        return binary(std::string(op), std::move(lhs), additive(), p);
      }
    }
    return lhs;
  }
  Expr additive() {
    Expr lhs = multiplicative();
    while (peek_punct("+") || peek_punct("-")) {
      std::string op = peek().lexeme;
      const SourcePos p = take_pos();
      lhs = binary(std::move(op), std::move(lhs), multiplicative(), p);
    }
    return lhs;
  }
  Expr multiplicative() {
    Expr lhs = unary();
    while (peek_punct("*") || peek_punct("/")) {
      std::string op = peek().lexeme;
      const SourcePos p = take_pos();
      lhs = binary(std::move(op), std::move(lhs), unary(), p);
    }
    return lhs;
  }
  Expr unary() {
    if (peek_punct("-")) {
      Expr e = make(Expr::Kind::Unary, take_pos());
      e.text = "-";
      e.args.push_back(unary());
      return e;
    }
    return primary();
  }

  std::vector<Expr> call_args() {
    expect_punct("(");
    std::vector<Expr> args;
    if (!peek_punct(")")) {
      args.push_back(expr());
      while (peek_punct(",")) {
        ++i_;
        args.push_back(expr());
      }
    }
    expect_punct(")");
    return args;
  }

  Expr primary() {
    if (at_end()) fail({"expression"});
    const Token& t = peek();
    const SourcePos p = pos();
    switch (t.kind) {
      case TokenKind::Number: {
        Expr e = make(Expr::Kind::Number, p);
        e.number = to_double(t.lexeme);
        ++i_;
        return e;
      }
      case TokenKind::String: {
        Expr e = make(Expr::Kind::String, p);
        e.text = t.lexeme;
        ++i_;
        return e;
      }
      case TokenKind::Ident: {
        ++i_;
        if (peek_punct("(")) {
          Expr e = make(Expr::Kind::Call, p);
          e.text = t.lexeme;
          e.args = call_args();
          return e;
        }
        Expr e = make(Expr::Kind::Name, p);
        e.text = t.lexeme;
        return e;
      }
      case TokenKind::Keyword:
        if (t.is_keyword("true") || t.is_keyword("false")) {
          Expr e = make(Expr::Kind::Bool, p);
          e.number = t.is_keyword("true") ? 1.0 : 0.0;
          ++i_;
          return e;
        }
        if (t.is_keyword("self")) {
          ++i_;
          return make(Expr::Kind::Self, p);
        }
        break;
      case TokenKind::Punct:
        if (t.is_punct("(")) {
          ++i_;
          Expr first = expr();
          if (peek_punct(",")) {
            ++i_;
            Expr e = make(Expr::Kind::Point, p);
            e.args.push_back(std::move(first));
            e.args.push_back(expr());
            expect_punct(")");
            return e;
          }
          expect_punct(")");
          return first;
        }
        if (t.is_punct("[")) {
          ++i_;
          Expr e = make(Expr::Kind::List, p);
          if (!peek_punct("]")) {
            e.args.push_back(expr());
            while (peek_punct(",")) {
              ++i_;
              e.args.push_back(expr());
            }
          }
          expect_punct("]");
          return e;
        }
        break;
    }
    fail({"expression"});
  }

  const std::vector<Token>& toks_;
  std::size_t i_ = 0;
  int eofLine_ = 1;
  int eofCol_ = 1;
};

}  // namespace detail

inline Program parse(const std::vector<Token>& tokens) {
  return detail::Parser(tokens).program();
}

/// Parses a single expression; used by tests and tooling.
inline Expr parse_expression(const std::vector<Token>& tokens) {
  detail::Parser p(tokens);
  return p.expr();
}

}  // namespace scenegen::dsl
