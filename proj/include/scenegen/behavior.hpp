#pragma once
// Resumable behavior interpreter. Each instance keeps an explicit frame
// stack so execution can stop at a `take` or `wait` and continue on the next
// simulation step.
//
// Interrupt semantics: conditions are tested when a try is entered and at the
// start of every step, when try frames are scanned from the outermost inward.
// The first try whose body is running (not one of its own handlers) and has a
// true interrupt condition fires; if several of its conditions are true the
// textually last one wins. Firing stashes the
// frames above the try and runs the handler. When the handler finishes, the
// conditions are tested again: a true one runs its handler anew, otherwise the
// stashed frames are restored and the body resumes where it stopped.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/dsl/checker.hpp"
#include "scenegen/dynamics.hpp"
#include "scenegen/eval.hpp"
#include "scenegen/scene.hpp"

namespace scenegen {

class BehaviorRuntimeError : public Error {
 public:
  BehaviorRuntimeError(int agentId, int line, int col, const std::string& msg)
      : Error("agent " + std::to_string(agentId) + " at " + std::to_string(line) + ":" +
              std::to_string(col) + ": " + msg),
        agentId_(agentId),
        line_(line),
        col_(col) {}
  int agent_id() const { return agentId_; }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int agentId_, line_, col_;
};

/// Ground truth visible to behaviors at one step.
struct WorldView {
  const Scene* scene = nullptr;
  std::map<int, AgentState> states;  // every scene object, by id
};

class BehaviorInstance {
 public:
  static constexpr int kMaxStatementsPerStep = 100000;
  static constexpr int kMaxCallDepth = 256;

  BehaviorInstance(const dsl::CheckedProgram& prog, int agentId, const BehaviorBinding& binding)
      : prog_(&prog), agentId_(agentId), name_(binding.name) {
    const dsl::BehaviorDef* def = prog.behavior(binding.name);
    if (!def) throw BehaviorRuntimeError(agentId, 0, 0, "unknown behavior '" + binding.name + "'");
    if (def->params.size() != binding.args.size())
      throw BehaviorRuntimeError(agentId, def->pos.line, def->pos.col, "argument count mismatch");
    Frame call;
    call.kind = Frame::Kind::Call;
    for (std::size_t i = 0; i < def->params.size(); ++i) call.locals[def->params[i]] = binding.args[i];
    stack_.push_back(std::move(call));
    stack_.push_back(block(def->body));
  }

  const std::string& name() const { return name_; }
  int agent_id() const { return agentId_; }
  bool done() const { return stack_.empty(); }

  /// Runs until the next `take` (its action) or `wait` (the idle action).
  /// Returns nullopt once the behavior has completed.
  std::optional<Action> next_action(const WorldView& view, Rng& rng) {
    try {
      return step(view, rng);
    } catch (const EvalError& e) {
      stack_.clear();
      throw BehaviorRuntimeError(agentId_, e.line(), e.col(), e.message());
    }
  }

 private:
  struct Frame {
    enum class Kind { Block, Call, Try };
    Kind kind = Kind::Block;
    const std::vector<dsl::Stmt>* stmts = nullptr;  // Block
    std::size_t pc = 0;                             // Block
    std::map<std::string, Value> locals;            // Call
    const dsl::Stmt* tryStmt = nullptr;             // Try
    bool inHandler = false;                         // Try
    std::vector<Frame> suspended;                   // Try: body frames stashed while a handler runs
  };

  static Frame block(const std::vector<dsl::Stmt>& stmts) {
    Frame f;
    f.kind = Frame::Kind::Block;
    f.stmts = &stmts;
    return f;
  }

  class Scope : public EvalScope {
   public:
    Scope(BehaviorInstance& self, const WorldView& view, Rng& rng, std::size_t frameLimit)
        : self_(self), view_(view), rng_(rng), limit_(frameLimit) {}

    std::optional<Value> lookup(const std::string& name) const override {
      for (std::size_t i = limit_; i-- > 0;) {
        const Frame& f = self_.stack_[i];
        if (f.kind != Frame::Kind::Call) continue;
        if (auto it = f.locals.find(name); it != f.locals.end()) return it->second;
        break;  // only the innermost call's locals are visible
      }
      if (view_.scene) {
        if (const SceneObject* o = view_.scene->find_named(name)) return ObjectRef{o->id};
        if (auto it = view_.scene->params.find(name); it != view_.scene->params.end()) return it->second;
      }
      return std::nullopt;
    }
    std::optional<ObjectRef> self() const override { return ObjectRef{self_.agentId_}; }
    std::optional<ObjectState> object_state(int id) const override {
      if (auto it = view_.states.find(id); it != view_.states.end())
        return ObjectState{it->second.x, it->second.y, it->second.heading, it->second.speed};
      if (view_.scene)
        if (const SceneObject* o = view_.scene->find(id)) return ObjectState{o->x, o->y, o->heading, 0.0};
      return std::nullopt;
    }
    Rng& rng() override { return rng_; }

   private:
    BehaviorInstance& self_;
    const WorldView& view_;
    Rng& rng_;
    std::size_t limit_;
  };

  Frame& innermost_call() {
    for (std::size_t i = stack_.size(); i-- > 0;)
      if (stack_[i].kind == Frame::Kind::Call) return stack_[i];
    return stack_.front();
  }

  int call_depth() const {
    int d = 0;
    for (const auto& f : stack_) d += f.kind == Frame::Kind::Call;
    return d;
  }

  // Index of the textually last handler of the try at stack_[i] whose
  // condition holds, or -1.
  int fired_handler(std::size_t i, const WorldView& view, Rng& rng) {
    const dsl::Stmt* t = stack_[i].tryStmt;
    int fired = -1;
    for (std::size_t k = 0; k < t->handlers.size(); ++k) {
      Scope scope(*this, view, rng, i);
      if (evaluate_bool(t->handlers[k].condition, scope)) fired = static_cast<int>(k);
    }
    return fired;
  }

  void check_interrupts(const WorldView& view, Rng& rng) {
    for (std::size_t i = 0; i < stack_.size(); ++i) {
      if (stack_[i].kind != Frame::Kind::Try || stack_[i].inHandler) continue;
      const int fired = fired_handler(i, view, rng);
      if (fired < 0) continue;
      enter_handler(i, fired);
      return;
    }
  }

  // Stashes the frames above the try at stack_[i] and starts handler k.
  void enter_handler(std::size_t i, int k) {
    Frame& tf = stack_[i];
    tf.suspended.assign(std::make_move_iterator(stack_.begin() + static_cast<std::ptrdiff_t>(i) + 1),
                        std::make_move_iterator(stack_.end()));
    stack_.resize(i + 1);
    stack_[i].inHandler = true;
    stack_.push_back(block(stack_[i].tryStmt->handlers[static_cast<std::size_t>(k)].body));
  }

  std::optional<Action> step(const WorldView& view, Rng& rng) {
    if (stack_.empty()) return std::nullopt;
    check_interrupts(view, rng);

    for (int budget = 0; budget < kMaxStatementsPerStep; ++budget) {
      if (stack_.empty()) return std::nullopt;
      Frame& top = stack_.back();
      if (top.kind == Frame::Kind::Call) {
        stack_.pop_back();
        continue;
      }
      if (top.kind == Frame::Kind::Try) {
        if (!top.inHandler) {
          stack_.pop_back();
        } else if (const int k = fired_handler(stack_.size() - 1, view, rng); k >= 0) {
          stack_.push_back(block(top.tryStmt->handlers[static_cast<std::size_t>(k)].body));
        } else {
          top.inHandler = false;
          std::vector<Frame> body = std::move(top.suspended);
          top.suspended.clear();
          for (auto& f : body) stack_.push_back(std::move(f));
        }
        continue;
      }
      if (top.pc >= top.stmts->size()) {
        stack_.pop_back();
        continue;
      }
      const dsl::Stmt& s = (*top.stmts)[top.pc];
      Scope scope(*this, view, rng, stack_.size());
      switch (s.kind) {
        case dsl::Stmt::Kind::Take: {
          const double throttle = evaluate_scalar(s.args[0], scope);
          const double steer = evaluate_scalar(s.args[1], scope);
          const double brake = evaluate_scalar(s.args[2], scope);
          ++top.pc;
          return Action(throttle, steer, brake);
        }
        case dsl::Stmt::Kind::Wait:
          ++top.pc;
          return Action();
        case dsl::Stmt::Kind::Assign: {
          Value v = evaluate(s.args[0], scope);
          ++top.pc;
          innermost_call().locals[s.name] = std::move(v);
          break;
        }
        case dsl::Stmt::Kind::If: {
          const bool c = evaluate_bool(s.args[0], scope);
          ++top.pc;
          const auto& body = c ? s.body : s.elseBody;
          if (!body.empty()) stack_.push_back(block(body));
          break;
        }
        case dsl::Stmt::Kind::While:
          // pc stays on the loop so the condition is re-tested after the body
          if (evaluate_bool(s.args[0], scope))
            stack_.push_back(block(s.body));
          else
            ++top.pc;
          break;
        case dsl::Stmt::Kind::Do: {
          const dsl::BehaviorDef* def = prog_->behavior(s.name);
          if (!def) throw EvalError(s.pos, "unknown behavior '" + s.name + "'");
          if (call_depth() >= kMaxCallDepth) throw EvalError(s.pos, "behavior call depth exceeded");
          Frame call;
          call.kind = Frame::Kind::Call;
          for (std::size_t i = 0; i < def->params.size(); ++i)
            call.locals[def->params[i]] = evaluate(s.args[i], scope);
          ++top.pc;
          stack_.push_back(std::move(call));
          stack_.push_back(block(def->body));
          break;
        }
        case dsl::Stmt::Kind::Try: {
          ++top.pc;
          Frame t;
          t.kind = Frame::Kind::Try;
          t.tryStmt = &s;
          stack_.push_back(std::move(t));
          stack_.push_back(block(s.body));
          if (const int k = fired_handler(stack_.size() - 2, view, rng); k >= 0) enter_handler(stack_.size() - 2, k);
          break;
        }
      }
    }
    const dsl::SourcePos p = stack_.empty() || stack_.back().kind != Frame::Kind::Block
                                 ? dsl::SourcePos{}
                                 : (*stack_.back().stmts)[std::min(stack_.back().pc, stack_.back().stmts->size() - 1)].pos;
    throw EvalError(p, "behavior executed " + std::to_string(kMaxStatementsPerStep) +
                           " statements without taking an action");
  }

  const dsl::CheckedProgram* prog_;
  int agentId_;
  std::string name_;
  std::vector<Frame> stack_;
};

}  // namespace scenegen
