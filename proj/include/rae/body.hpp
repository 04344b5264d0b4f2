#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rae/state.hpp"
#include "rae/value.hpp"

namespace rae {

struct TypeMismatch : std::runtime_error {
  explicit TypeMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidPC : std::runtime_error {
  explicit InvalidPC(const std::string& what) : std::runtime_error(what) {}
};

using Binding = std::map<std::string, Value>;
using Locals = std::map<std::string, Value>;

/// Evaluation context of method tests and expressions: the observed (or
/// simulated) state, the domain's rigid relations, the method's parameter
/// binding and the frame's local derived variables. All reads are pure.
struct EvalCtx {
  const State& state;
  const RigidRelations* rigid = nullptr;
  const Binding* binding = nullptr;
  const Locals* locals = nullptr;

  Value lookup(const std::string& name) const {
    if (locals) {
      auto it = locals->find(name);
      if (it != locals->end()) return it->second;
    }
    if (binding) {
      auto it = binding->find(name);
      if (it != binding->end()) return it->second;
    }
    throw std::runtime_error("unbound name in method body: " + name);
  }

  const RigidRelations& rigids() const {
    static const RigidRelations empty;
    return rigid ? *rigid : empty;
  }
};

using Expr = std::function<Value(const EvalCtx&)>;
using Test = std::function<bool(const EvalCtx&)>;

struct Instr;
using InstrPtr = std::shared_ptr<const Instr>;

/// One node of a method body: control structure or executable leaf.
/// Trees are immutable after construction and freely shared.
struct Instr {
  enum class Kind { Seq, If, While, Assign, AssignLocal, Act, Sub, FailNow };

  Kind kind;
  std::vector<InstrPtr> children;  // Seq: steps; If: {then, else}; While: {body}
  Test test;                       // If / While
  int loop_cap = 1000;             // While
  std::string name;                // Act: action, Sub: task, Assign: variable, AssignLocal: local
  std::vector<Expr> arg_exprs;     // Act/Sub call args; Assign target args
  Expr value_expr;                 // Assign / AssignLocal

  bool is_leaf() const {
    return kind == Kind::Assign || kind == Kind::AssignLocal || kind == Kind::Act ||
           kind == Kind::Sub || kind == Kind::FailNow;
  }
};

namespace ir {

inline InstrPtr seq(std::vector<InstrPtr> steps) {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::Seq;
  n->children = std::move(steps);
  return n;
}

inline InstrPtr if_(Test test, InstrPtr then_branch, InstrPtr else_branch = nullptr) {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::If;
  n->test = std::move(test);
  n->children = {std::move(then_branch), else_branch ? std::move(else_branch) : seq({})};
  return n;
}

inline InstrPtr while_(Test test, InstrPtr body, int cap = 1000) {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::While;
  n->test = std::move(test);
  n->children = {std::move(body)};
  n->loop_cap = cap;
  return n;
}

inline InstrPtr assign(std::string var, std::vector<Expr> target_args, Expr value) {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::Assign;
  n->name = std::move(var);
  n->arg_exprs = std::move(target_args);
  n->value_expr = std::move(value);
  return n;
}

inline InstrPtr assign_local(std::string local, Expr value) {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::AssignLocal;
  n->name = std::move(local);
  n->value_expr = std::move(value);
  return n;
}

inline InstrPtr act(std::string action, std::vector<Expr> args) {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::Act;
  n->name = std::move(action);
  n->arg_exprs = std::move(args);
  return n;
}

inline InstrPtr sub(std::string task, std::vector<Expr> args) {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::Sub;
  n->name = std::move(task);
  n->arg_exprs = std::move(args);
  return n;
}

inline InstrPtr fail_now() {
  auto n = std::make_shared<Instr>();
  n->kind = Instr::Kind::FailNow;
  return n;
}

}  // namespace ir

// ---------------------------------------------------------------------------
// Expressions and tests

namespace ex {

inline Expr lit(Value v) {
  return [v = std::move(v)](const EvalCtx&) { return v; };
}
inline Expr sym(std::string s) { return lit(Value::symbol(std::move(s))); }
inline Expr num(std::int64_t i) { return lit(Value::integer(i)); }
inline Expr real(double r) { return lit(Value::real(r)); }
inline Expr unknown() { return lit(Value::unknown()); }

/// Method parameter or frame-local lookup.
inline Expr param(std::string name) {
  return [name = std::move(name)](const EvalCtx& ctx) { return ctx.lookup(name); };
}

/// State-variable read.
inline Expr var(std::string name, std::vector<Expr> args = {}) {
  return [name = std::move(name), args = std::move(args)](const EvalCtx& ctx) {
    Args a;
    a.reserve(args.size());
    for (const auto& e : args) a.push_back(e(ctx));
    return ctx.state.read(name, a);
  };
}

/// Registered pure host computation over the full context.
inline Expr host(std::function<Value(const EvalCtx&)> fn) { return Expr(std::move(fn)); }

inline Expr tuple_at(Expr t, std::size_t i) {
  return [t = std::move(t), i](const EvalCtx& ctx) {
    Value v = t(ctx);
    if (!v.is_tuple() || v.as_tuple().size() <= i)
      throw TypeMismatch("tuple_at on " + v.repr());
    return v.as_tuple()[i];
  };
}

}  // namespace ex

namespace ts {

namespace detail {
enum class Cmp { Lt, Gt, Le, Ge };

inline bool ordered(const Value& a, const Value& b, Cmp op) {
  // Unknown is an ordinary value for equality, but ordered comparisons
  // with it are simply false.
  if (a.is_unknown() || b.is_unknown()) return false;
  if (!a.is_numeric() || !b.is_numeric())
    throw TypeMismatch("ordered comparison of non-numeric values: " + a.repr() + " vs " + b.repr());
  double x = a.as_number(), y = b.as_number();
  switch (op) {
    case Cmp::Lt: return x < y;
    case Cmp::Gt: return x > y;
    case Cmp::Le: return x <= y;
    case Cmp::Ge: return x >= y;
  }
  return false;
}
}  // namespace detail

inline Test eq(Expr a, Expr b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) { return a(c) == b(c); };
}
inline Test ne(Expr a, Expr b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) { return a(c) != b(c); };
}
inline Test lt(Expr a, Expr b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) {
    return detail::ordered(a(c), b(c), detail::Cmp::Lt);
  };
}
inline Test gt(Expr a, Expr b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) {
    return detail::ordered(a(c), b(c), detail::Cmp::Gt);
  };
}
inline Test le(Expr a, Expr b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) {
    return detail::ordered(a(c), b(c), detail::Cmp::Le);
  };
}
inline Test ge(Expr a, Expr b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) {
    return detail::ordered(a(c), b(c), detail::Cmp::Ge);
  };
}
inline Test not_(Test t) {
  return [t = std::move(t)](const EvalCtx& c) { return !t(c); };
}
inline Test and_(Test a, Test b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) { return a(c) && b(c); };
}
inline Test or_(Test a, Test b) {
  return [a = std::move(a), b = std::move(b)](const EvalCtx& c) { return a(c) || b(c); };
}
inline Test always() {
  return [](const EvalCtx&) { return true; };
}
inline Test host(std::function<bool(const EvalCtx&)> fn) { return Test(std::move(fn)); }

}  // namespace ts

// ---------------------------------------------------------------------------
// Program counters and stepping

/// Address of the current instruction: child-index path from the body
/// root to an executable leaf, or the distinguished END marker. While
/// iteration counts ride along so a counter survives suspension of the
/// frame while an action runs.
struct ProgramCounter {
  std::vector<int> path;
  std::map<std::vector<int>, int> loop_counts;
  bool at_end = false;

  static ProgramCounter end() {
    ProgramCounter pc;
    pc.at_end = true;
    return pc;
  }

  bool operator==(const ProgramCounter& o) const {
    return at_end == o.at_end && path == o.path && loop_counts == o.loop_counts;
  }

  std::string signature() const {
    if (at_end) return "END";
    std::ostringstream os;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) os << '.';
      os << path[i];
    }
    for (const auto& [p, c] : loop_counts) {
      os << "|w";
      for (int x : p) os << '.' << x;
      os << ':' << c;
    }
    return os.str();
  }
};

inline const Instr* instr_at(const InstrPtr& body, const std::vector<int>& path) {
  const Instr* cur = body.get();
  for (int idx : path) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= cur->children.size())
      throw InvalidPC("bad program counter path");
    cur = cur->children[static_cast<std::size_t>(idx)].get();
  }
  return cur;
}

namespace detail {

/// First executable leaf inside `node`, traversing control transparently.
/// Returns false when the subtree contributes no step in this state.
inline bool descend(const Instr* node, std::vector<int>& path,
                    std::map<std::vector<int>, int>& counts, const EvalCtx& ctx) {
  switch (node->kind) {
    case Instr::Kind::Assign:
    case Instr::Kind::AssignLocal:
    case Instr::Kind::Act:
    case Instr::Kind::Sub:
    case Instr::Kind::FailNow:
      return true;
    case Instr::Kind::Seq: {
      for (std::size_t i = 0; i < node->children.size(); ++i) {
        path.push_back(static_cast<int>(i));
        if (descend(node->children[i].get(), path, counts, ctx)) return true;
        path.pop_back();
      }
      return false;
    }
    case Instr::Kind::If: {
      int branch = node->test(ctx) ? 0 : 1;
      path.push_back(branch);
      if (descend(node->children[static_cast<std::size_t>(branch)].get(), path, counts, ctx))
        return true;
      path.pop_back();
      return false;
    }
    case Instr::Kind::While: {
      // Counter = completed or started body entries for this activation.
      for (;;) {
        int& cnt = counts[path];
        if (cnt >= node->loop_cap || !node->test(ctx)) {
          counts.erase(path);  // reset for a later re-activation
          return false;
        }
        ++cnt;
        path.push_back(0);
        if (descend(node->children[0].get(), path, counts, ctx)) return true;
        path.pop_back();
        // Empty pass; the counter bounds this loop.
      }
    }
  }
  return false;
}

}  // namespace detail

/// Entry point of a body in the given state: first executable leaf, or
/// END for bodies with no step to run.
inline ProgramCounter initial_pc(const InstrPtr& body, const EvalCtx& ctx) {
  ProgramCounter pc;
  if (detail::descend(body.get(), pc.path, pc.loop_counts, ctx)) return pc;
  return ProgramCounter::end();
}

/// Successor of a completed step: linear successor within Seq, control
/// instructions traversed by evaluating their tests against the current
/// state, loop re-entry bounded by the iteration cap. Deterministic.
inline ProgramCounter next_pc(const InstrPtr& body, const ProgramCounter& pc, const EvalCtx& ctx) {
  if (pc.at_end) return ProgramCounter::end();
  // Validate the current address.
  const Instr* leaf = instr_at(body, pc.path);
  if (!leaf->is_leaf()) throw InvalidPC("program counter does not address a leaf");

  ProgramCounter cur = pc;
  std::vector<int>& p = cur.path;
  while (!p.empty()) {
    int idx = p.back();
    p.pop_back();
    const Instr* parent = instr_at(body, p);
    switch (parent->kind) {
      case Instr::Kind::Seq: {
        for (std::size_t j = static_cast<std::size_t>(idx) + 1; j < parent->children.size(); ++j) {
          p.push_back(static_cast<int>(j));
          if (detail::descend(parent->children[j].get(), p, cur.loop_counts, ctx)) return cur;
          p.pop_back();
        }
        break;  // Seq exhausted; continue upward.
      }
      case Instr::Kind::If:
        break;  // Chosen branch done; continue upward.
      case Instr::Kind::While: {
        for (;;) {
          int& cnt = cur.loop_counts[p];
          if (cnt >= parent->loop_cap || !parent->test(ctx)) {
            cur.loop_counts.erase(p);
            break;  // Loop exits; continue upward.
          }
          ++cnt;
          p.push_back(0);
          if (detail::descend(parent->children[0].get(), p, cur.loop_counts, ctx)) return cur;
          p.pop_back();
        }
        break;
      }
      default:
        throw InvalidPC("leaf nested under a leaf");
    }
  }
  return ProgramCounter::end();
}

/// The step a program counter addresses, with its argument thunks still
/// unevaluated; callers resolve them against the state of the moment.
struct Step {
  enum class Kind { Act, Sub, Assign, AssignLocal, FailNow, End };
  Kind kind = Kind::End;
  const Instr* instr = nullptr;

  Args eval_args(const EvalCtx& ctx) const {
    Args out;
    out.reserve(instr->arg_exprs.size());
    for (const auto& e : instr->arg_exprs) out.push_back(e(ctx));
    return out;
  }
};

inline Step current_step(const InstrPtr& body, const ProgramCounter& pc) {
  if (pc.at_end) return Step{Step::Kind::End, nullptr};
  const Instr* n = instr_at(body, pc.path);
  switch (n->kind) {
    case Instr::Kind::Act: return Step{Step::Kind::Act, n};
    case Instr::Kind::Sub: return Step{Step::Kind::Sub, n};
    case Instr::Kind::Assign: return Step{Step::Kind::Assign, n};
    case Instr::Kind::AssignLocal: return Step{Step::Kind::AssignLocal, n};
    case Instr::Kind::FailNow: return Step{Step::Kind::FailNow, n};
    default: throw InvalidPC("program counter addresses a control instruction");
  }
}

}  // namespace rae
