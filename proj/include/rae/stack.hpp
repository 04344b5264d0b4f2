#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rae/body.hpp"
#include "rae/domain.hpp"
#include "rae/state.hpp"

namespace rae {

/// One level of an in-progress refinement: the task, the method instance
/// chosen for it (absent only in the frame freshly pushed by the
/// planner's Select entry), the program counter into its body, the
/// method instances already tried for the task, and the frame-local
/// variables of the body.
struct StackFrame {
  TaskInstance task;
  MethodInstance method;  // !valid() => nil placeholder
  ProgramCounter pc;
  TriedSet tried;
  Locals locals;
  std::optional<std::uint64_t> pending_action;  // acting side only

  bool has_method() const { return method.valid(); }

  EvalCtx ctx(const State& s, const RigidRelations& rigid) const {
    return EvalCtx{s, &rigid, has_method() ? &method.binding() : nullptr, &locals};
  }
};

/// LIFO of stack frames recording the decomposition of one root task.
/// An empty stack denotes success of the root task.
class RefinementStack {
 public:
  bool empty() const { return frames_.empty(); }
  std::size_t size() const { return frames_.size(); }

  StackFrame& top() {
    if (empty()) throw std::runtime_error("top() on empty refinement stack");
    return frames_.back();
  }
  const StackFrame& top() const {
    if (empty()) throw std::runtime_error("top() on empty refinement stack");
    return frames_.back();
  }

  void push(StackFrame f) { frames_.push_back(std::move(f)); }
  void pop() {
    if (empty()) throw std::runtime_error("pop() on empty refinement stack");
    frames_.pop_back();
  }

  const std::vector<StackFrame>& frames() const { return frames_; }

  /// Canonical serialization (bottom to top) used to key planner search
  /// statistics by (stack, state).
  std::string signature() const {
    std::ostringstream os;
    for (const auto& f : frames_) {
      os << f.task.repr() << '/'
         << (f.has_method() ? f.method.identity() : std::string("nil")) << '@'
         << f.pc.signature();
      if (!f.locals.empty()) {
        os << '{';
        for (const auto& [k, v] : f.locals) os << k << '=' << v << ',';
        os << '}';
      }
      os << '|';
    }
    return os.str();
  }

 private:
  std::vector<StackFrame> frames_;
};

/// Advances a stack whose top frame just completed its current step:
/// moves to the next step of the body, popping exhausted frames; each
/// pop completes the Sub step of the frame below, which is advanced in
/// turn. An empty result means the root task finished.
inline void advance_stack(RefinementStack& sigma, const State& s, const RigidRelations& rigid) {
  while (!sigma.empty()) {
    StackFrame& f = sigma.top();
    ProgramCounter next = ProgramCounter::end();
    if (f.has_method() && !f.pc.at_end) {
      EvalCtx ctx = f.ctx(s, rigid);
      next = next_pc(f.method.tmpl().body, f.pc, ctx);
    }
    if (!next.at_end) {
      f.pc = next;
      return;
    }
    sigma.pop();
  }
}

/// Step currently addressed by the top frame (End for nil placeholders
/// and exhausted bodies).
inline Step stack_step(const RefinementStack& sigma) {
  const StackFrame& f = sigma.top();
  if (!f.has_method() || f.pc.at_end) return Step{Step::Kind::End, nullptr};
  return current_step(f.method.tmpl().body, f.pc);
}

enum class JobStatus { Running, Succeeded, Failed };

/// One entry of RAE's agenda: a root task and its refinement stack.
struct Job {
  std::uint64_t id = 0;
  TaskInstance root;
  RefinementStack stack;
  JobStatus status = JobStatus::Running;
  int retries = 0;
  double accrued_cost = 0.0;
  double arrival_time = 0.0;
  double completion_time = 0.0;
};

/// The set of refinement stacks RAE progresses concurrently, one per
/// root task; jobs leave on success or retrial failure.
class Agenda {
 public:
  Job& add(Job job) {
    auto [it, ok] = jobs_.emplace(job.id, std::move(job));
    if (!ok) throw std::runtime_error("duplicate job id");
    order_.push_back(it->first);
    return it->second;
  }

  Job* find(std::uint64_t id) {
    auto it = jobs_.find(id);
    return it == jobs_.end() ? nullptr : &it->second;
  }

  void remove(std::uint64_t id) {
    jobs_.erase(id);
    for (auto it = order_.begin(); it != order_.end(); ++it)
      if (*it == id) {
        order_.erase(it);
        break;
      }
  }

  /// Job ids in arrival order (deterministic progression order).
  std::vector<std::uint64_t> ids() const { return order_; }
  bool empty() const { return jobs_.empty(); }
  std::size_t size() const { return jobs_.size(); }

 private:
  std::map<std::uint64_t, Job> jobs_;
  std::vector<std::uint64_t> order_;
};

}  // namespace rae
