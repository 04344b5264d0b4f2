#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rae/body.hpp"
#include "rae/rng.hpp"
#include "rae/state.hpp"
#include "rae/utility.hpp"
#include "rae/value.hpp"

namespace rae {

struct UnknownAction : std::runtime_error {
  explicit UnknownAction(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownTask : std::runtime_error {
  explicit UnknownTask(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownChannel : std::runtime_error {
  explicit UnknownChannel(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Tasks

enum class TaskOrigin { Root, Subtask };

struct TaskDecl {
  std::string name;
  std::vector<std::string> params;
};

struct TaskInstance {
  std::string name;
  Args args;
  TaskOrigin origin = TaskOrigin::Root;

  std::string repr() const { return name + args_repr(args); }
};

// ---------------------------------------------------------------------------
// Actions

/// Read access to hidden environment truth, and write access for the few
/// effects that change the world beyond the actor's state. The acting
/// platform senses the real environment; planner rollouts get a belief
/// model instead.
class Sensor {
 public:
  virtual ~Sensor() = default;
  virtual Value sense(const std::string& channel, const Args& args) = 0;
  virtual void set_truth(const std::string& /*channel*/, const Args& /*args*/,
                         const Value& /*v*/) {}
};

struct EffectCtx {
  State& state;
  const Args& args;
  Sensor& sensor;
  const RigidRelations& rigid;
};

using Effect = std::function<void(EffectCtx&)>;
using CostFn = std::function<double(const State&, const Args&)>;
using GuardFn = std::function<bool(const State&, const Args&, const RigidRelations&)>;

inline CostFn constant_cost(double c) {
  return [c](const State&, const Args&) { return c; };
}

struct ActionOutcome {
  double prob = 1.0;
  bool is_failure = false;
  Effect effect;  // unused for failure outcomes
  CostFn cost = constant_cost(1.0);
  double duration = 1.0;
};

/// Generative model of one primitive action: fixed-probability outcome
/// branches shared by the execution platform and the planner's Sample,
/// plus an optional state feasibility guard and an optional
/// environment-conditional chooser for sensing-style outcomes.
struct ActionSpec {
  std::string name;
  std::vector<std::string> params;
  std::vector<ActionOutcome> outcomes;
  GuardFn guard;  // false => action fails regardless of the drawn branch
  double guard_fail_cost = 1.0;
  // Platform-side conditional outcome selection (may consult the hidden
  // environment). When set, plan_chooser must be set too.
  std::function<int(const State&, const Args&, Sensor&, RngStream&)> chooser;
  std::function<int(const State&, const Args&, RngStream&)> plan_chooser;

  int first_failure_outcome() const {
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      if (outcomes[i].is_failure) return static_cast<int>(i);
    return -1;
  }

  void validate() const {
    if (outcomes.empty()) throw std::invalid_argument(name + ": no outcomes");
    double total = 0;
    for (const auto& o : outcomes) {
      if (o.prob < 0 || o.prob > 1)
        throw std::invalid_argument(name + ": branch probability outside [0,1]");
      if (o.duration < 0) throw std::invalid_argument(name + ": negative duration");
      total += o.prob;
    }
    if (!chooser && std::fabs(total - 1.0) > 1e-9)
      throw std::invalid_argument(name + ": branch probabilities sum to " + std::to_string(total));
    if (chooser && !plan_chooser)
      throw std::invalid_argument(name + ": env-conditional action needs a planning chooser");
  }
};

// ---------------------------------------------------------------------------
// Methods

struct ParamDecl {
  std::string name;
  std::string sort;
};

struct MethodTemplate {
  std::string name;
  std::string task;                      // role
  std::vector<std::string> role_params;  // bound positionally from task args
  std::vector<ParamDecl> extra_params;   // free parameters over finite sorts
  Test precondition;                     // empty => true
  InstrPtr body;
};

/// A method template with every parameter bound. Identity (for tried
/// sets) is the template name plus the bound argument tuple in declared
/// parameter order.
class MethodInstance {
 public:
  MethodInstance() = default;
  MethodInstance(std::shared_ptr<const MethodTemplate> tmpl, Binding binding)
      : tmpl_(std::move(tmpl)), binding_(std::move(binding)) {}

  bool valid() const { return tmpl_ != nullptr; }
  const MethodTemplate& tmpl() const { return *tmpl_; }
  std::shared_ptr<const MethodTemplate> tmpl_ptr() const { return tmpl_; }
  const Binding& binding() const { return binding_; }

  std::string identity() const {
    std::string id = tmpl_->name + "(";
    bool first = true;
    for (const auto& p : tmpl_->role_params) {
      if (!first) id += ',';
      first = false;
      id += binding_.at(p).repr();
    }
    for (const auto& p : tmpl_->extra_params) {
      if (!first) id += ',';
      first = false;
      id += binding_.at(p.name).repr();
    }
    return id + ")";
  }

  bool operator==(const MethodInstance& o) const {
    return valid() && o.valid() && identity() == o.identity();
  }

 private:
  std::shared_ptr<const MethodTemplate> tmpl_;
  Binding binding_;
};

/// Set of method-instance identities already tried for one task.
class TriedSet {
 public:
  bool contains(const MethodInstance& m) const { return ids_.count(m.identity()) > 0; }
  void insert(const MethodInstance& m) { ids_.insert(m.identity()); }
  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }

 private:
  std::set<std::string> ids_;
};

// ---------------------------------------------------------------------------
// Domain

using AbstractionHook = std::function<State(const State&)>;
using DomainHeuristic =
    std::function<double(const TaskInstance&, const MethodInstance&, const State&, UtilityKind)>;
using SenseModel = std::function<Value(const State&, const Args&, RngStream&)>;

/// A registered acting/planning domain: state-variable declarations,
/// rigid relations, tasks, actions and refinement methods in declaration
/// order, plus the per-domain hooks (abstraction, hand heuristic,
/// planner belief models for sensing channels).
class Domain {
 public:
  Domain() : decls_(std::make_shared<Declarations>()) {}

  // --- registration ---------------------------------------------------

  void declare_var(std::string name, std::vector<std::string> arg_sorts, RangeSpec range) {
    mutable_decls().declare_var(StateVarDecl{std::move(name), std::move(arg_sorts), std::move(range)});
  }
  void declare_sort(const std::string& name, std::vector<Value> values) {
    mutable_decls().declare_sort(name, std::move(values));
  }
  void declare_rigid(const std::string& name, std::vector<Args> tuples) {
    rigid_.declare(name, std::move(tuples));
  }

  void declare_task(TaskDecl decl) {
    if (task_index_.count(decl.name)) throw std::invalid_argument("duplicate task " + decl.name);
    task_index_[decl.name] = tasks_.size();
    tasks_.push_back(std::move(decl));
  }

  void declare_action(ActionSpec spec) {
    spec.validate();
    if (action_index_.count(spec.name))
      throw std::invalid_argument("duplicate action " + spec.name);
    action_index_[spec.name] = actions_.size();
    actions_.push_back(std::make_shared<const ActionSpec>(std::move(spec)));
  }

  void declare_method(MethodTemplate tmpl) {
    auto it = task_index_.find(tmpl.task);
    if (it == task_index_.end())
      throw std::invalid_argument("method " + tmpl.name + " for undeclared task " + tmpl.task);
    if (tasks_[it->second].params.size() != tmpl.role_params.size())
      throw std::invalid_argument("method " + tmpl.name + ": role arity mismatch");
    for (const auto& p : tmpl.extra_params)
      if (!decls_->has_sort(p.sort))
        throw std::invalid_argument("method " + tmpl.name + ": unknown sort " + p.sort);
    methods_.push_back(std::make_shared<const MethodTemplate>(std::move(tmpl)));
  }

  void declare_sense_channel(const std::string& channel) { channels_.insert(channel); }
  void set_sense_model(const std::string& channel, SenseModel model) {
    channels_.insert(channel);
    sense_models_[channel] = std::move(model);
  }

  void set_abstraction(AbstractionHook hook) { abstraction_ = std::move(hook); }
  void set_domain_heuristic(DomainHeuristic h) { heuristic_ = std::move(h); }

  // --- lookup ----------------------------------------------------------

  std::shared_ptr<const Declarations> decls_ptr() const { return decls_; }
  const Declarations& decls() const { return *decls_; }
  const RigidRelations& rigid() const { return rigid_; }

  const std::vector<TaskDecl>& tasks() const { return tasks_; }
  const std::vector<std::shared_ptr<const ActionSpec>>& actions() const { return actions_; }
  const std::vector<std::shared_ptr<const MethodTemplate>>& methods() const { return methods_; }

  const TaskDecl& task(const std::string& name) const {
    auto it = task_index_.find(name);
    if (it == task_index_.end()) throw UnknownTask("undeclared task: " + name);
    return tasks_[it->second];
  }
  bool has_task(const std::string& name) const { return task_index_.count(name) > 0; }

  const ActionSpec& action(const std::string& name) const {
    auto it = action_index_.find(name);
    if (it == action_index_.end()) throw UnknownAction("undeclared action: " + name);
    return *actions_[it->second];
  }

  bool has_channel(const std::string& channel) const { return channels_.count(channel) > 0; }
  const SenseModel* sense_model(const std::string& channel) const {
    auto it = sense_models_.find(channel);
    return it == sense_models_.end() ? nullptr : &it->second;
  }

  const DomainHeuristic* domain_heuristic() const {
    return heuristic_ ? &heuristic_ : nullptr;
  }

  State make_state() const { return State(decls_); }

  /// Planning abstraction of an observed state; identity by default.
  State abstract(const State& xi) const { return abstraction_ ? abstraction_(xi) : xi; }

  // --- applicability ---------------------------------------------------

  /// Applicable method instances for a task, in deterministic order:
  /// template declaration order, then canonical order of free-parameter
  /// bindings.
  std::vector<MethodInstance> applicable(const State& s, const TaskInstance& tau) const {
    const TaskDecl& decl = task(tau.name);
    if (decl.params.size() != tau.args.size())
      throw UnknownTask("task " + tau.name + ": arity mismatch");

    std::vector<MethodInstance> out;
    for (const auto& tmpl : methods_) {
      if (tmpl->task != tau.name) continue;
      Binding base;
      for (std::size_t i = 0; i < tmpl->role_params.size(); ++i)
        base[tmpl->role_params[i]] = tau.args[i];
      enumerate_bindings(s, tmpl, base, 0, out);
    }
    return out;
  }

  void validate() const {
    for (const auto& a : actions_) a->validate();
  }

 private:
  Declarations& mutable_decls() {
    // Registration happens before any State is handed out; the shared
    // declarations are logically frozen afterwards.
    return const_cast<Declarations&>(*decls_);
  }

  void enumerate_bindings(const State& s, const std::shared_ptr<const MethodTemplate>& tmpl,
                          Binding& binding, std::size_t param_idx,
                          std::vector<MethodInstance>& out) const {
    if (param_idx == tmpl->extra_params.size()) {
      EvalCtx ctx{s, &rigid_, &binding, nullptr};
      if (!tmpl->precondition || tmpl->precondition(ctx)) out.emplace_back(tmpl, binding);
      return;
    }
    const ParamDecl& p = tmpl->extra_params[param_idx];
    std::vector<Value> values = decls_->sort(p.sort);
    std::sort(values.begin(), values.end());
    for (const auto& v : values) {
      binding[p.name] = v;
      enumerate_bindings(s, tmpl, binding, param_idx + 1, out);
    }
    binding.erase(p.name);
  }

  std::shared_ptr<const Declarations> decls_;
  RigidRelations rigid_;
  std::vector<TaskDecl> tasks_;
  std::map<std::string, std::size_t> task_index_;
  std::vector<std::shared_ptr<const ActionSpec>> actions_;
  std::map<std::string, std::size_t> action_index_;
  std::vector<std::shared_ptr<const MethodTemplate>> methods_;
  std::set<std::string> channels_;
  std::map<std::string, SenseModel> sense_models_;
  AbstractionHook abstraction_;
  DomainHeuristic heuristic_;
};

}  // namespace rae
