#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rae/domain.hpp"
#include "rae/problem.hpp"
#include "rae/rng.hpp"
#include "rae/state.hpp"

namespace rae {

struct UnknownId : std::runtime_error {
  explicit UnknownId(const std::string& what) : std::runtime_error(what) {}
};

/// Hidden ground truth of the simulated world, readable only through
/// sensing actions.
class Environment {
 public:
  void set(const std::string& channel, const Args& args, Value v) {
    truth_[key(channel, args)] = std::move(v);
  }

  Value get(const std::string& channel, const Args& args) const {
    auto it = truth_.find(key(channel, args));
    return it == truth_.end() ? Value::unknown() : it->second;
  }

 private:
  static std::string key(const std::string& channel, const Args& args) {
    return channel + args_repr(args);
  }
  std::map<std::string, Value> truth_;
};

class EnvSensor : public Sensor {
 public:
  explicit EnvSensor(Environment& env) : env_(env) {}
  Value sense(const std::string& channel, const Args& args) override {
    return env_.get(channel, args);
  }
  void set_truth(const std::string& channel, const Args& args, const Value& v) override {
    env_.set(channel, args, v);
  }

 private:
  Environment& env_;
};

/// Planner-side stand-in: sensing draws from the domain's belief model
/// for the channel (given the simulated state) instead of the hidden
/// environment; truth writes are dropped.
class PlanSensor : public Sensor {
 public:
  PlanSensor(const Domain& domain, const State& s, RngStream& rng)
      : domain_(domain), state_(s), rng_(rng) {}

  Value sense(const std::string& channel, const Args& args) override {
    if (const SenseModel* m = domain_.sense_model(channel)) return (*m)(state_, args, rng_);
    return Value::unknown();
  }

 private:
  const Domain& domain_;
  const State& state_;
  RngStream& rng_;
};

enum class ExecStatus { Running, Done, Failed };

struct PollResult {
  ExecStatus status = ExecStatus::Running;
  double cost = 0.0;  // accrued branch cost once resolved
};

struct PendingAction {
  std::uint64_t id = 0;
  std::string action;
  Args args;
  std::uint64_t job = 0;
  double start = 0;
  double duration = 0;
  int outcome = -1;         // pre-drawn branch; -1 = guard failure
  bool resolved = false;    // effect applied / cost accrued
  ExecStatus final_status = ExecStatus::Running;
  double final_cost = 0;
};

struct AdvanceReport {
  std::vector<std::uint64_t> due_actions;    // newly completable, ascending id
  std::vector<TaskInstance> arrived_tasks;   // new root tasks (arrivals + event deliveries)
  int events_applied = 0;
};

/// Simulated execution platform: virtual clock, asynchronous actions
/// with outcomes pre-drawn from the action's generative model, scheduled
/// exogenous events and a hidden environment for sensing. With a fixed
/// seed and call sequence the full trace is reproducible.
class Platform {
 public:
  Platform(const Domain& domain, std::uint64_t seed)
      : domain_(&domain), xi_(domain.make_state()), rng_(seed, "platform") {}

  Platform(const Domain& domain, const ProblemInstance& problem, std::uint64_t seed)
      : Platform(domain, seed) {
    load(problem);
  }

  void load(const ProblemInstance& problem) {
    for (const auto& w : problem.initial_state) xi_.write(w.var, w.args, w.value);
    for (const auto& w : problem.environment) env_.set(w.var, w.args, w.value);
    events_ = problem.events;
    std::stable_sort(events_.begin(), events_.end(),
                     [](const ExogenousEvent& a, const ExogenousEvent& b) { return a.time < b.time; });
    arrivals_ = problem.arrivals;
    std::stable_sort(arrivals_.begin(), arrivals_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  double now() const { return now_; }
  const State& xi() const { return xi_; }
  State& xi_mut() { return xi_; }
  const Domain& domain() const { return *domain_; }
  Environment& env() { return env_; }

  /// Queues the action; its outcome branch is drawn immediately from the
  /// generative model but applied only at completion.
  std::uint64_t trigger(const std::string& action, const Args& args, std::uint64_t job) {
    const ActionSpec& spec = domain_->action(action);
    if (args.size() != spec.params.size())
      throw UnknownAction(action + ": expected " + std::to_string(spec.params.size()) +
                          " args, got " + std::to_string(args.size()));

    PendingAction p;
    p.id = next_id_++;
    p.action = action;
    p.args = args;
    p.job = job;
    p.start = now_;

    if (spec.guard && !spec.guard(xi_, args, domain_->rigid())) {
      p.outcome = -1;  // infeasible in the current state
      p.duration = 0;
    } else if (spec.chooser) {
      EnvSensor sensor(env_);
      p.outcome = spec.chooser(xi_, args, sensor, rng_);
      p.duration = spec.outcomes[static_cast<std::size_t>(p.outcome)].duration;
    } else {
      std::vector<double> probs;
      probs.reserve(spec.outcomes.size());
      for (const auto& o : spec.outcomes) probs.push_back(o.prob);
      p.outcome = static_cast<int>(rng_.discrete(probs));
      p.duration = spec.outcomes[static_cast<std::size_t>(p.outcome)].duration;
    }
    pending_[p.id] = p;
    return p.id;
  }

  /// Running until the clock reaches completion; on the first poll at or
  /// past it the branch effect is applied to the world state and the
  /// branch cost accrued to the issuing job.
  PollResult poll(std::uint64_t id) {
    auto it = pending_.find(id);
    if (it == pending_.end()) throw UnknownId("unknown action id " + std::to_string(id));
    PendingAction& p = it->second;
    if (p.resolved) return PollResult{p.final_status, p.final_cost};
    if (now_ < p.start + p.duration) return PollResult{ExecStatus::Running, 0.0};

    const ActionSpec& spec = domain_->action(p.action);
    double cost;
    ExecStatus status;
    // Concurrent jobs may have invalidated the action between trigger
    // and completion; an infeasible action fails instead of applying.
    bool guard_ok = !spec.guard || spec.guard(xi_, p.args, domain_->rigid());
    if (p.outcome < 0 || !guard_ok) {
      cost = spec.guard_fail_cost;
      status = ExecStatus::Failed;
    } else {
      const ActionOutcome& o = spec.outcomes[static_cast<std::size_t>(p.outcome)];
      cost = o.cost(xi_, p.args);
      // Failure branches may still carry effects (the world does not
      // wait for the actor to succeed).
      if (o.effect) {
        EnvSensor sensor(env_);
        EffectCtx ctx{xi_, p.args, sensor, domain_->rigid()};
        o.effect(ctx);
      }
      status = o.is_failure ? ExecStatus::Failed : ExecStatus::Done;
    }
    accrued_[p.job] += cost;
    p.resolved = true;
    p.final_status = status;
    p.final_cost = cost;
    trace_ << 'a' << p.id << (status == ExecStatus::Done ? "+" : "-") << cost << ';';
    return PollResult{status, cost};
  }

  /// Advances the virtual clock; applies due exogenous events and
  /// reports due action completions and newly arrived root tasks.
  AdvanceReport advance(double dt) {
    if (dt < 0) throw std::invalid_argument("advance: negative dt");
    now_ += dt;
    AdvanceReport rep;

    while (next_event_ < events_.size() && events_[next_event_].time <= now_) {
      const ExogenousEvent& e = events_[next_event_];
      for (const auto& w : e.state_writes) xi_.write(w.var, w.args, w.value);
      for (const auto& w : e.env_writes) env_.set(w.var, w.args, w.value);
      for (const auto& t : e.tasks) rep.arrived_tasks.push_back(t);
      rep.events_applied++;
      trace_ << "e@" << e.time << ';';
      ++next_event_;
    }
    while (next_arrival_ < arrivals_.size() && arrivals_[next_arrival_].first <= now_) {
      for (const auto& t : arrivals_[next_arrival_].second) rep.arrived_tasks.push_back(t);
      ++next_arrival_;
    }
    for (const auto& [id, p] : pending_) {
      if (!p.resolved && now_ >= p.start + p.duration) rep.due_actions.push_back(id);
    }
    std::sort(rep.due_actions.begin(), rep.due_actions.end());
    return rep;
  }

  /// Earliest future instant at which anything becomes due.
  std::optional<double> next_due_time() const {
    std::optional<double> t;
    auto consider = [&](double x) {
      if (x > now_ && (!t || x < *t)) t = x;
    };
    for (const auto& [id, p] : pending_)
      if (!p.resolved) consider(std::max(p.start + p.duration, now_ + 0.0));
    // An already-due unresolved action means "now" is actionable.
    for (const auto& [id, p] : pending_)
      if (!p.resolved && p.start + p.duration <= now_) return now_;
    if (next_event_ < events_.size()) consider(events_[next_event_].time);
    if (next_arrival_ < arrivals_.size()) consider(arrivals_[next_arrival_].first);
    return t;
  }

  Value sense(const std::string& channel, const Args& args) const {
    if (!domain_->has_channel(channel)) throw UnknownChannel("unknown sense channel " + channel);
    return env_.get(channel, args);
  }

  double accrued(std::uint64_t job) const {
    auto it = accrued_.find(job);
    return it == accrued_.end() ? 0.0 : it->second;
  }

  /// Serialized event/outcome/cost trace for reproducibility checks.
  std::string trace() const { return trace_.str(); }

  bool any_pending_unresolved() const {
    for (const auto& [id, p] : pending_)
      if (!p.resolved) return true;
    return false;
  }

 private:
  const Domain* domain_;
  double now_ = 0;
  State xi_;
  Environment env_;
  std::vector<ExogenousEvent> events_;
  std::size_t next_event_ = 0;
  std::vector<std::pair<double, std::vector<TaskInstance>>> arrivals_;
  std::size_t next_arrival_ = 0;
  std::map<std::uint64_t, PendingAction> pending_;
  std::uint64_t next_id_ = 1;
  RngStream rng_;
  std::map<std::uint64_t, double> accrued_;
  std::ostringstream trace_;
};

// ---------------------------------------------------------------------------
// Planner-side sampling

struct SampleResult {
  bool failed = false;
  State next;
  double cost = 0;
};

/// Draws one outcome of an action from the same generative model used by
/// the platform and returns the transformed copy of the state (or a
/// failure), plus the branch cost. Pure with respect to the platform.
inline SampleResult sample_action(const Domain& domain, const State& s, const std::string& action,
                                  const Args& args, RngStream& rng) {
  const ActionSpec& spec = domain.action(action);
  if (args.size() != spec.params.size()) throw UnknownAction(action + ": arity mismatch");

  SampleResult r;
  if (spec.guard && !spec.guard(s, args, domain.rigid())) {
    r.failed = true;
    r.cost = spec.guard_fail_cost;
    return r;
  }
  int idx;
  if (spec.plan_chooser) {
    idx = spec.plan_chooser(s, args, rng);
  } else {
    std::vector<double> probs;
    probs.reserve(spec.outcomes.size());
    for (const auto& o : spec.outcomes) probs.push_back(o.prob);
    idx = static_cast<int>(rng.discrete(probs));
  }
  const ActionOutcome& o = spec.outcomes[static_cast<std::size_t>(idx)];
  r.cost = o.cost(s, args);
  if (o.is_failure) {
    r.failed = true;
    return r;
  }
  r.next = s;
  if (o.effect) {
    PlanSensor sensor(domain, r.next, rng);
    EffectCtx ctx{r.next, args, sensor, domain.rigid()};
    o.effect(ctx);
  }
  return r;
}

}  // namespace rae
