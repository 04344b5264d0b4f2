#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rae/domain.hpp"
#include "rae/planner.hpp"
#include "rae/platform.hpp"
#include "rae/rng.hpp"
#include "rae/stack.hpp"

namespace rae {

enum class StrategyKind { Reactive, Learned, Planner };

/// Ranking of method-template indices for a decision context, best
/// first; provided by a trained method policy.
using TemplateRanker =
    std::function<std::vector<std::size_t>(const State&, const TaskInstance&)>;

/// Choice of one free-parameter value among the currently applicable
/// ones; provided by trained per-parameter models.
using ParamChooser = std::function<std::optional<Value>(
    const State&, const TaskInstance&, const MethodTemplate&, const std::string& param,
    const std::vector<Value>& applicable_values)>;

struct SelectStrategy {
  StrategyKind kind = StrategyKind::Reactive;
  PlanConfig plan;                 // Planner
  TemplateRanker rank_templates;   // Learned
  ParamChooser choose_param;       // Learned, optional refinement
  LearnedHeuristic learned_h;      // Planner with the learned heuristic
};

struct JobOutcome {
  std::uint64_t job = 0;
  TaskInstance root;
  bool succeeded = false;
  double accrued_cost = 0;
  int retries = 0;
  double completion_time = 0;
  double arrival_time = 0;
};

/// Fired on every planner-backed Select, for offline data generation.
struct SelectRecord {
  std::uint64_t job = 0;
  State abstract_state;
  TaskInstance task;
  MethodInstance chosen;
  double predicted_q = 0;
  bool had_alternatives = false;
};
using SelectObserver = std::function<void(const SelectRecord&)>;

/// Fired when Retry gives up on a method instance (it joins a tried set).
using RetryObserver =
    std::function<void(std::uint64_t job, const TaskInstance&, const std::string& instance_id)>;

struct EngineConfig {
  SelectStrategy strategy;
  int recursion_depth_cap = 200;
};

/// The refinement acting engine: maintains the agenda of refinement
/// stacks, progresses each one step per iteration against the freshly
/// observed world state, triggers actions on the platform and falls back
/// to Retry on failures. Selection of method instances is reactive,
/// learned, or delegated to the anytime planner.
class Engine {
 public:
  Engine(const Domain& domain, Platform& platform, EngineConfig config, std::uint64_t seed)
      : domain_(domain),
        platform_(platform),
        config_(std::move(config)),
        rng_(seed, "rae"),
        planner_rng_(seed, "planner") {}

  void set_select_observer(SelectObserver obs) { observer_ = std::move(obs); }
  void set_retry_observer(RetryObserver obs) { retry_observer_ = std::move(obs); }

  /// Queues a new root task for the next iteration.
  void submit(TaskInstance tau) {
    tau.origin = TaskOrigin::Root;
    incoming_.push_back(std::move(tau));
  }

  bool quiescent() const { return incoming_.empty() && agenda_.empty(); }
  const Agenda& agenda() const { return agenda_; }
  Agenda& agenda_mut() { return agenda_; }

  /// One iteration of the outer loop: intake of new root tasks, then one
  /// progression step for every stack. Emits outcomes of jobs that
  /// finished. `any_progress` reports whether anything moved (false
  /// means every stack is waiting on a running action).
  std::vector<JobOutcome> step(bool* any_progress = nullptr) {
    std::vector<JobOutcome> out;
    bool moved = false;

    while (!incoming_.empty()) {
      TaskInstance tau = std::move(incoming_.front());
      incoming_.pop_front();
      moved = true;
      std::uint64_t id = next_job_++;
      std::optional<MethodInstance> m = select(tau, TriedSet{}, RefinementStack{}, id);
      if (!m) {
        JobOutcome o;
        o.job = id;
        o.root = tau;
        o.succeeded = false;
        o.arrival_time = o.completion_time = platform_.now();
        out.push_back(std::move(o));
        continue;
      }
      Job job;
      job.id = id;
      job.root = tau;
      job.arrival_time = platform_.now();
      push_frame(job.stack, tau, *m, TriedSet{});
      agenda_.add(std::move(job));
    }

    for (std::uint64_t id : agenda_.ids()) {
      Job* job = agenda_.find(id);
      if (!job) continue;
      Outcome res = progress(*job);
      if (res != Outcome::NoChange) moved = true;
      if (res == Outcome::Success || res == Outcome::RetrialFailure) {
        JobOutcome o;
        o.job = job->id;
        o.root = job->root;
        o.succeeded = res == Outcome::Success;
        o.retries = job->retries;
        o.accrued_cost = platform_.accrued(job->id);
        o.completion_time = platform_.now();
        o.arrival_time = job->arrival_time;
        out.push_back(std::move(o));
        agenda_.remove(id);
      }
    }
    if (any_progress) *any_progress = moved;
    return out;
  }

  enum class Outcome { Progressed, NoChange, Success, RetrialFailure };

  /// One Progress step for a stack (exposed for scripted tests).
  Outcome progress(Job& job) {
    RefinementStack& sigma = job.stack;
    const State& xi = platform_.xi();
    if (sigma.empty()) return Outcome::Success;

    StackFrame& top = sigma.top();

    if (top.pending_action) {
      PollResult pr = platform_.poll(*top.pending_action);
      switch (pr.status) {
        case ExecStatus::Running:
          return Outcome::NoChange;
        case ExecStatus::Failed:
          top.pending_action.reset();
          return retry(job);
        case ExecStatus::Done:
          top.pending_action.reset();
          advance_stack(sigma, xi, domain_.rigid());
          return sigma.empty() ? Outcome::Success : Outcome::Progressed;
      }
    }

    Step step = stack_step(sigma);
    switch (step.kind) {
      case Step::Kind::End: {
        advance_stack(sigma, xi, domain_.rigid());
        return sigma.empty() ? Outcome::Success : Outcome::Progressed;
      }
      case Step::Kind::Assign: {
        EvalCtx ctx = top.ctx(xi, domain_.rigid());
        Args target = step.eval_args(ctx);
        Value v = step.instr->value_expr(ctx);
        platform_.xi_mut().write(step.instr->name, target, std::move(v));
        advance_stack(sigma, platform_.xi(), domain_.rigid());
        return sigma.empty() ? Outcome::Success : Outcome::Progressed;
      }
      case Step::Kind::AssignLocal: {
        EvalCtx ctx = top.ctx(xi, domain_.rigid());
        Value v = step.instr->value_expr(ctx);
        top.locals[step.instr->name] = std::move(v);
        advance_stack(sigma, xi, domain_.rigid());
        return sigma.empty() ? Outcome::Success : Outcome::Progressed;
      }
      case Step::Kind::FailNow:
        return retry(job);
      case Step::Kind::Act: {
        EvalCtx ctx = top.ctx(xi, domain_.rigid());
        Args args = step.eval_args(ctx);
        top.pending_action = platform_.trigger(step.instr->name, args, job.id);
        return Outcome::Progressed;
      }
      case Step::Kind::Sub: {
        EvalCtx ctx = top.ctx(xi, domain_.rigid());
        TaskInstance sub{step.instr->name, step.eval_args(ctx), TaskOrigin::Subtask};
        if (static_cast<int>(sigma.size()) >= config_.recursion_depth_cap) return retry(job);
        std::optional<MethodInstance> m = select(sub, TriedSet{}, sigma, job.id);
        if (!m) return retry(job);
        push_frame(sigma, sub, *m, TriedSet{});
        return Outcome::Progressed;
      }
    }
    return Outcome::NoChange;
  }

  /// The failed method instance joins the frame's tried set and an
  /// untried alternative is sought in the current state; otherwise
  /// retrial moves one level up. Never backtracks the world state.
  Outcome retry(Job& job) {
    RefinementStack& sigma = job.stack;
    while (!sigma.empty()) {
      StackFrame failed = sigma.top();
      sigma.pop();
      TriedSet tried = failed.tried;
      if (failed.has_method()) {
        tried.insert(failed.method);
        if (retry_observer_) retry_observer_(job.id, failed.task, failed.method.identity());
      }
      job.retries += 1;
      std::optional<MethodInstance> m = select(failed.task, tried, sigma, job.id);
      if (m) {
        push_frame(sigma, failed.task, *m, tried);
        return Outcome::Progressed;
      }
    }
    return Outcome::RetrialFailure;
  }

  /// Select dispatch. Reactive: first untried applicable instance in
  /// deterministic order. Learned: best template per the trained policy,
  /// instantiated among applicable instances. Planner: UPOM; a zero time
  /// budget degrades to reactive.
  std::optional<MethodInstance> select(const TaskInstance& tau, const TriedSet& tried,
                                       const RefinementStack& sigma_ctx, std::uint64_t job = 0) {
    const State& xi = platform_.xi();
    switch (config_.strategy.kind) {
      case StrategyKind::Reactive:
        return reactive_select(xi, tau, tried);

      case StrategyKind::Learned: {
        if (!config_.strategy.rank_templates)
          throw MissingModel("learned strategy without a method policy");
        State s = domain_.abstract(xi);
        std::vector<std::size_t> ranking = config_.strategy.rank_templates(s, tau);
        std::vector<MethodInstance> all = applicable_untried(xi, tau, tried);
        for (std::size_t tmpl_idx : ranking) {
          if (tmpl_idx >= domain_.methods().size()) continue;
          const MethodTemplate& tmpl = *domain_.methods()[tmpl_idx];
          std::vector<MethodInstance> of_tmpl;
          for (const auto& m : all)
            if (&m.tmpl() == &tmpl) of_tmpl.push_back(m);
          if (of_tmpl.empty()) continue;  // fall back to the next-ranked template
          if (config_.strategy.choose_param && !tmpl.extra_params.empty()) {
            if (auto m = choose_instance_by_params(s, tau, tmpl, of_tmpl)) return m;
          }
          return of_tmpl[rng_.uniform_index(of_tmpl.size())];
        }
        return std::nullopt;
      }

      case StrategyKind::Planner: {
        if (config_.strategy.plan.time_budget_ms && *config_.strategy.plan.time_budget_ms <= 0)
          return reactive_select(xi, tau, tried);
        PlannerContext pctx{domain_, config_.strategy.plan, config_.strategy.learned_h};
        PlanResult pr = plan_select(pctx, xi, tau, sigma_ctx, tried, planner_rng_);
        if (observer_ && pr.chosen) {
          SelectRecord rec;
          rec.job = job;
          rec.abstract_state = domain_.abstract(xi);
          rec.task = tau;
          rec.chosen = *pr.chosen;
          rec.predicted_q = pr.diag.chosen_q;
          rec.had_alternatives = !pr.diag.root_table.empty();
          observer_(rec);
        }
        return pr.chosen;
      }
    }
    return std::nullopt;
  }

 private:
  std::optional<MethodInstance> reactive_select(const State& xi, const TaskInstance& tau,
                                                const TriedSet& tried) {
    for (auto& m : domain_.applicable(xi, tau))
      if (!tried.contains(m)) return m;
    return std::nullopt;
  }

  std::vector<MethodInstance> applicable_untried(const State& xi, const TaskInstance& tau,
                                                 const TriedSet& tried) {
    std::vector<MethodInstance> out;
    for (auto& m : domain_.applicable(xi, tau))
      if (!tried.contains(m)) out.push_back(std::move(m));
    return out;
  }

  /// Builds the instance from per-parameter model choices when the
  /// combination is itself applicable; joint infeasibility falls back to
  /// the caller's random choice.
  std::optional<MethodInstance> choose_instance_by_params(
      const State& s, const TaskInstance& tau, const MethodTemplate& tmpl,
      const std::vector<MethodInstance>& candidates) {
    Binding want;
    for (const auto& p : tmpl.extra_params) {
      std::vector<Value> values;
      for (const auto& m : candidates) {
        Value v = m.binding().at(p.name);
        bool seen = false;
        for (const auto& u : values) seen = seen || u == v;
        if (!seen) values.push_back(v);
      }
      auto choice = config_.strategy.choose_param(s, tau, tmpl, p.name, values);
      if (!choice) return std::nullopt;
      want[p.name] = *choice;
    }
    for (const auto& m : candidates) {
      bool match = true;
      for (const auto& [k, v] : want) match = match && m.binding().at(k) == v;
      if (match) return m;
    }
    return std::nullopt;
  }

  void push_frame(RefinementStack& sigma, const TaskInstance& tau, const MethodInstance& m,
                  TriedSet tried) {
    StackFrame f;
    f.task = tau;
    f.method = m;
    f.tried = std::move(tried);
    EvalCtx ctx{platform_.xi(), &domain_.rigid(), &m.binding(), &f.locals};
    f.pc = initial_pc(m.tmpl().body, ctx);
    sigma.push(std::move(f));
  }

  const Domain& domain_;
  Platform& platform_;
  EngineConfig config_;
  RngStream rng_;
  RngStream planner_rng_;
  Agenda agenda_;
  std::deque<TaskInstance> incoming_;
  std::uint64_t next_job_ = 1;
  SelectObserver observer_;
  RetryObserver retry_observer_;
};

// ---------------------------------------------------------------------------
// Run loop

struct RunResult {
  std::vector<JobOutcome> outcomes;
  double sim_time = 0;
  double wall_ms = 0;
  bool cutoff = false;
};

/// Drives one problem to completion: delivers scheduled arrivals,
/// iterates the engine, and advances the virtual clock whenever every
/// stack is blocked on a running action.
inline RunResult run_problem(const Domain& domain, const ProblemInstance& problem,
                             const EngineConfig& config, std::uint64_t seed,
                             double wall_cutoff_s = 1800.0, double sim_time_cap = 1e6) {
  RunResult result;
  Platform platform(domain, problem, seed);
  Engine engine(domain, platform, config, seed);

  const auto t0 = std::chrono::steady_clock::now();
  auto wall_s = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  AdvanceReport rep = platform.advance(0);
  for (const auto& t : rep.arrived_tasks) engine.submit(t);

  std::size_t expected = problem.num_root_tasks();
  std::size_t seen = 0;

  for (;;) {
    if (wall_s() > wall_cutoff_s || platform.now() > sim_time_cap) {
      result.cutoff = true;
      break;
    }
    bool moved = false;
    auto outs = engine.step(&moved);
    seen += outs.size();
    for (auto& o : outs) result.outcomes.push_back(std::move(o));

    if (engine.quiescent()) {
      if (seen >= expected) break;
      // Nothing active; jump to the next scheduled arrival/event.
      auto due = platform.next_due_time();
      if (!due) break;
      rep = platform.advance(*due - platform.now());
      for (const auto& t : rep.arrived_tasks) engine.submit(t);
      continue;
    }

    if (!moved) {
      auto due = platform.next_due_time();
      if (!due) break;  // blocked with nothing pending: give up
      rep = platform.advance(std::max(0.0, *due - platform.now()));
      for (const auto& t : rep.arrived_tasks) engine.submit(t);
    } else {
      rep = platform.advance(0);
      for (const auto& t : rep.arrived_tasks) engine.submit(t);
    }
  }

  result.sim_time = platform.now();
  result.wall_ms = wall_s() * 1000.0;
  return result;
}

}  // namespace rae
