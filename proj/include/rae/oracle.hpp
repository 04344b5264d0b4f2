#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rae/domain.hpp"
#include "rae/rng.hpp"
#include "rae/stack.hpp"
#include "rae/utility.hpp"

namespace rae {

struct BlowupGuard : std::runtime_error {
  explicit BlowupGuard(const std::string& what) : std::runtime_error(what) {}
};

struct OracleOptions {
  std::size_t node_budget = 1'000'000;
};

namespace detail {

// Oracle evaluation must be deterministic; effects that sense have no
// place in the static domains it supports.
class ForbidSensor : public Sensor {
 public:
  Value sense(const std::string& channel, const Args&) override {
    throw std::invalid_argument("oracle: sensing effect on channel " + channel +
                                " (outcome distributions must be explicit)");
  }
};

class OracleEval {
 public:
  OracleEval(const Domain& domain, UtilityKind kind, std::size_t budget)
      : domain_(domain), kind_(kind), budget_(budget) {}

  /// Maximal expected utility of continuing the given stack from s:
  /// maximizes over applicable refinements and averages over explicit
  /// action-outcome distributions, failure branch included.
  UtilityValue eval(RefinementStack sigma, State s) {
    if (++nodes_ > budget_) throw BlowupGuard("oracle node budget exceeded");
    if (sigma.empty()) return UtilityValue::identity(kind_);

    StackFrame& top = sigma.top();
    Step step = stack_step(sigma);

    switch (step.kind) {
      case Step::Kind::End: {
        advance_stack(sigma, s, domain_.rigid());
        return eval(std::move(sigma), std::move(s));
      }
      case Step::Kind::Assign: {
        EvalCtx ctx = top.ctx(s, domain_.rigid());
        Args target = step.eval_args(ctx);
        Value v = step.instr->value_expr(ctx);
        s.write(step.instr->name, target, std::move(v));
        advance_stack(sigma, s, domain_.rigid());
        return eval(std::move(sigma), std::move(s));
      }
      case Step::Kind::AssignLocal: {
        EvalCtx ctx = top.ctx(s, domain_.rigid());
        top.locals[step.instr->name] = step.instr->value_expr(ctx);
        advance_stack(sigma, s, domain_.rigid());
        return eval(std::move(sigma), std::move(s));
      }
      case Step::Kind::FailNow:
        return UtilityValue::failure(kind_);
      case Step::Kind::Act: {
        EvalCtx ctx = top.ctx(s, domain_.rigid());
        Args args = step.eval_args(ctx);
        const ActionSpec& spec = domain_.action(step.instr->name);
        if (spec.chooser)
          throw std::invalid_argument("oracle: action " + spec.name +
                                      " has environment-conditional outcomes");
        if (spec.guard && !spec.guard(s, args, domain_.rigid()))
          return UtilityValue::failure(kind_);

        double expected = 0.0;
        for (const ActionOutcome& o : spec.outcomes) {
          if (o.prob == 0.0) continue;
          if (o.is_failure) continue;  // failed branch contributes 0
          double cost = o.cost(s, args);
          State s2 = s;
          if (o.effect) {
            ForbidSensor sensor;
            EffectCtx ectx{s2, args, sensor, domain_.rigid()};
            o.effect(ectx);
          }
          RefinementStack sig2 = sigma;
          advance_stack(sig2, s2, domain_.rigid());
          UtilityValue rest = eval(std::move(sig2), std::move(s2));
          UtilityValue branch = oplus(action_value(kind_, cost, false), rest);
          expected += o.prob * branch.value();  // finite: 1/cost bounds it
        }
        return UtilityValue(kind_, expected);
      }
      case Step::Kind::Sub: {
        EvalCtx ctx = top.ctx(s, domain_.rigid());
        TaskInstance sub{step.instr->name, step.eval_args(ctx), TaskOrigin::Subtask};
        std::vector<MethodInstance> methods = domain_.applicable(s, sub);
        double best = 0.0;  // empty set of refinements means failure
        for (const auto& m : methods) {
          RefinementStack sig2 = sigma;
          StackFrame child;
          child.task = sub;
          child.method = m;
          EvalCtx cctx{s, &domain_.rigid(), &m.binding(), &child.locals};
          child.pc = initial_pc(m.tmpl().body, cctx);
          sig2.push(std::move(child));
          UtilityValue u = eval(std::move(sig2), s);
          if (u.value() > best) best = u.value();
        }
        return UtilityValue(kind_, best);
      }
    }
    return UtilityValue::failure(kind_);
  }

  std::size_t nodes() const { return nodes_; }

 private:
  const Domain& domain_;
  UtilityKind kind_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
};

}  // namespace detail

/// U*(m, s, sigma): exact maximal expected utility of running method
/// instance m for its task, continuing with whatever the context stack
/// still has pending. Exhaustive recursion over refinements and explicit
/// outcome distributions; a node budget turns blowup into an error.
/// Only the efficiency and success-ratio utilities are supported;
/// additive state-reward / transition-cost variants are not implemented.
inline UtilityValue exact_utility(const Domain& domain, const MethodInstance& m, const State& s,
                                  const RefinementStack& sigma_ctx, UtilityKind kind,
                                  const OracleOptions& opts = {}) {
  TaskInstance tau{m.tmpl().task, Args{}, TaskOrigin::Root};
  for (const auto& p : m.tmpl().role_params) tau.args.push_back(m.binding().at(p));

  RefinementStack sigma = sigma_ctx;
  StackFrame frame;
  frame.task = tau;
  frame.method = m;
  Locals locals;
  EvalCtx ctx{s, &domain.rigid(), &m.binding(), &locals};
  frame.pc = initial_pc(m.tmpl().body, ctx);
  sigma.push(std::move(frame));

  detail::OracleEval ev(domain, kind, opts.node_budget);
  return ev.eval(std::move(sigma), s);
}

inline UtilityValue exact_utility(const Domain& domain, const MethodInstance& m, const State& s,
                                  UtilityKind kind, const OracleOptions& opts = {}) {
  return exact_utility(domain, m, s, RefinementStack{}, kind, opts);
}

struct OracleChoice {
  std::optional<MethodInstance> method;
  UtilityValue utility;
};

/// argmax of U* over the applicable instances for tau in s; ties break
/// by the deterministic applicable order, an empty set yields utility 0.
inline OracleChoice optimal_method(const Domain& domain, const TaskInstance& tau, const State& s,
                                   UtilityKind kind, const OracleOptions& opts = {}) {
  OracleChoice out{std::nullopt, UtilityValue::failure(kind)};
  for (const auto& m : domain.applicable(s, tau)) {
    UtilityValue u = exact_utility(domain, m, s, kind, opts);
    if (!out.method || u.value() > out.utility.value()) {
      out.method = m;
      out.utility = u;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random static micro-domains (for convergence testing)

struct MicroLimits {
  int max_methods_per_task = 3;
  int max_outcomes_per_action = 2;
  int max_depth = 3;
};

struct MicroDomain {
  std::shared_ptr<Domain> domain;
  TaskInstance root;
  std::string description;  // structural fingerprint, for determinism checks
};

/// Generates a random static acyclic domain with explicit outcome
/// distributions: tasks are layered by depth, bodies mix actions and
/// next-layer subtasks, every refinement tree is finite by construction.
inline MicroDomain gen_micro_domain(RngStream& rng, const MicroLimits& limits) {
  auto domain = std::make_shared<Domain>();
  std::ostringstream desc;

  domain->declare_var("k", {}, RangeSpec::finite([] {
    std::vector<Value> vs;
    for (int i = 0; i <= 40; ++i) vs.push_back(Value::integer(i));
    return vs;
  }()));

  const int depth = limits.max_depth;
  for (int level = 1; level <= depth; ++level)
    domain->declare_task(TaskDecl{"t" + std::to_string(level), {}});

  int action_counter = 0;
  auto make_action = [&](int level) {
    std::string name = "a" + std::to_string(level) + "_" + std::to_string(action_counter++);
    ActionSpec spec;
    spec.name = name;
    double fail_prob = rng.bernoulli(0.5) ? rng.uniform(0.05, 0.4) : 0.0;
    int n_succ = 1 + static_cast<int>(rng.uniform_index(
                         static_cast<std::size_t>(std::max(1, limits.max_outcomes_per_action))));
    n_succ = std::min(n_succ, limits.max_outcomes_per_action);
    double remaining = 1.0 - fail_prob;
    desc << name << '[';
    for (int i = 0; i < n_succ; ++i) {
      ActionOutcome o;
      o.prob = (i == n_succ - 1) ? remaining : remaining * rng.uniform(0.3, 0.7);
      remaining -= o.prob;
      double cost = rng.uniform(0.5, 4.0);
      o.cost = constant_cost(cost);
      o.duration = 1.0;
      o.effect = {};
      desc << o.prob << '/' << cost << ' ';
      spec.outcomes.push_back(std::move(o));
    }
    if (fail_prob > 0) {
      ActionOutcome f;
      f.prob = fail_prob;
      f.is_failure = true;
      f.cost = constant_cost(1.0);
      f.duration = 1.0;
      desc << "F" << fail_prob;
      spec.outcomes.push_back(std::move(f));
    }
    desc << ']';
    domain->declare_action(std::move(spec));
    return name;
  };

  for (int level = 1; level <= depth; ++level) {
    int n_methods = 1 + static_cast<int>(rng.uniform_index(
                            static_cast<std::size_t>(limits.max_methods_per_task)));
    for (int j = 0; j < n_methods; ++j) {
      std::vector<InstrPtr> steps;
      int n_steps = 1 + static_cast<int>(rng.uniform_index(3));
      for (int k = 0; k < n_steps; ++k) {
        double roll = rng.uniform01();
        if (level < depth && roll < 0.35) {
          steps.push_back(ir::sub("t" + std::to_string(level + 1), {}));
        } else if (roll < 0.45) {
          steps.push_back(ir::assign("k", {}, ex::host([](const EvalCtx& c) {
            std::int64_t k = c.state.read("k").is_unknown() ? 0 : c.state.read("k").as_int();
            return Value::integer(std::min<std::int64_t>(k + 1, 40));
          })));
        } else {
          steps.push_back(ir::act(make_action(level), {}));
        }
      }
      MethodTemplate tmpl;
      tmpl.name = "m" + std::to_string(level) + "_" + std::to_string(j);
      tmpl.task = "t" + std::to_string(level);
      tmpl.body = ir::seq(std::move(steps));
      desc << tmpl.name << ';';
      domain->declare_method(std::move(tmpl));
    }
  }

  MicroDomain out;
  out.domain = std::move(domain);
  out.root = TaskInstance{"t1", {}, TaskOrigin::Root};
  out.description = desc.str();
  return out;
}

}  // namespace rae
