#pragma once

#include <memory>

#include "rae/domains/bundle.hpp"

namespace rae::domains {

/// Two-method single-task domain: a cheap risky action against a costly
/// safe one. The canonical disagreement between the efficiency and
/// success-ratio optima.
inline DomainBundle build_toy() {
  auto d = std::make_shared<Domain>();
  d->declare_task(TaskDecl{"t", {}});

  {
    ActionSpec a1;
    a1.name = "a1";
    ActionOutcome ok;
    ok.prob = 0.8;
    ok.cost = constant_cost(1.0);
    ok.duration = 1.0;
    ActionOutcome bad;
    bad.prob = 0.2;
    bad.is_failure = true;
    bad.cost = constant_cost(1.0);
    bad.duration = 1.0;
    a1.outcomes = {ok, bad};
    d->declare_action(std::move(a1));
  }
  {
    ActionSpec a2;
    a2.name = "a2";
    ActionOutcome ok;
    ok.prob = 1.0;
    ok.cost = constant_cost(2.0);
    ok.duration = 2.0;
    a2.outcomes = {ok};
    d->declare_action(std::move(a2));
  }

  MethodTemplate mA;
  mA.name = "mA";
  mA.task = "t";
  mA.body = ir::seq({ir::act("a2", {})});
  d->declare_method(std::move(mA));

  MethodTemplate mB;
  mB.name = "mB";
  mB.task = "t";
  mB.body = ir::seq({ir::act("a1", {})});
  d->declare_method(std::move(mB));

  d->set_domain_heuristic([](const TaskInstance&, const MethodInstance&, const State&,
                             UtilityKind) { return 0.6; });

  DomainBundle b;
  b.name = "toy";
  b.domain = d;
  b.gen_problem = [](std::uint64_t seed, int) {
    ProblemInstance p;
    p.domain = "toy";
    p.seed = seed;
    p.arrivals = {{0.0, {TaskInstance{"t", {}, TaskOrigin::Root}}}};
    return p;
  };
  return b;
}

/// Toy plus a wrapping task whose method refines into t and then runs
/// the safe action; exercises nested refinement in the oracle and
/// planner.
inline DomainBundle build_toy2() {
  DomainBundle b = build_toy();
  b.name = "toy2";
  b.domain->declare_task(TaskDecl{"t2", {}});
  MethodTemplate mC;
  mC.name = "mC";
  mC.task = "t2";
  mC.body = ir::seq({ir::sub("t", {}), ir::act("a2", {})});
  b.domain->declare_method(std::move(mC));
  b.gen_problem = [](std::uint64_t seed, int) {
    ProblemInstance p;
    p.domain = "toy2";
    p.seed = seed;
    p.arrivals = {{0.0, {TaskInstance{"t2", {}, TaskOrigin::Root}}}};
    return p;
  };
  return b;
}

}  // namespace rae::domains
