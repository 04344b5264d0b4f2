#include <doctest.h>

#include "rae/domains/toy.hpp"
#include "rae/platform.hpp"

using namespace rae;

namespace {
rae::domains::DomainBundle toy() { return rae::domains::build_toy(); }
}  // namespace

TEST_CASE("trigger queues and poll reports running until due") {
  auto b = toy();
  Platform p(*b.domain, 1);
  auto id = p.trigger("a1", {}, 1);
  CHECK(p.poll(id).status == ExecStatus::Running);
  p.advance(0.5);
  CHECK(p.poll(id).status == ExecStatus::Running);  // duration 1
  p.advance(0.5);
  auto r = p.poll(id);
  CHECK(r.status != ExecStatus::Running);
  CHECK(r.cost == 1.0);
}

TEST_CASE("toy a2 completes deterministically with cost 2") {
  auto b = toy();
  Platform p(*b.domain, 1);
  auto id = p.trigger("a2", {}, 7);
  p.advance(2.0);
  auto r = p.poll(id);
  CHECK(r.status == ExecStatus::Done);
  CHECK(r.cost == 2.0);
  CHECK(p.accrued(7) == 2.0);
}

TEST_CASE("unknown action and bad arity are rejected") {
  auto b = toy();
  Platform p(*b.domain, 1);
  CHECK_THROWS_AS(p.trigger("warp", {}, 1), UnknownAction);
  CHECK_THROWS_AS(p.trigger("a1", {Value::integer(3)}, 1), UnknownAction);
  CHECK_THROWS_AS(p.poll(999), UnknownId);
}

TEST_CASE("failure branch frequency matches the declared distribution") {
  auto b = toy();
  Platform p(*b.domain, 99);
  int fails = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto id = p.trigger("a1", {}, 1);
    p.advance(1.0);
    if (p.poll(id).status == ExecStatus::Failed) ++fails;
  }
  double freq = static_cast<double>(fails) / n;
  CHECK(freq == doctest::Approx(0.2).epsilon(0.05));  // 0.2 +- 0.01
  CHECK(std::fabs(freq - 0.2) < 0.01);
}

TEST_CASE("sample draws from the same model and never touches the platform") {
  auto b = toy();
  Platform p(*b.domain, 5);
  RngStream rng(42, "rollout");

  SUBCASE("a2 is deterministic") {
    State s = b.domain->make_state();
    for (int i = 0; i < 10; ++i) {
      SampleResult r = sample_action(*b.domain, s, "a2", {}, rng);
      CHECK_FALSE(r.failed);
      CHECK(r.cost == 2.0);
    }
  }
  SUBCASE("a1 failure frequency about 0.2 over 1e5 draws") {
    State s = b.domain->make_state();
    int fails = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
      if (sample_action(*b.domain, s, "a1", {}, rng).failed) ++fails;
    CHECK(std::fabs(fails / static_cast<double>(n) - 0.2) < 0.01);
  }
  SUBCASE("sampling leaves clock and accruals untouched") {
    State s = b.domain->make_state();
    double t0 = p.now();
    (void)sample_action(*b.domain, s, "a1", {}, rng);
    CHECK(p.now() == t0);
    CHECK(p.accrued(1) == 0.0);
  }
}

TEST_CASE("advance applies scheduled events once and reports tasks") {
  auto b = toy();
  ProblemInstance prob;
  prob.arrivals = {{0.0, {TaskInstance{"t", {}, TaskOrigin::Root}}}};
  ExogenousEvent ev;
  ev.time = 8.0;
  ev.tasks = {TaskInstance{"t", {}, TaskOrigin::Root}};
  prob.events = {ev};

  Platform q(*b.domain, prob, 3);
  AdvanceReport r0 = q.advance(0);
  CHECK(r0.arrived_tasks.size() == 1);
  CHECK(r0.events_applied == 0);

  AdvanceReport r1 = q.advance(8.0);
  CHECK(r1.events_applied == 1);
  CHECK(r1.arrived_tasks.size() == 1);

  AdvanceReport r2 = q.advance(1.0);
  CHECK(r2.events_applied == 0);
  CHECK(r2.arrived_tasks.empty());
}

TEST_CASE("advance(0) reports nothing new on an idle platform") {
  auto b = toy();
  Platform p(*b.domain, 1);
  AdvanceReport r = p.advance(0);
  CHECK(r.due_actions.empty());
  CHECK(r.arrived_tasks.empty());
}

TEST_CASE("simultaneous completions are reported in ascending id order") {
  auto b = toy();
  Platform p(*b.domain, 1);
  auto id1 = p.trigger("a1", {}, 1);
  auto id2 = p.trigger("a1", {}, 1);
  AdvanceReport r = p.advance(1.0);
  REQUIRE(r.due_actions.size() == 2);
  CHECK(r.due_actions[0] == id1);
  CHECK(r.due_actions[1] == id2);
}

TEST_CASE("fixed seed and call sequence reproduce the trace bit for bit") {
  auto run = []() {
    auto b = toy();
    Platform p(*b.domain, 77);
    for (int i = 0; i < 50; ++i) {
      auto id = p.trigger(i % 2 ? "a1" : "a2", {}, 1);
      p.advance(2.0);
      p.poll(id);
    }
    return p.trace();
  };
  CHECK(run() == run());
}

TEST_CASE("sense reads hidden truth through registered channels") {
  auto b = toy();
  b.domain->declare_sense_channel("realStatus");
  Platform p(*b.domain, 1);
  p.env().set("realStatus", {Value::symbol("p2")}, Value::symbol("injured"));

  CHECK(p.sense("realStatus", {Value::symbol("p2")}) == Value::symbol("injured"));
  // Unscheduled person reads unknown; repeated reads are pure.
  CHECK(p.sense("realStatus", {Value::symbol("p9")}).is_unknown());
  CHECK(p.sense("realStatus", {Value::symbol("p2")}) == Value::symbol("injured"));
  CHECK_THROWS_AS(p.sense("nope", {}), UnknownChannel);
}
