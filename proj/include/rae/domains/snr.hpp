#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rae/domains/bundle.hpp"

namespace rae::domains {

inline ProblemInstance snr_gen_problem(std::uint64_t seed, int difficulty);

// ---------------------------------------------------------------------------
// Path-length formulas used by the search-and-rescue movement methods.

inline double sr_distance_euclidean(const Value& l0, const Value& l1) {
  double x0 = l0.as_tuple()[0].as_number(), y0 = l0.as_tuple()[1].as_number();
  double x1 = l1.as_tuple()[0].as_number(), y1 = l1.as_tuple()[1].as_number();
  return std::sqrt((x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0));
}

inline double sr_distance_manhattan(const Value& l0, const Value& l1) {
  double x0 = l0.as_tuple()[0].as_number(), y0 = l0.as_tuple()[1].as_number();
  double x1 = l1.as_tuple()[0].as_number(), y1 = l1.as_tuple()[1].as_number();
  return std::fabs(x1 - x0) + std::fabs(y1 - y0);
}

inline double sr_distance_curved(const Value& l0, const Value& l1) {
  // Half circumference of the circle whose diameter joins the endpoints.
  double diameter = sr_distance_euclidean(l0, l1);
  return M_PI * diameter / 2.0;
}

enum class SrPathKind { Euclidean, Manhattan, Curved };

inline double sr_distance(SrPathKind kind, const Value& l0, const Value& l1) {
  switch (kind) {
    case SrPathKind::Euclidean: return sr_distance_euclidean(l0, l1);
    case SrPathKind::Manhattan: return sr_distance_manhattan(l0, l1);
    case SrPathKind::Curved: return sr_distance_curved(l0, l1);
  }
  return 0;
}

namespace snr_detail {

inline const std::vector<Value>& locations() {
  static const std::vector<Value> locs = {
      Value::point(1, 1),   Value::point(15, 15), Value::point(29, 29), Value::point(28, 30),
      Value::point(10, 30), Value::point(9, 19),  Value::point(4, 5),   Value::point(5, 25),
      Value::point(20, 10), Value::point(25, 5),  Value::point(12, 18), Value::point(3, 30)};
  return locs;
}

inline const std::vector<Value>& obstacle_points() {
  static const std::vector<Value> pts = {Value::point(100, 100), Value::point(20, 20),
                                         Value::point(12, 12), Value::point(8, 22),
                                         Value::point(22, 8)};
  return pts;
}

inline std::vector<Value> symbols(std::initializer_list<const char*> names) {
  std::vector<Value> out;
  for (const char* n : names) out.push_back(Value::symbol(n));
  return out;
}

// Obstacle tests mirror the per-path checks of the movement commands.
inline bool euclid_blocked(const Value& o, double x1, double y1, double x2, double y2) {
  double ox = o.as_tuple()[0].as_number(), oy = o.as_tuple()[1].as_number();
  double xlow = std::min(x1, x2), xhigh = std::max(x1, x2);
  double ylow = std::min(y1, y2), yhigh = std::max(y1, y2);
  if (ox < xlow || ox > xhigh || oy < ylow || oy > yhigh) return false;
  if (ox == x1 || x2 == x1) return true;
  return std::fabs((oy - y1) / (ox - x1) - (y2 - y1) / (x2 - x1)) <= 1e-4;
}

inline bool curved_blocked(const Value& o, double x1, double y1, double x2, double y2) {
  double ox = o.as_tuple()[0].as_number(), oy = o.as_tuple()[1].as_number();
  double cx = (x1 + x2) / 2, cy = (y1 + y2) / 2;
  double r2 = (x2 - cx) * (x2 - cx) + (y2 - cy) * (y2 - cy);
  double ro = (ox - cx) * (ox - cx) + (oy - cy) * (oy - cy);
  return std::fabs(r2 - ro) <= 1e-4;
}

inline bool manhattan_blocked(const Value& o, double x1, double y1, double x2, double y2) {
  double ox = o.as_tuple()[0].as_number(), oy = o.as_tuple()[1].as_number();
  double xlow = std::min(x1, x2), xhigh = std::max(x1, x2);
  double ylow = std::min(y1, y2), yhigh = std::max(y1, y2);
  if (std::fabs(oy - y1) <= 1e-4 && ox >= xlow && ox <= xhigh) return true;
  if (std::fabs(ox - x2) <= 1e-4 && oy >= ylow && oy <= yhigh) return true;
  return false;
}

template <typename Blocked>
bool path_clear(const State& s, const Value& l1, const Value& l2, Blocked blocked) {
  double x1 = l1.as_tuple()[0].as_number(), y1 = l1.as_tuple()[1].as_number();
  double x2 = l2.as_tuple()[0].as_number(), y2 = l2.as_tuple()[1].as_number();
  for (const Value& o : obstacle_points()) {
    if (s.read("obstacleAt", {o}) != Value::symbol("yes")) continue;
    if (blocked(o, x1, y1, x2, y2)) return false;
  }
  return true;
}

inline GuardFn move_guard(SrPathKind kind) {
  return [kind](const State& s, const Args& a, const RigidRelations&) {
    const Value& r = a[0];
    const Value& l1 = a[1];
    const Value& l2 = a[2];
    if (l1 == l2) return true;
    if (s.read("loc", {r}) != l1) return false;
    switch (kind) {
      case SrPathKind::Euclidean: return path_clear(s, l1, l2, euclid_blocked);
      case SrPathKind::Curved: return path_clear(s, l1, l2, curved_blocked);
      case SrPathKind::Manhattan: return path_clear(s, l1, l2, manhattan_blocked);
    }
    return false;
  };
}

// Movement outcome probability: the success rates of the motion commands
// are not part of the source material; 0.9 is this port's default and is
// recorded in problem files generated by the CLI.
constexpr double kMoveSuccess = 0.9;

inline ActionSpec move_command(const std::string& name, SrPathKind kind) {
  ActionSpec spec;
  spec.name = name;
  spec.params = {"r", "l1", "l2", "dist"};
  spec.guard = move_guard(kind);
  ActionOutcome ok;
  ok.prob = kMoveSuccess;
  ok.cost = [](const State&, const Args& a) { return std::max(a[3].as_number(), 0.1); };
  ok.duration = 1.0;
  ok.effect = [](EffectCtx& ctx) { ctx.state.write("loc", {ctx.args[0]}, ctx.args[2]); };
  ActionOutcome bad;
  bad.prob = 1.0 - kMoveSuccess;
  bad.is_failure = true;
  bad.cost = [](const State&, const Args& a) { return std::max(a[3].as_number(), 0.1); };
  bad.duration = 1.0;
  spec.outcomes = {std::move(ok), std::move(bad)};
  return spec;
}

inline Value none() { return Value::symbol("none"); }

inline bool person_unsaved(const Value& status) {
  return status == Value::symbol("injured") || status == Value::symbol("dead");
}

}  // namespace snr_detail

/// Search-and-rescue: UAVs survey locations for people in need, UGVs
/// fetch supplies and rescue them. Fourteen commands, seven tasks,
/// sixteen refinement methods.
inline DomainBundle build_snr() {
  using namespace snr_detail;
  auto d = std::make_shared<Domain>();

  const std::vector<Value> ugvs = symbols({"w1", "w2"});
  const std::vector<Value> uavs = symbols({"a1", "a2"});
  const std::vector<Value> robots = symbols({"w1", "w2", "a1", "a2"});
  const std::vector<Value> persons = symbols({"p1", "p2", "p3"});

  std::vector<Value> locatable = robots;
  locatable.insert(locatable.end(), persons.begin(), persons.end());
  std::vector<Value> statusable = locatable;
  for (const Value& l : locations()) statusable.push_back(l);

  d->declare_sort("ugv", ugvs);
  d->declare_sort("uav", uavs);
  d->declare_sort("robot", robots);
  d->declare_sort("person", persons);
  d->declare_sort("locatable", locatable);
  d->declare_sort("statusable", statusable);
  d->declare_sort("location", locations());
  d->declare_sort("obstaclePoint", obstacle_points());
  d->declare_sort("camera", symbols({"frontCamera", "bottomCamera"}));
  d->declare_sort("slot", {Value::integer(1)});

  d->declare_rigid("wheeledRobots", {{Value::symbol("w1")}, {Value::symbol("w2")}});
  d->declare_rigid("drones", {{Value::symbol("a1")}, {Value::symbol("a2")}});

  {
    // Persons absent from a problem have no location; unknown is part
    // of the declared range.
    std::vector<Value> locs = locations();
    locs.push_back(Value::unknown());
    d->declare_var("loc", {"locatable"}, RangeSpec::finite(std::move(locs)));
  }
  {
    std::vector<Value> meds;
    for (int i = 0; i <= 9; ++i) meds.push_back(Value::integer(i));
    d->declare_var("hasMedicine", {"robot"}, RangeSpec::finite(meds));
  }
  d->declare_var("robotType", {"robot"}, RangeSpec::finite(symbols({"wheeled", "uav"})));
  {
    std::vector<Value> st = symbols({"free", "busy", "injured", "OK", "dead", "clear", "hasDebri"});
    st.push_back(Value::unknown());
    d->declare_var("status", {"statusable"}, RangeSpec::finite(std::move(st)));
  }
  d->declare_var("altitude", {"uav"}, RangeSpec::finite(symbols({"high", "low"})));
  {
    std::vector<Value> imgs = {none()};
    std::vector<Value> people_or_none = persons;
    people_or_none.push_back(none());
    for (const Value& l : locations())
      for (const Value& p : people_or_none) imgs.push_back(Value::tuple({l, p}));
    d->declare_var("currentImage", {"uav"}, RangeSpec::finite(std::move(imgs)));
  }
  {
    std::vector<Value> nr = ugvs;
    nr.push_back(none());
    d->declare_var("newRobot", {"slot"}, RangeSpec::finite(std::move(nr)));
  }
  {
    std::vector<Value> flags = symbols({"yes", "no"});
    flags.push_back(Value::unknown());
    d->declare_var("obstacleAt", {"obstaclePoint"}, RangeSpec::finite(std::move(flags)));
  }

  // --- sensing channels and their planning-side belief models ---------

  // Belief priors for planning rollouts (not part of the source
  // material; roughly matched to the problem generator's rates).
  constexpr double kInjuredPrior = 0.7;
  constexpr double kDebrisPrior = 0.35;

  d->set_sense_model("realStatus", [kInjuredPrior, kDebrisPrior](const State& s, const Args& a,
                                                                 RngStream& rng) {
    Value known = s.read("status", a);
    if (!known.is_unknown()) return known;
    if (a[0].is_tuple())  // a location: debris or clear
      return rng.bernoulli(kDebrisPrior) ? Value::symbol("hasDebri") : Value::symbol("clear");
    return rng.bernoulli(kInjuredPrior) ? Value::symbol("injured") : Value::symbol("OK");
  });
  d->set_sense_model("realPerson", [persons](const State& s, const Args& a, RngStream&) {
    for (const Value& p : persons)
      if (s.read("loc", {p}) == a[0]) return p;
    return Value::unknown();
  });
  d->declare_sense_channel("weather");

  // --- the fourteen commands -------------------------------------------

  d->declare_action(move_command("moveEuclidean", SrPathKind::Euclidean));
  d->declare_action(move_command("moveCurved", SrPathKind::Curved));
  d->declare_action(move_command("moveManhattan", SrPathKind::Manhattan));

  {
    ActionSpec fly;
    fly.name = "fly";
    fly.params = {"r", "l1", "l2"};
    fly.guard = [](const State& s, const Args& a, const RigidRelations&) {
      return a[1] == a[2] || s.read("loc", {a[0]}) == a[1];
    };
    auto fly_cost = [](const State&, const Args& a) {
      return std::max(sr_distance_euclidean(a[1], a[2]), 0.1);
    };
    ActionOutcome ok;
    ok.prob = kMoveSuccess;
    ok.cost = fly_cost;
    ok.effect = [](EffectCtx& ctx) { ctx.state.write("loc", {ctx.args[0]}, ctx.args[2]); };
    ActionOutcome bad;
    bad.prob = 1.0 - kMoveSuccess;
    bad.is_failure = true;
    bad.cost = fly_cost;
    fly.outcomes = {std::move(ok), std::move(bad)};
    d->declare_action(std::move(fly));
  }
  {
    ActionSpec a;
    a.name = "giveSupportToPerson";
    a.params = {"r", "p"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("status", {args[1]}) != Value::symbol("dead");
    };
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("status", {ctx.args[1]}, Value::symbol("OK"));
      ctx.sensor.set_truth("realStatus", {ctx.args[1]}, Value::symbol("OK"));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "clearLocation";
    a.params = {"r", "l"};
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("status", {ctx.args[1]}, Value::symbol("clear"));
      ctx.sensor.set_truth("realStatus", {ctx.args[1]}, Value::symbol("clear"));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "inspectLocation";
    a.params = {"r", "l"};
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("status", {ctx.args[1]}, ctx.sensor.sense("realStatus", {ctx.args[1]}));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "inspectPerson";
    a.params = {"r", "p"};
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("status", {ctx.args[1]}, ctx.sensor.sense("realStatus", {ctx.args[1]}));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "transfer";
    a.params = {"r1", "r2"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      if (s.read("loc", {args[0]}) != s.read("loc", {args[1]})) return false;
      Value meds = s.read("hasMedicine", {args[0]});
      return !meds.is_unknown() && meds.as_int() > 0;
    };
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      std::int64_t m1 = ctx.state.read("hasMedicine", {ctx.args[0]}).as_int();
      std::int64_t m2 = ctx.state.read("hasMedicine", {ctx.args[1]}).as_int();
      ctx.state.write("hasMedicine", {ctx.args[0]}, Value::integer(m1 - 1));
      ctx.state.write("hasMedicine", {ctx.args[1]}, Value::integer(std::min<std::int64_t>(m2 + 1, 9)));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "replenishSupplies";
    a.params = {"r"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("loc", {args[0]}) == Value::point(1, 1);
    };
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("hasMedicine", {ctx.args[0]}, Value::integer(5));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "captureImage";
    a.params = {"r", "camera", "l"};
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      Value person = ctx.sensor.sense("realPerson", {ctx.args[2]});
      if (person.is_unknown()) person = none();
      ctx.state.write("currentImage", {ctx.args[0]}, Value::tuple({ctx.args[2], person}));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "changeAltitude";
    a.params = {"r", "newAltitude"};
    ActionOutcome ok;
    ok.prob = kMoveSuccess;
    ok.effect = [](EffectCtx& ctx) { ctx.state.write("altitude", {ctx.args[0]}, ctx.args[1]); };
    ActionOutcome bad;
    bad.prob = 1.0 - kMoveSuccess;
    bad.is_failure = true;
    a.outcomes = {std::move(ok), std::move(bad)};
    d->declare_action(std::move(a));
  }
  {
    // Rescue-completion check: reaches a dead end when the location
    // still holds an unsaved person or debris. An injured person left
    // behind at a doomed check may die, after which no retrial can
    // accomplish the rescue.
    ActionSpec a;
    a.name = "deadEnd";
    a.params = {"l"};
    ActionOutcome pass;
    pass.duration = 0.0;
    ActionOutcome doom;
    doom.prob = 0.0;
    doom.is_failure = true;
    doom.duration = 0.0;
    ActionOutcome fatal;
    fatal.prob = 0.0;
    fatal.is_failure = true;
    fatal.duration = 0.0;
    fatal.effect = [](EffectCtx& ctx) {
      Value p = ctx.sensor.sense("realPerson", {ctx.args[0]});
      if (!p.is_unknown() && p != none() &&
          ctx.sensor.sense("realStatus", {p}) == Value::symbol("injured"))
        ctx.sensor.set_truth("realStatus", {p}, Value::symbol("dead"));
    };
    a.outcomes = {std::move(pass), std::move(doom), std::move(fatal)};
    a.chooser = [](const State&, const Args& args, Sensor& sensor, RngStream& rng) {
      bool injured_here = false;
      Value p = sensor.sense("realPerson", {args[0]});
      if (!p.is_unknown() && p != none()) {
        Value st = sensor.sense("realStatus", {p});
        injured_here = st == Value::symbol("injured");
        if (person_unsaved(st)) return injured_here && rng.bernoulli(0.5) ? 2 : 1;
      }
      if (sensor.sense("realStatus", {args[0]}) == Value::symbol("hasDebri")) return 1;
      return 0;
    };
    a.plan_chooser = [persons, kInjuredPrior, kDebrisPrior](const State& s, const Args& args,
                                                           RngStream& rng) {
      for (const Value& p : persons) {
        if (s.read("loc", {p}) != args[0]) continue;
        Value st = s.read("status", {p});
        if (person_unsaved(st)) return 1;
        if (st.is_unknown() && rng.bernoulli(kInjuredPrior)) return 1;
      }
      Value lst = s.read("status", {args[0]});
      if (lst == Value::symbol("hasDebri")) return 1;
      if (lst.is_unknown() && rng.bernoulli(kDebrisPrior)) return 1;
      return 0;
    };
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "fail";
    a.params = {};
    ActionOutcome f;
    f.is_failure = true;
    f.duration = 0.0;
    a.outcomes = {std::move(f)};
    d->declare_action(std::move(a));
  }

  // --- tasks -------------------------------------------------------------

  d->declare_task(TaskDecl{"moveTo", {"r", "l"}});
  d->declare_task(TaskDecl{"rescue", {"r", "p"}});
  d->declare_task(TaskDecl{"helpPerson", {"r", "p"}});
  d->declare_task(TaskDecl{"getSupplies", {"r"}});
  d->declare_task(TaskDecl{"survey", {"r", "l"}});
  d->declare_task(TaskDecl{"getRobot", {}});
  d->declare_task(TaskDecl{"adjustAltitude", {"r"}});

  // --- methods, in declaration order used by reactive selection ----------

  auto type_is = [](const char* rp, const char* t) {
    return ts::eq(ex::var("robotType", {ex::param(rp)}), ex::sym(t));
  };

  // moveTo: UAV flight first, then curved, Manhattan, Euclidean paths.
  {
    MethodTemplate m;
    m.name = "MoveTo_Method4";
    m.task = "moveTo";
    m.role_params = {"r", "l"};
    m.precondition = type_is("r", "uav");
    m.body = ir::seq(
        {ir::assign_local("x", ex::var("loc", {ex::param("r")})),
         ir::if_(ts::eq(ex::param("x"), ex::param("l")), ir::seq({}),
                 ir::act("fly", {ex::param("r"), ex::param("x"), ex::param("l")}))});
    d->declare_method(std::move(m));
  }
  auto ugv_move = [&](const char* name, const char* command, SrPathKind kind) {
    MethodTemplate m;
    m.name = name;
    m.task = "moveTo";
    m.role_params = {"r", "l"};
    m.precondition = type_is("r", "wheeled");
    m.body = ir::seq(
        {ir::assign_local("x", ex::var("loc", {ex::param("r")})),
         ir::if_(ts::eq(ex::param("x"), ex::param("l")), ir::seq({}),
                 ir::seq({ir::assign_local("dist",
                                           ex::host([kind](const EvalCtx& c) {
                                             return Value::real(sr_distance(
                                                 kind, c.lookup("x"), c.lookup("l")));
                                           })),
                          ir::act(command, {ex::param("r"), ex::param("x"), ex::param("l"),
                                            ex::param("dist")})}))});
    d->declare_method(std::move(m));
  };
  ugv_move("MoveTo_Method3", "moveCurved", SrPathKind::Curved);
  ugv_move("MoveTo_Method2", "moveManhattan", SrPathKind::Manhattan);
  ugv_move("MoveTo_Method1", "moveEuclidean", SrPathKind::Euclidean);

  {
    MethodTemplate m;
    m.name = "Rescue_Method1";
    m.task = "rescue";
    m.role_params = {"r", "p"};
    m.precondition = ts::not_(type_is("r", "uav"));
    m.body = ir::seq(
        {ir::if_(ts::eq(ex::var("hasMedicine", {ex::param("r")}), ex::num(0)),
                 ir::sub("getSupplies", {ex::param("r")})),
         ir::sub("helpPerson", {ex::param("r"), ex::param("p")})});
    d->declare_method(std::move(m));
  }
  {
    MethodTemplate m;
    m.name = "Rescue_Method2";
    m.task = "rescue";
    m.role_params = {"r", "p"};
    m.body = ir::seq(
        {ir::if_(type_is("r", "uav"), ir::sub("getRobot", {})),
         ir::assign_local("r2", ex::var("newRobot", {ex::num(1)})),
         ir::if_(ts::ne(ex::param("r2"), ex::lit(none())),
                 ir::seq({ir::if_(ts::eq(ex::var("hasMedicine", {ex::param("r2")}), ex::num(0)),
                                  ir::sub("getSupplies", {ex::param("r2")})),
                          ir::sub("helpPerson", {ex::param("r2"), ex::param("p")}),
                          ir::assign("status", {ex::param("r2")}, ex::sym("free"))}),
                 ir::act("fail", {}))});
    d->declare_method(std::move(m));
  }

  {
    MethodTemplate m;
    m.name = "HelpPerson_Method2";
    m.task = "helpPerson";
    m.role_params = {"r", "p"};
    m.body = ir::seq(
        {ir::sub("moveTo", {ex::param("r"), ex::var("loc", {ex::param("p")})}),
         ir::act("inspectLocation", {ex::param("r"), ex::var("loc", {ex::param("r")})}),
         ir::if_(ts::eq(ex::var("status", {ex::var("loc", {ex::param("r")})}), ex::sym("hasDebri")),
                 ir::act("clearLocation", {ex::param("r"), ex::var("loc", {ex::param("r")})}),
                 ir::seq({ir::act("deadEnd", {ex::var("loc", {ex::param("p")})}),
                          ir::act("fail", {})}))});
    d->declare_method(std::move(m));
  }
  {
    MethodTemplate m;
    m.name = "HelpPerson_Method1";
    m.task = "helpPerson";
    m.role_params = {"r", "p"};
    m.body = ir::seq(
        {ir::sub("moveTo", {ex::param("r"), ex::var("loc", {ex::param("p")})}),
         ir::act("inspectPerson", {ex::param("r"), ex::param("p")}),
         ir::if_(ts::eq(ex::var("status", {ex::param("p")}), ex::sym("injured")),
                 ir::act("giveSupportToPerson", {ex::param("r"), ex::param("p")}),
                 ir::act("fail", {}))});
    d->declare_method(std::move(m));
  }

  {
    MethodTemplate m;
    m.name = "GetSupplies_Method2";
    m.task = "getSupplies";
    m.role_params = {"r"};
    m.precondition = type_is("r", "wheeled");
    m.body = ir::seq({ir::sub("moveTo", {ex::param("r"), ex::lit(Value::point(1, 1))}),
                      ir::act("replenishSupplies", {ex::param("r")})});
    d->declare_method(std::move(m));
  }
  {
    MethodTemplate m;
    m.name = "GetSupplies_Method1";
    m.task = "getSupplies";
    m.role_params = {"r"};
    m.precondition = type_is("r", "wheeled");
    // Nearest wheeled robot that still has medicine.
    m.body = ir::seq(
        {ir::assign_local("r2", ex::host([](const EvalCtx& c) {
           Value self = c.lookup("r");
           Value best = none();
           double best_dist = std::numeric_limits<double>::infinity();
           for (const Args& t : c.rigids().tuples("wheeledRobots")) {
             const Value& cand = t[0];
             if (cand == self) continue;
             Value meds = c.state.read("hasMedicine", {cand});
             if (meds.is_unknown() || meds.as_int() <= 0) continue;
             double dist = sr_distance_euclidean(c.state.read("loc", {self}),
                                                 c.state.read("loc", {cand}));
             if (dist < best_dist) {
               best_dist = dist;
               best = cand;
             }
           }
           return best;
         })),
         ir::if_(ts::ne(ex::param("r2"), ex::lit(none())),
                 ir::seq({ir::sub("moveTo", {ex::param("r"), ex::var("loc", {ex::param("r2")})}),
                          ir::act("transfer", {ex::param("r2"), ex::param("r")})}),
                 ir::act("fail", {}))});
    d->declare_method(std::move(m));
  }

  auto survey_method = [&](const char* name, const char* camera) {
    MethodTemplate m;
    m.name = name;
    m.task = "survey";
    m.role_params = {"r", "l"};
    m.precondition = type_is("r", "uav");
    m.body = ir::seq(
        {ir::sub("adjustAltitude", {ex::param("r")}),
         ir::act("captureImage", {ex::param("r"), ex::sym(camera), ex::param("l")}),
         ir::assign_local("img", ex::var("currentImage", {ex::param("r")})),
         ir::assign_local("person", ex::tuple_at(ex::param("img"), 1)),
         ir::if_(ts::ne(ex::param("person"), ex::lit(none())),
                 ir::sub("rescue", {ex::param("r"), ex::param("person")})),
         ir::act("deadEnd", {ex::param("l")})});
    d->declare_method(std::move(m));
  };
  survey_method("Survey_Method1", "frontCamera");
  survey_method("Survey_Method2", "bottomCamera");

  {
    MethodTemplate m;
    m.name = "GetRobot_Method1";
    m.task = "getRobot";
    // Free wheeled robot nearest to the base.
    m.body = ir::seq(
        {ir::assign_local("robot", ex::host([](const EvalCtx& c) {
           Value best = none();
           double best_dist = std::numeric_limits<double>::infinity();
           for (const Args& t : c.rigids().tuples("wheeledRobots")) {
             const Value& cand = t[0];
             if (c.state.read("status", {cand}) != Value::symbol("free")) continue;
             double dist =
                 sr_distance_euclidean(c.state.read("loc", {cand}), Value::point(1, 1));
             if (dist < best_dist) {
               best_dist = dist;
               best = cand;
             }
           }
           return best;
         })),
         ir::if_(ts::eq(ex::param("robot"), ex::lit(none())), ir::act("fail", {}),
                 ir::seq({ir::assign("status", {ex::param("robot")}, ex::sym("busy")),
                          ir::assign("newRobot", {ex::num(1)}, ex::param("robot"))}))});
    d->declare_method(std::move(m));
  }
  {
    MethodTemplate m;
    m.name = "GetRobot_Method2";
    m.task = "getRobot";
    m.body = ir::seq({ir::assign("newRobot", {ex::num(1)}, ex::sym("w1")),
                      ir::assign("status", {ex::sym("w1")}, ex::sym("busy"))});
    d->declare_method(std::move(m));
  }

  {
    MethodTemplate m;
    m.name = "AdjustAltitude_Method1";
    m.task = "adjustAltitude";
    m.role_params = {"r"};
    m.body = ir::seq({ir::if_(ts::eq(ex::var("altitude", {ex::param("r")}), ex::sym("high")),
                              ir::act("changeAltitude", {ex::param("r"), ex::sym("low")}))});
    d->declare_method(std::move(m));
  }
  {
    MethodTemplate m;
    m.name = "AdjustAltitude_Method2";
    m.task = "adjustAltitude";
    m.role_params = {"r"};
    m.body = ir::seq({ir::if_(ts::eq(ex::var("altitude", {ex::param("r")}), ex::sym("low")),
                              ir::act("changeAltitude", {ex::param("r"), ex::sym("high")}))});
    d->declare_method(std::move(m));
  }

  // Rough per-task utility guesses for the hand heuristic.
  d->set_domain_heuristic([](const TaskInstance& tau, const MethodInstance&, const State&,
                             UtilityKind kind) {
    if (kind == UtilityKind::SuccessRatio) return 0.7;
    if (tau.name == "moveTo") return 1.0 / 20.0;
    if (tau.name == "survey") return 1.0 / 50.0;
    if (tau.name == "rescue" || tau.name == "getSupplies") return 1.0 / 40.0;
    if (tau.name == "helpPerson") return 1.0 / 30.0;
    return 0.5;  // getRobot, adjustAltitude
  });

  DomainBundle b;
  b.name = "snr";
  b.domain = d;
  b.gen_problem = [](std::uint64_t seed, int difficulty) {
    return snr_gen_problem(seed, difficulty);
  };
  return b;
}

/// The fixed problem instance bundled with the domain (seed 0 of the
/// generator).
inline ProblemInstance snr_fixture_problem() {
  using snr_detail::none;
  ProblemInstance p;
  p.domain = "snr";
  p.seed = 0;
  // Port defaults, not measured data.
  p.parameters["move_success_prob"] = snr_detail::kMoveSuccess;

  auto sym = [](const char* s) { return Value::symbol(s); };
  auto w = [&p](const char* var, std::vector<Value> args, Value v) {
    p.initial_state.push_back(CellWrite{var, std::move(args), std::move(v)});
  };
  auto e = [&p](const char* ch, std::vector<Value> args, Value v) {
    p.environment.push_back(CellWrite{ch, std::move(args), std::move(v)});
  };

  w("loc", {sym("w1")}, Value::point(15, 15));
  w("loc", {sym("w2")}, Value::point(29, 29));
  w("loc", {sym("p1")}, Value::point(28, 30));
  w("loc", {sym("p2")}, Value::point(10, 30));
  w("loc", {sym("a1")}, Value::point(9, 19));
  w("loc", {sym("a2")}, Value::point(4, 5));
  for (const char* r : {"a1", "a2", "w1", "w2"}) w("hasMedicine", {sym(r)}, Value::integer(0));
  w("robotType", {sym("w1")}, sym("wheeled"));
  w("robotType", {sym("w2")}, sym("wheeled"));
  w("robotType", {sym("a1")}, sym("uav"));
  w("robotType", {sym("a2")}, sym("uav"));
  w("status", {sym("w1")}, sym("free"));
  w("status", {sym("w2")}, sym("free"));
  for (const char* x : {"a1", "a2", "p1", "p2"}) w("status", {sym(x)}, Value::unknown());
  for (auto [x, y] : {std::pair{28, 30}, {15, 15}, {10, 30}})
    w("status", {Value::point(x, y)}, Value::unknown());
  w("altitude", {sym("a1")}, sym("high"));
  w("altitude", {sym("a2")}, sym("low"));
  w("currentImage", {sym("a1")}, none());
  w("currentImage", {sym("a2")}, none());
  w("newRobot", {Value::integer(1)}, none());
  w("obstacleAt", {Value::point(100, 100)}, sym("yes"));

  for (const char* x : {"w1", "p1", "w2", "a1", "a2"}) e("realStatus", {sym(x)}, sym("OK"));
  e("realStatus", {sym("p2")}, sym("injured"));
  e("realStatus", {Value::point(28, 30)}, sym("hasDebri"));
  e("realStatus", {Value::point(15, 15)}, sym("clear"));
  e("realStatus", {Value::point(10, 30)}, sym("hasDebri"));
  e("realPerson", {Value::point(28, 30)}, sym("p1"));
  e("realPerson", {Value::point(15, 15)}, none());
  e("realPerson", {Value::point(10, 30)}, sym("p2"));
  e("weather", {Value::point(28, 30)}, sym("foggy"));
  e("weather", {Value::point(15, 15)}, sym("rainy"));
  e("weather", {Value::point(10, 30)}, sym("dustStorm"));

  p.arrivals = {
      {8.0,
       {TaskInstance{"survey", {sym("a1"), Value::point(15, 15)}, TaskOrigin::Root},
        TaskInstance{"survey", {sym("a2"), Value::point(28, 30)}, TaskOrigin::Root}}},
      {20.0, {TaskInstance{"survey", {sym("a1"), Value::point(10, 30)}, TaskOrigin::Root}}},
  };
  return p;
}

/// Random S&R problems: robots and persons at random locations, injured
/// people and debris drawn per person, one or two survey tasks, and
/// difficulty-scaled exogenous debris/weather events.
inline ProblemInstance snr_gen_problem(std::uint64_t seed, int difficulty) {
  using namespace snr_detail;
  if (seed == 0) return snr_fixture_problem();

  RngStream rng(seed, "snr-problem");
  ProblemInstance p;
  p.domain = "snr";
  p.seed = seed;
  p.parameters["move_success_prob"] = kMoveSuccess;

  auto sym = [](const char* s) { return Value::symbol(s); };
  auto w = [&p](const char* var, std::vector<Value> args, Value v) {
    p.initial_state.push_back(CellWrite{var, std::move(args), std::move(v)});
  };
  auto e = [&p](const char* ch, std::vector<Value> args, Value v) {
    p.environment.push_back(CellWrite{ch, std::move(args), std::move(v)});
  };

  const auto& locs = locations();
  auto rand_loc = [&]() { return locs[1 + rng.uniform_index(locs.size() - 1)]; };

  w("robotType", {sym("w1")}, sym("wheeled"));
  w("robotType", {sym("w2")}, sym("wheeled"));
  w("robotType", {sym("a1")}, sym("uav"));
  w("robotType", {sym("a2")}, sym("uav"));
  for (const char* r : {"w1", "w2", "a1", "a2"}) {
    w("loc", {sym(r)}, rand_loc());
    w("hasMedicine", {sym(r)}, Value::integer(0));
  }
  w("status", {sym("w1")}, sym("free"));
  w("status", {sym("w2")}, sym("free"));
  w("altitude", {sym("a1")}, rng.bernoulli(0.5) ? sym("high") : sym("low"));
  w("altitude", {sym("a2")}, rng.bernoulli(0.5) ? sym("high") : sym("low"));
  w("currentImage", {sym("a1")}, none());
  w("currentImage", {sym("a2")}, none());
  w("newRobot", {Value::integer(1)}, none());

  std::size_t n_persons = 1 + rng.uniform_index(3);
  std::vector<Value> person_locs;
  const char* person_names[] = {"p1", "p2", "p3"};
  for (std::size_t i = 0; i < n_persons; ++i) {
    Value pl = rand_loc();
    bool fresh = true;
    for (const auto& q : person_locs) fresh = fresh && !(q == pl);
    if (!fresh) continue;
    person_locs.push_back(pl);
    const char* name = person_names[i];
    w("loc", {sym(name)}, pl);
    bool injured = rng.bernoulli(0.75);
    e("realStatus", {sym(name)}, injured ? sym("injured") : sym("OK"));
    e("realPerson", {pl}, sym(name));
    bool debris = rng.bernoulli(0.35);
    e("realStatus", {pl}, debris ? sym("hasDebri") : sym("clear"));
    const char* weathers[] = {"clear", "foggy", "rainy", "dustStorm"};
    e("weather", {pl}, sym(weathers[rng.uniform_index(4)]));
  }
  if (rng.bernoulli(0.2)) {
    const auto& obs = obstacle_points();
    w("obstacleAt", {obs[1 + rng.uniform_index(obs.size() - 1)]}, sym("yes"));
  }

  // One or two root survey tasks at random arrival times.
  std::size_t n_tasks = std::min<std::size_t>(1 + rng.uniform_index(2), person_locs.size());
  double t = 0;
  for (std::size_t i = 0; i < n_tasks; ++i) {
    t += rng.uniform(0.0, 10.0);
    const char* uav = rng.bernoulli(0.5) ? "a1" : "a2";
    p.arrivals.push_back({t, {TaskInstance{"survey", {sym(uav), person_locs[i]}, TaskOrigin::Root}}});
  }

  for (int i = 0; i < difficulty; ++i) {
    ExogenousEvent ev;
    ev.time = rng.uniform(2.0, 30.0);
    Value l = rand_loc();
    if (rng.bernoulli(0.5)) {
      ev.env_writes.push_back(CellWrite{"realStatus", {l}, sym("hasDebri")});
    } else {
      const char* weathers[] = {"foggy", "rainy", "dustStorm"};
      ev.env_writes.push_back(CellWrite{"weather", {l}, sym(weathers[rng.uniform_index(3)])});
    }
    p.events.push_back(std::move(ev));
  }
  return p;
}

}  // namespace rae::domains
