#pragma once

#include <memory>
#include <vector>

#include "rae/domains/bundle.hpp"

namespace rae::domains {

namespace fetch_detail {

constexpr std::int64_t kCells = 7;      // positions 0..6, charger at 0
constexpr std::int64_t kFullCharge = 12;

inline std::vector<Value> cells() {
  std::vector<Value> out;
  for (std::int64_t i = 0; i < kCells; ++i) out.push_back(Value::integer(i));
  return out;
}

inline std::int64_t cell_of(const Value& v) { return v.as_int(); }

inline bool searched(const State& s, std::int64_t cell) {
  return s.read("searched", {Value::integer(cell)}) == Value::symbol("yes");
}

/// Nearest / farthest cell not yet searched, relative to the robot.
inline Value pick_unsearched(const EvalCtx& c, bool nearest) {
  std::int64_t here = cell_of(c.state.read("loc", {c.lookup("r")}));
  std::int64_t best = -1;
  std::int64_t best_key = nearest ? 1000 : -1;
  for (std::int64_t i = 1; i < kCells; ++i) {
    if (searched(c.state, i)) continue;
    std::int64_t key = std::llabs(i - here);
    if (nearest ? key < best_key : i > best_key) {
      best_key = nearest ? key : i;
      best = i;
    }
  }
  return best < 0 ? Value::unknown() : Value::integer(best);
}

}  // namespace fetch_detail

/// Rechargeable robots hunt for objects whose positions are unknown
/// until sensed on the spot. Straying too far on a low battery strands
/// the robot: a dead end no retry can fix.
inline DomainBundle build_fetch() {
  using namespace fetch_detail;
  auto d = std::make_shared<Domain>();

  const std::vector<Value> robots = {Value::symbol("f1"), Value::symbol("f2")};
  const std::vector<Value> objects = {Value::symbol("o1"), Value::symbol("o2")};

  d->declare_sort("robot", robots);
  d->declare_sort("object", objects);
  d->declare_sort("cell", cells());

  d->declare_var("loc", {"robot"}, RangeSpec::finite(cells()));
  {
    std::vector<Value> charge;
    for (std::int64_t i = 0; i <= kFullCharge; ++i) charge.push_back(Value::integer(i));
    d->declare_var("charge", {"robot"}, RangeSpec::finite(std::move(charge)));
  }
  {
    std::vector<Value> hold = objects;
    hold.push_back(Value::symbol("none"));
    d->declare_var("holding", {"robot"}, RangeSpec::finite(std::move(hold)));
  }
  {
    std::vector<Value> ol = cells();
    ol.push_back(Value::unknown());
    d->declare_var("objLoc", {"object"}, RangeSpec::finite(std::move(ol)));
  }
  d->declare_var("searched", {"cell"},
                 RangeSpec::finite({Value::symbol("yes"), Value::symbol("no")}));
  d->declare_var("delivered", {"object"},
                 RangeSpec::finite({Value::symbol("yes"), Value::symbol("no")}));

  d->set_sense_model("realObjLoc", [](const State& s, const Args& a, RngStream& rng) {
    Value known = s.read("objLoc", a);
    if (!known.is_unknown()) return known;
    // Uniform belief over the unsearched cells.
    std::vector<std::int64_t> open;
    for (std::int64_t i = 1; i < kCells; ++i)
      if (!searched(s, i)) open.push_back(i);
    if (open.empty()) return Value::unknown();
    return Value::integer(open[rng.uniform_index(open.size())]);
  });

  // --- actions ---------------------------------------------------------

  {
    // One hop of any length; cost and charge drain scale with distance.
    ActionSpec a;
    a.name = "move";
    a.params = {"r", "from", "to"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      if (s.read("loc", {args[0]}) != args[1]) return false;
      std::int64_t dist = std::llabs(cell_of(args[2]) - cell_of(args[1]));
      Value charge = s.read("charge", {args[0]});
      return dist > 0 && !charge.is_unknown() && charge.as_int() >= dist;
    };
    auto cost = [](const State&, const Args& args) {
      return static_cast<double>(std::llabs(cell_of(args[2]) - cell_of(args[1])));
    };
    ActionOutcome ok;
    ok.prob = 0.95;
    ok.cost = cost;
    ok.effect = [](EffectCtx& ctx) {
      std::int64_t dist = std::llabs(cell_of(ctx.args[2]) - cell_of(ctx.args[1]));
      std::int64_t charge = ctx.state.read("charge", {ctx.args[0]}).as_int();
      ctx.state.write("loc", {ctx.args[0]}, ctx.args[2]);
      ctx.state.write("charge", {ctx.args[0]}, Value::integer(charge - dist));
    };
    ActionOutcome slip;  // wheels spin, charge burned in place
    slip.prob = 0.05;
    slip.is_failure = true;
    slip.cost = cost;
    a.outcomes = {std::move(ok), std::move(slip)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "search";
    a.params = {"r", "cell"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("loc", {args[0]}) == args[1];
    };
    ActionOutcome ok;
    ok.effect = [objects](EffectCtx& ctx) {
      // Sense before marking the cell searched: the belief model draws
      // over cells not yet searched, which must include this one.
      for (const Value& o : objects) {
        Value truth = ctx.sensor.sense("realObjLoc", {o});
        if (truth == ctx.args[1]) ctx.state.write("objLoc", {o}, truth);
      }
      ctx.state.write("searched", {ctx.args[1]}, Value::symbol("yes"));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "pickup";
    a.params = {"r", "o"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      Value ol = s.read("objLoc", {args[1]});
      return !ol.is_unknown() && s.read("loc", {args[0]}) == ol &&
             s.read("holding", {args[0]}) == Value::symbol("none");
    };
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("holding", {ctx.args[0]}, ctx.args[1]);
      ctx.state.write("objLoc", {ctx.args[1]}, Value::unknown());
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "deliver";
    a.params = {"r", "o"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("holding", {args[0]}) == args[1] &&
             s.read("loc", {args[0]}) == Value::integer(0);
    };
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("holding", {ctx.args[0]}, Value::symbol("none"));
      ctx.state.write("delivered", {ctx.args[1]}, Value::symbol("yes"));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "recharge";
    a.params = {"r"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("loc", {args[0]}) == Value::integer(0);
    };
    ActionOutcome ok;
    ok.cost = constant_cost(2.0);
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("charge", {ctx.args[0]}, Value::integer(kFullCharge));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "observe";
    a.params = {"r", "cell"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("loc", {args[0]}) == args[1];
    };
    ActionOutcome ok;
    a.outcomes = {std::move(ok)};
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

  // --- tasks and methods -------------------------------------------------

  d->declare_task(TaskDecl{"fetch", {"r", "o"}});
  d->declare_task(TaskDecl{"emergency", {"r", "cell"}});

  auto move_to = [](Expr target) {
    return ir::act("move", {ex::param("r"), ex::var("loc", {ex::param("r")}), std::move(target)});
  };
  Test object_unlocated = ts::eq(ex::var("objLoc", {ex::param("o")}), ex::unknown());
  Test cells_left = ts::host([](const EvalCtx& c) {
    for (std::int64_t i = 1; i < kCells; ++i)
      if (!searched(c.state, i)) return true;
    return false;
  });
  auto go_get_and_deliver = ir::seq(
      {ir::if_(ts::ne(ex::var("loc", {ex::param("r")}), ex::var("objLoc", {ex::param("o")})),
               ir::seq({move_to(ex::var("objLoc", {ex::param("o")}))})),
       ir::act("pickup", {ex::param("r"), ex::param("o")}),
       ir::if_(ts::ne(ex::var("loc", {ex::param("r")}), ex::num(0)),
               ir::seq({move_to(ex::num(0))})),
       ir::act("deliver", {ex::param("r"), ex::param("o")})});

  {
    // Sweep from the far end inward, never recharging. Fast when it
    // works; strands the robot when the battery runs dry off-base.
    MethodTemplate m;
    m.name = "Fetch_Bold";
    m.task = "fetch";
    m.role_params = {"r", "o"};
    m.body = ir::seq(
        {ir::while_(ts::and_(object_unlocated, cells_left),
                    ir::seq({ir::assign_local("nxt",
                                              ex::host([](const EvalCtx& c) {
                                                return fetch_detail::pick_unsearched(c, false);
                                              })),
                             move_to(ex::param("nxt")),
                             ir::act("search", {ex::param("r"), ex::param("nxt")})}),
                    static_cast<int>(kCells) + 2),
         ir::if_(object_unlocated, ir::act("fail", {}), go_get_and_deliver)});
    d->declare_method(std::move(m));
  }
  {
    // Top up first, sweep nearest-first, and fall back to the charger
    // whenever the reserve would not cover the trip home.
    MethodTemplate m;
    m.name = "Fetch_Careful";
    m.task = "fetch";
    m.role_params = {"r", "o"};
    Test reserve_low = ts::host([](const EvalCtx& c) {
      std::int64_t here = fetch_detail::cell_of(c.state.read("loc", {c.lookup("r")}));
      Value nxt = c.lookup("nxt");
      if (nxt.is_unknown()) return false;
      std::int64_t hop = std::llabs(fetch_detail::cell_of(nxt) - here);
      std::int64_t home = fetch_detail::cell_of(nxt);
      return c.state.read("charge", {c.lookup("r")}).as_int() < hop + home + 1;
    });
    m.body = ir::seq(
        {ir::if_(ts::ne(ex::var("loc", {ex::param("r")}), ex::num(0)),
                 ir::seq({move_to(ex::num(0))})),
         ir::act("recharge", {ex::param("r")}),
         ir::while_(ts::and_(object_unlocated, cells_left),
                    ir::seq({ir::assign_local("nxt",
                                              ex::host([](const EvalCtx& c) {
                                                return fetch_detail::pick_unsearched(c, true);
                                              })),
                             ir::if_(reserve_low,
                                     ir::seq({move_to(ex::num(0)),
                                              ir::act("recharge", {ex::param("r")})}),
                                     ir::seq({move_to(ex::param("nxt")),
                                              ir::act("search",
                                                      {ex::param("r"), ex::param("nxt")})}))}),
                    static_cast<int>(kCells) * 3),
         ir::if_(object_unlocated, ir::act("fail", {}),
                 ir::seq({ir::if_(ts::host([](const EvalCtx& c) {
                                    std::int64_t here = fetch_detail::cell_of(
                                        c.state.read("loc", {c.lookup("r")}));
                                    std::int64_t obj = fetch_detail::cell_of(
                                        c.state.read("objLoc", {c.lookup("o")}));
                                    std::int64_t charge =
                                        c.state.read("charge", {c.lookup("r")}).as_int();
                                    return charge < std::llabs(obj - here) + obj;
                                  }),
                                  ir::seq({move_to(ex::num(0)),
                                           ir::act("recharge", {ex::param("r")})})),
                          go_get_and_deliver}))});
    d->declare_method(std::move(m));
  }
  {
    MethodTemplate m;
    m.name = "Emergency_M1";
    m.task = "emergency";
    m.role_params = {"r", "cell"};
    m.body = ir::seq(
        {ir::if_(ts::ne(ex::var("loc", {ex::param("r")}), ex::param("cell")),
                 ir::seq({ir::act("move", {ex::param("r"), ex::var("loc", {ex::param("r")}),
                                           ex::param("cell")})})),
         ir::act("observe", {ex::param("r"), ex::param("cell")})});
    d->declare_method(std::move(m));
  }

  d->set_domain_heuristic([](const TaskInstance&, const MethodInstance&, const State&,
                             UtilityKind kind) {
    return kind == UtilityKind::SuccessRatio ? 0.7 : 1.0 / 15.0;
  });

  DomainBundle b;
  b.name = "fetch";
  b.domain = d;
  b.gen_problem = [](std::uint64_t seed, int difficulty) {
    RngStream rng(seed, "fetch-problem");
    ProblemInstance p;
    p.domain = "fetch";
    p.seed = seed;
    auto sym = [](const char* s) { return Value::symbol(s); };

    for (const char* r : {"f1", "f2"}) {
      p.initial_state.push_back(CellWrite{"loc", {sym(r)}, Value::integer(0)});
      p.initial_state.push_back(
          CellWrite{"charge", {sym(r)}, Value::integer(7 + static_cast<std::int64_t>(rng.uniform_index(3)))});
      p.initial_state.push_back(CellWrite{"holding", {sym(r)}, sym("none")});
    }
    for (const char* o : {"o1", "o2"}) {
      p.initial_state.push_back(CellWrite{"delivered", {sym(o)}, sym("no")});
      p.environment.push_back(CellWrite{
          "realObjLoc", {sym(o)},
          Value::integer(1 + static_cast<std::int64_t>(rng.uniform_index(kCells - 1)))});
    }
    for (std::int64_t i = 0; i < kCells; ++i)
      p.initial_state.push_back(CellWrite{"searched", {Value::integer(i)}, sym("no")});

    std::size_t n_tasks = 1 + rng.uniform_index(2);
    const char* robots[] = {"f1", "f2"};
    const char* objects[] = {"o1", "o2"};
    double t = 0;
    for (std::size_t i = 0; i < n_tasks; ++i) {
      t += rng.uniform(0.0, 6.0);
      p.arrivals.push_back(
          {t,
           {TaskInstance{"fetch", {sym(robots[i % 2]), sym(objects[i])}, TaskOrigin::Root}}});
    }
    for (int i = 0; i < difficulty; ++i) {
      ExogenousEvent ev;
      ev.time = rng.uniform(2.0, 15.0);
      ev.tasks.push_back(TaskInstance{
          "emergency",
          {sym(robots[rng.uniform_index(2)]),
           Value::integer(1 + static_cast<std::int64_t>(rng.uniform_index(kCells - 1)))},
          TaskOrigin::Root});
      p.events.push_back(std::move(ev));
    }
    return p;
  };
  return b;
}

}  // namespace rae::domains
