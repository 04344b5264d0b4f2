#pragma once

#include <memory>
#include <vector>

#include "rae/domains/bundle.hpp"

namespace rae::domains {

namespace nav_detail {

inline std::vector<Value> syms(std::initializer_list<const char*> names) {
  std::vector<Value> out;
  for (const char* n : names) out.push_back(Value::symbol(n));
  return out;
}

// Rooms hang off a central hall; each room has one door.
inline Value door_of(const Value& room) {
  if (room == Value::symbol("left")) return Value::symbol("dLeft");
  if (room == Value::symbol("right")) return Value::symbol("dRight");
  if (room == Value::symbol("store")) return Value::symbol("dStore");
  return Value::unknown();
}

// Next hop and the door it passes through, from `from` toward `to`.
inline Value next_room(const Value& from, const Value& to) {
  if (from == to) return to;
  if (from == Value::symbol("hall")) return to;
  return Value::symbol("hall");
}

inline Value door_towards(const Value& from, const Value& to) {
  return from == Value::symbol("hall") ? door_of(to) : door_of(from);
}

}  // namespace nav_detail

/// Robots ferry objects between rooms; spring doors slam shut on a robot
/// whose hands are full, so a helper has to hold them. Door types are
/// unknown until sensed.
inline DomainBundle build_nav() {
  using namespace nav_detail;
  auto d = std::make_shared<Domain>();

  const std::vector<Value> rooms = syms({"hall", "left", "right", "store"});
  const std::vector<Value> doors = syms({"dLeft", "dRight", "dStore"});
  const std::vector<Value> robots = syms({"r1", "r2", "r3"});
  const std::vector<Value> objects = syms({"o1", "o2"});

  d->declare_sort("room", rooms);
  d->declare_sort("door", doors);
  d->declare_sort("robot", robots);
  d->declare_sort("object", objects);

  d->declare_var("loc", {"robot"}, RangeSpec::finite(rooms));
  d->declare_var("rloc", {"object"}, RangeSpec::finite(rooms));
  {
    std::vector<Value> carry = objects;
    carry.push_back(Value::symbol("none"));
    d->declare_var("carrying", {"robot"}, RangeSpec::finite(std::move(carry)));
  }
  {
    std::vector<Value> types = syms({"spring", "ordinary"});
    types.push_back(Value::unknown());
    d->declare_var("doorType", {"door"}, RangeSpec::finite(std::move(types)));
  }
  d->declare_var("doorState", {"door"}, RangeSpec::finite(syms({"closed", "open", "held"})));
  d->declare_var("busy", {"robot"}, RangeSpec::finite(syms({"free", "busy"})));

  d->set_sense_model("realDoorType", [](const State& s, const Args& a, RngStream& rng) {
    Value known = s.read("doorType", a);
    if (!known.is_unknown()) return known;
    return rng.bernoulli(0.5) ? Value::symbol("spring") : Value::symbol("ordinary");
  });

  // --- actions ---------------------------------------------------------

  {
    ActionSpec a;
    a.name = "senseDoor";
    a.params = {"r", "d"};
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("doorType", {ctx.args[1]}, ctx.sensor.sense("realDoorType", {ctx.args[1]}));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    // Crossing with cargo needs an ordinary door or a held one; a lone
    // robot pushes through anything.
    ActionSpec a;
    a.name = "move";
    a.params = {"r", "d", "room"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      Value from = s.read("loc", {args[0]});
      if (door_towards(from, args[2]) != args[1]) return false;
      if (next_room(from, args[2]) != args[2]) return false;
      if (s.read("carrying", {args[0]}) == Value::symbol("none")) return true;
      return s.read("doorType", {args[1]}) == Value::symbol("ordinary") ||
             s.read("doorState", {args[1]}) == Value::symbol("held");
    };
    ActionOutcome ok;
    ok.prob = 0.95;
    ok.cost = constant_cost(2.0);
    ok.effect = [](EffectCtx& ctx) { ctx.state.write("loc", {ctx.args[0]}, ctx.args[2]); };
    ActionOutcome bad;
    bad.prob = 0.05;
    bad.is_failure = true;
    bad.cost = constant_cost(2.0);
    a.outcomes = {std::move(ok), std::move(bad)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "holdDoor";
    a.params = {"helper", "d"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("busy", {args[0]}) == Value::symbol("free");
    };
    ActionOutcome ok;
    ok.cost = constant_cost(2.0);
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("doorState", {ctx.args[1]}, Value::symbol("held"));
      ctx.state.write("busy", {ctx.args[0]}, Value::symbol("busy"));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "releaseDoor";
    a.params = {"helper", "d"};
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("doorState", {ctx.args[1]}, Value::symbol("closed"));
      ctx.state.write("busy", {ctx.args[0]}, Value::symbol("free"));
    };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "pickup";
    a.params = {"r", "o"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("loc", {args[0]}) == s.read("rloc", {args[1]}) &&
             s.read("carrying", {args[0]}) == Value::symbol("none");
    };
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) { ctx.state.write("carrying", {ctx.args[0]}, ctx.args[1]); };
    a.outcomes = {std::move(ok)};
    d->declare_action(std::move(a));
  }
  {
    ActionSpec a;
    a.name = "putdown";
    a.params = {"r", "o"};
    a.guard = [](const State& s, const Args& args, const RigidRelations&) {
      return s.read("carrying", {args[0]}) == args[1];
    };
    ActionOutcome ok;
    ok.effect = [](EffectCtx& ctx) {
      ctx.state.write("rloc", {ctx.args[1]}, ctx.state.read("loc", {ctx.args[0]}));
      ctx.state.write("carrying", {ctx.args[0]}, Value::symbol("none"));
    };
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

  d->declare_task(TaskDecl{"transport", {"r", "o", "room"}});
  d->declare_task(TaskDecl{"moveThroughDoorway", {"r", "d", "room"}});

  {
    MethodTemplate m;
    m.name = "Transport_M1";
    m.task = "transport";
    m.role_params = {"r", "o", "room"};
    auto hop = [](const char* target_param) {
      return ir::sub("moveThroughDoorway",
                     {ex::param("r"),
                      ex::host([target_param](const EvalCtx& c) {
                        return door_towards(c.state.read("loc", {c.lookup("r")}),
                                            c.lookup(target_param));
                      }),
                      ex::host([target_param](const EvalCtx& c) {
                        return next_room(c.state.read("loc", {c.lookup("r")}),
                                         c.lookup(target_param));
                      })});
    };
    m.body = ir::seq(
        {ir::assign_local("src", ex::var("rloc", {ex::param("o")})),
         ir::while_(ts::ne(ex::var("loc", {ex::param("r")}), ex::param("src")), ir::seq({hop("src")}),
                    4),
         ir::act("pickup", {ex::param("r"), ex::param("o")}),
         ir::while_(ts::ne(ex::var("loc", {ex::param("r")}), ex::param("room")),
                    ir::seq({hop("room")}), 4),
         ir::act("putdown", {ex::param("r"), ex::param("o")})});
    d->declare_method(std::move(m));
  }
  {
    // Solo passage: sense the door if needed, then push through.
    MethodTemplate m;
    m.name = "MoveThroughDoorway_M1";
    m.task = "moveThroughDoorway";
    m.role_params = {"r", "d", "room"};
    m.body = ir::seq(
        {ir::if_(ts::eq(ex::var("doorType", {ex::param("d")}), ex::unknown()),
                 ir::act("senseDoor", {ex::param("r"), ex::param("d")})),
         ir::act("move", {ex::param("r"), ex::param("d"), ex::param("room")})});
    d->declare_method(std::move(m));
  }
  {
    // Assisted passage: a free helper holds the door open.
    MethodTemplate m;
    m.name = "MoveThroughDoorway_M2";
    m.task = "moveThroughDoorway";
    m.role_params = {"r", "d", "room"};
    m.extra_params = {ParamDecl{"robot", "robot"}};
    m.precondition = ts::and_(
        ts::ne(ex::param("robot"), ex::param("r")),
        ts::eq(ex::var("busy", {ex::param("robot")}), ex::sym("free")));
    m.body = ir::seq(
        {ir::if_(ts::eq(ex::var("doorType", {ex::param("d")}), ex::unknown()),
                 ir::act("senseDoor", {ex::param("r"), ex::param("d")})),
         ir::act("holdDoor", {ex::param("robot"), ex::param("d")}),
         ir::act("move", {ex::param("r"), ex::param("d"), ex::param("room")}),
         ir::act("releaseDoor", {ex::param("robot"), ex::param("d")})});
    d->declare_method(std::move(m));
  }

  d->set_domain_heuristic([](const TaskInstance& tau, const MethodInstance&, const State&,
                             UtilityKind kind) {
    if (kind == UtilityKind::SuccessRatio) return 0.8;
    return tau.name == "transport" ? 1.0 / 12.0 : 1.0 / 4.0;
  });

  DomainBundle b;
  b.name = "nav";
  b.domain = d;
  b.gen_problem = [](std::uint64_t seed, int difficulty) {
    RngStream rng(seed, "nav-problem");
    ProblemInstance p;
    p.domain = "nav";
    p.seed = seed;
    auto sym = [](const char* s) { return Value::symbol(s); };
    const char* room_names[] = {"hall", "left", "right", "store"};
    const char* door_names[] = {"dLeft", "dRight", "dStore"};

    for (const char* r : {"r1", "r2", "r3"}) {
      p.initial_state.push_back(
          CellWrite{"loc", {sym(r)}, sym(room_names[rng.uniform_index(4)])});
      p.initial_state.push_back(CellWrite{"carrying", {sym(r)}, sym("none")});
      p.initial_state.push_back(CellWrite{"busy", {sym(r)}, sym("free")});
    }
    for (const char* o : {"o1", "o2"})
      p.initial_state.push_back(
          CellWrite{"rloc", {sym(o)}, sym(room_names[1 + rng.uniform_index(3)])});
    for (const char* dn : door_names) {
      p.initial_state.push_back(CellWrite{"doorState", {sym(dn)}, sym("closed")});
      p.environment.push_back(CellWrite{
          "realDoorType", {sym(dn)}, rng.bernoulli(0.5) ? sym("spring") : sym("ordinary")});
    }

    std::size_t n_tasks = 1 + rng.uniform_index(2);
    double t = 0;
    const char* robots[] = {"r1", "r2", "r3"};
    const char* objects[] = {"o1", "o2"};
    for (std::size_t i = 0; i < n_tasks && i < 2; ++i) {
      t += rng.uniform(0.0, 8.0);
      p.arrivals.push_back(
          {t,
           {TaskInstance{"transport",
                         {sym(robots[rng.uniform_index(3)]), sym(objects[i]),
                          sym(room_names[1 + rng.uniform_index(3)])},
                         TaskOrigin::Root}}});
    }
    for (int i = 0; i < difficulty; ++i) {
      ExogenousEvent ev;
      ev.time = rng.uniform(2.0, 20.0);
      const char* dn = door_names[rng.uniform_index(3)];
      // A door gets swapped: its type is no longer what anyone sensed.
      ev.env_writes.push_back(CellWrite{
          "realDoorType", {sym(dn)}, rng.bernoulli(0.5) ? sym("spring") : sym("ordinary")});
      ev.state_writes.push_back(CellWrite{"doorType", {sym(dn)}, Value::unknown()});
      p.events.push_back(std::move(ev));
    }
    return p;
  };
  return b;
}

}  // namespace rae::domains
