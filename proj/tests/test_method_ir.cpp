#include <doctest.h>

#include <memory>
#include <vector>

#include "rae/body.hpp"
#include "rae/rng.hpp"
#include "rae/state.hpp"

using namespace rae;

namespace {

std::shared_ptr<Declarations> decls() {
  auto d = std::make_shared<Declarations>();
  d->declare_var(StateVarDecl{"x", {}, RangeSpec::finite({Value::integer(0), Value::integer(1),
                                                          Value::integer(2), Value::integer(3)})});
  d->declare_var(StateVarDecl{
      "status", {"p"},
      RangeSpec::finite({Value::symbol("ok"), Value::symbol("bad"), Value::unknown()})});
  return d;
}

EvalCtx ctx_of(const State& s, const Binding& b, const Locals& l) {
  return EvalCtx{s, nullptr, &b, &l};
}

}  // namespace

TEST_CASE("current_step on a single-step body") {
  // mA-style body: Seq[Act(a2)]
  InstrPtr body = ir::seq({ir::act("a2", {})});
  State s(decls());
  Binding b;
  Locals l;
  ProgramCounter pc = initial_pc(body, ctx_of(s, b, l));
  Step st = current_step(body, pc);
  CHECK(st.kind == Step::Kind::Act);
  CHECK(st.instr->name == "a2");

  // After its only step the body is exhausted.
  ProgramCounter nxt = next_pc(body, pc, ctx_of(s, b, l));
  CHECK(nxt.at_end);
  CHECK(current_step(body, nxt).kind == Step::Kind::End);
}

TEST_CASE("arg expressions evaluate against the binding and state of the moment") {
  InstrPtr body = ir::seq({ir::act("inspectPerson", {ex::param("r"), ex::param("p")})});
  State s(decls());
  Binding b{{"r", Value::symbol("w1")}, {"p", Value::symbol("p2")}};
  Locals l;
  ProgramCounter pc = initial_pc(body, ctx_of(s, b, l));
  Step st = current_step(body, pc);
  Args a = st.eval_args(ctx_of(s, b, l));
  REQUIRE(a.size() == 2);
  CHECK(a[0] == Value::symbol("w1"));
  CHECK(a[1] == Value::symbol("p2"));
}

TEST_CASE("if branches follow the test against the current state") {
  // If(x=1, Act(a1), Act(a2)) entered with x=2 goes to the else branch.
  InstrPtr body =
      ir::seq({ir::if_(ts::eq(ex::var("x"), ex::num(1)), ir::act("a1", {}), ir::act("a2", {}))});
  State s(decls());
  s.write("x", {}, Value::integer(2));
  Binding b;
  Locals l;
  ProgramCounter pc = initial_pc(body, ctx_of(s, b, l));
  CHECK(current_step(body, pc).instr->name == "a2");

  State s1(decls());
  s1.write("x", {}, Value::integer(1));
  ProgramCounter pc1 = initial_pc(body, ctx_of(s1, b, l));
  CHECK(current_step(body, pc1).instr->name == "a1");
}

TEST_CASE("while loops exit at the iteration cap even when the test stays true") {
  InstrPtr body = ir::seq({ir::while_(ts::always(), ir::act("a1", {}), /*cap=*/2),
                           ir::act("a2", {})});
  State s(decls());
  Binding b;
  Locals l;
  EvalCtx c = ctx_of(s, b, l);

  ProgramCounter pc = initial_pc(body, c);  // first a1 (iteration 1)
  CHECK(current_step(body, pc).instr->name == "a1");
  pc = next_pc(body, pc, c);  // second a1 (iteration 2)
  CHECK(current_step(body, pc).instr->name == "a1");
  pc = next_pc(body, pc, c);  // cap reached: exits to the successor
  CHECK(current_step(body, pc).instr->name == "a2");
  pc = next_pc(body, pc, c);
  CHECK(pc.at_end);
}

TEST_CASE("while loop re-entry is state dependent") {
  InstrPtr body = ir::seq({ir::while_(ts::lt(ex::var("x"), ex::num(2)),
                                      ir::seq({ir::assign("x", {}, ex::host([](const EvalCtx& c) {
                                                 return Value::integer(c.state.read("x").as_int() + 1);
                                               }))})),
                           ir::act("done", {})});
  State s(decls());
  s.write("x", {}, Value::integer(0));
  Binding b;
  Locals l;
  EvalCtx c = ctx_of(s, b, l);

  ProgramCounter pc = initial_pc(body, c);
  int assigns = 0;
  while (!pc.at_end && current_step(body, pc).kind == Step::Kind::Assign) {
    Step st = current_step(body, pc);
    s.write("x", {}, st.instr->value_expr(c));
    ++assigns;
    pc = next_pc(body, pc, c);
    REQUIRE(assigns < 10);
  }
  CHECK(assigns == 2);
  CHECK(s.read("x").as_int() == 2);
  CHECK(current_step(body, pc).instr->name == "done");
}

TEST_CASE("eval_test treats unknown as an ordinary value") {
  State s(decls());  // status(p) unset reads unknown
  Binding b;
  Locals l;
  EvalCtx c = ctx_of(s, b, l);

  Test t_eq = ts::eq(ex::var("status", {ex::sym("p1")}), ex::unknown());
  CHECK(t_eq(c));

  s.write("status", {Value::symbol("p1")}, Value::symbol("ok"));
  CHECK_FALSE(t_eq(c));

  // Ordered comparison with unknown is false, not an error.
  Test t_lt = ts::lt(ex::var("status", {ex::sym("p2")}), ex::num(3));
  CHECK_FALSE(t_lt(c));
}

TEST_CASE("eval_test compound boolean algebra and type errors") {
  State s(decls());
  s.write("x", {}, Value::integer(1));
  Binding b;
  Locals l;
  EvalCtx c = ctx_of(s, b, l);

  // not (a and b) with a=true, b=false
  Test t = ts::not_(ts::and_(ts::eq(ex::var("x"), ex::num(1)), ts::eq(ex::var("x"), ex::num(2))));
  CHECK(t(c));

  Test bad = ts::lt(ex::sym("a"), ex::sym("b"));
  CHECK_THROWS_AS(bad(c), TypeMismatch);

  // Tuple equality.
  CHECK(ts::eq(ex::lit(Value::point(1, 1)), ex::lit(Value::point(1, 1)))(c));
}

TEST_CASE("next_pc is deterministic and invalid pcs are rejected") {
  InstrPtr body = ir::seq({ir::act("a1", {}), ir::act("a2", {})});
  State s(decls());
  Binding b;
  Locals l;
  EvalCtx c = ctx_of(s, b, l);
  ProgramCounter pc = initial_pc(body, c);
  ProgramCounter n1 = next_pc(body, pc, c);
  ProgramCounter n2 = next_pc(body, pc, c);
  CHECK(n1 == n2);

  ProgramCounter bogus;
  bogus.path = {5};
  CHECK_THROWS_AS(next_pc(body, bogus, c), InvalidPC);
  ProgramCounter control;  // addresses the Seq root, not a leaf
  CHECK_THROWS_AS(next_pc(body, control, c), InvalidPC);
}

// Property: stepping any randomly generated body terminates (loop caps
// bound every While activation).
namespace {

InstrPtr gen_body(RngStream& rng, int depth) {
  if (depth == 0 || rng.uniform01() < 0.4) {
    switch (rng.uniform_index(3)) {
      case 0: return ir::act("a", {});
      case 1: return ir::assign("x", {}, ex::num(static_cast<std::int64_t>(rng.uniform_index(4))));
      default: return ir::sub("t", {});
    }
  }
  switch (rng.uniform_index(3)) {
    case 0: {
      std::vector<InstrPtr> steps;
      std::size_t n = 1 + rng.uniform_index(3);
      for (std::size_t i = 0; i < n; ++i) steps.push_back(gen_body(rng, depth - 1));
      return ir::seq(std::move(steps));
    }
    case 1:
      return ir::if_(ts::eq(ex::var("x"), ex::num(static_cast<std::int64_t>(rng.uniform_index(4)))),
                     gen_body(rng, depth - 1), gen_body(rng, depth - 1));
    default:
      // Always-true loops depend entirely on the cap to terminate.
      return ir::while_(rng.bernoulli(0.5)
                            ? ts::always()
                            : ts::eq(ex::var("x"), ex::num(static_cast<std::int64_t>(rng.uniform_index(4)))),
                        gen_body(rng, depth - 1), 3);
  }
}

}  // namespace

TEST_CASE("random bodies of depth <= 4 reach END in finitely many steps") {
  RngStream rng(123, "bodies");
  for (int trial = 0; trial < 200; ++trial) {
    InstrPtr body = gen_body(rng, 4);
    State s(decls());
    s.write("x", {}, Value::integer(static_cast<std::int64_t>(rng.uniform_index(4))));
    Binding b;
    Locals l;
    EvalCtx c{s, nullptr, &b, &l};
    ProgramCounter pc = initial_pc(body, c);
    int steps = 0;
    while (!pc.at_end) {
      Step st = current_step(body, pc);
      // current_step never yields a control instruction.
      CHECK(st.instr->is_leaf());
      if (st.kind == Step::Kind::Assign)
        s.write("x", {}, st.instr->value_expr(c));
      pc = next_pc(body, pc, c);
      ++steps;
      REQUIRE(steps < 100000);
    }
  }
}
