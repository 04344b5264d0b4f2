#include <doctest.h>

#include <algorithm>

#include "rae/rng.hpp"
#include "rae/state.hpp"
#include "rae/value.hpp"

using namespace rae;

TEST_CASE("unknown equals only itself") {
  Value u = Value::unknown();
  CHECK(u == Value::unknown());
  CHECK(u != Value::symbol("unknown"));
  CHECK(u != Value::integer(0));
  CHECK(u != Value::boolean(false));
  CHECK(u != Value::tuple({}));
}

TEST_CASE("canonical ordering is total and deterministic") {
  std::vector<Value> vs = {
      Value::unknown(),    Value::symbol("b"),     Value::symbol("a"),
      Value::integer(2),   Value::integer(-1),     Value::real(0.5),
      Value::boolean(true), Value::boolean(false), Value::point(1, 2),
      Value::point(1, 1),  Value::tuple({Value::integer(1)}),
  };
  std::sort(vs.begin(), vs.end());
  for (std::size_t i = 0; i + 1 < vs.size(); ++i) CHECK(!(vs[i + 1] < vs[i]));
  // Tag order: symbols before ints before reals before bools before tuples before unknown.
  CHECK(vs.front().is_symbol());
  CHECK(vs.back().is_unknown());

  // Antisymmetry on a pair within one variant.
  CHECK(Value::symbol("a") < Value::symbol("b"));
  CHECK(Value::point(1, 1) < Value::point(1, 2));
}

TEST_CASE("ordering is stable across shuffles") {
  RngStream rng(7, "shuffle");
  std::vector<Value> base = {Value::symbol("x"), Value::integer(3), Value::real(1.5),
                             Value::point(0, 0), Value::unknown(), Value::boolean(true)};
  std::vector<Value> a = base, b = base;
  std::shuffle(a.begin(), a.end(), rng.engine());
  std::shuffle(b.begin(), b.end(), rng.engine());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

static std::shared_ptr<Declarations> tiny_decls() {
  auto d = std::make_shared<Declarations>();
  d->declare_var(StateVarDecl{
      "loc", {"robot"}, RangeSpec::finite({Value::point(0, 0), Value::point(1, 1)})});
  d->declare_var(StateVarDecl{
      "status", {"robot"}, RangeSpec::finite({Value::symbol("free"), Value::symbol("busy")})});
  d->declare_var(StateVarDecl{"charge", {"robot"}, RangeSpec::interval(0.0, 10.0)});
  return d;
}

TEST_CASE("state read/write semantics") {
  State s(tiny_decls());
  Args r1 = {Value::symbol("r1")};

  SUBCASE("read of an unset declared instance yields unknown") {
    CHECK(s.read("loc", r1).is_unknown());
  }
  SUBCASE("write then read round-trips") {
    s.write("loc", r1, Value::point(1, 1));
    CHECK(s.read("loc", r1) == Value::point(1, 1));
  }
  SUBCASE("write outside the declared range is rejected") {
    CHECK_THROWS_AS(s.write("status", r1, Value::symbol("flying")), ValueOutOfRange);
    CHECK_THROWS_AS(s.write("charge", r1, Value::real(12.0)), ValueOutOfRange);
    s.write("charge", r1, Value::real(3.5));
    CHECK(s.read("charge", r1) == Value::real(3.5));
  }
  SUBCASE("undeclared variable access fails") {
    CHECK_THROWS_AS(s.read("speed", r1), UndeclaredVariable);
    CHECK_THROWS_AS(s.write("speed", r1, Value::integer(1)), UndeclaredVariable);
  }
  SUBCASE("reads are pure") {
    (void)s.read("loc", r1);
    CHECK(s.num_set_cells() == 0);
  }
  SUBCASE("copies are independent snapshots") {
    s.write("status", r1, Value::symbol("free"));
    State t = s;
    t.write("status", r1, Value::symbol("busy"));
    CHECK(s.read("status", r1) == Value::symbol("free"));
    CHECK(t.read("status", r1) == Value::symbol("busy"));
  }
}

TEST_CASE("rigid relations are lookup-only facts") {
  RigidRelations rr;
  rr.declare("adjacent", {{Value::symbol("a"), Value::symbol("b")},
                          {Value::symbol("b"), Value::symbol("c")}});
  CHECK(rr.holds("adjacent", {Value::symbol("a"), Value::symbol("b")}));
  CHECK_FALSE(rr.holds("adjacent", {Value::symbol("a"), Value::symbol("c")}));
  CHECK_FALSE(rr.holds("nope", {}));
}

TEST_CASE("state signature is deterministic and order-independent") {
  State a(tiny_decls()), b(tiny_decls());
  Args r1 = {Value::symbol("r1")}, r2 = {Value::symbol("r2")};
  a.write("status", r1, Value::symbol("free"));
  a.write("status", r2, Value::symbol("busy"));
  b.write("status", r2, Value::symbol("busy"));
  b.write("status", r1, Value::symbol("free"));
  CHECK(a.signature() == b.signature());
}
