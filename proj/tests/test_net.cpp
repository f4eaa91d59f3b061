#include "pitpn/native_format.hpp"
#include "pitpn/smt.hpp"

#include <doctest.h>

#include <deque>
#include <set>

using namespace pitpn;

namespace {

std::string model(const std::string& name) { return std::string(PITPN_MODELS_DIR) + "/" + name + ".pn"; }

// Firing rules restated directly on token vectors.
bool oracle_enabled(const Transition& t, const Tokens& m) {
  for (const auto& a : t.pre)
    if (m[a.place] < a.weight) return false;
  return true;
}

bool oracle_inhibited(const Transition& t, const Tokens& m) {
  for (const auto& a : t.inhibit)
    if (m[a.place] >= a.weight) return true;
  return false;
}

Tokens oracle_fire(const Transition& t, Tokens m) {
  for (const auto& a : t.pre) m[a.place] -= a.weight;
  for (const auto& a : t.post) m[a.place] += a.weight;
  return m;
}

// Untimed reachable markings with every place capped at `cap` tokens.
std::vector<Tokens> markings(const Net& net, std::int64_t cap) {
  std::set<Tokens> seen;
  std::deque<Tokens> todo;
  Tokens m0 = *net.ground_initial();
  seen.insert(m0);
  todo.push_back(m0);
  while (!todo.empty()) {
    Tokens m = todo.front();
    todo.pop_front();
    for (const auto& t : net.transitions) {
      if (!oracle_enabled(t, m)) continue;
      Tokens n = oracle_fire(t, m);
      bool within = true;
      for (auto v : n) within = within && v <= cap;
      if (within && seen.insert(n).second) todo.push_back(n);
    }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

TEST_CASE("the producer-consumer model has the published size") {
  Net n = io::load_native(model("producer_consumer"));
  CHECK(n.places.size() == 5);
  CHECK(n.transitions.size() == 4);
  CHECK(n.params.size() == 1);
  CHECK(validate(n).empty());
}

TEST_CASE("symbolic predicates fold to the firing rules on reachable markings") {
  for (const char* name : {"producer_consumer", "scheduling", "tutorial", "fig2"}) {
    CAPTURE(name);
    Net net = io::load_native(model(name));
    auto all = markings(net, 3);
    CHECK(all.size() > 3);
    for (const auto& m : all) {
      Marking sym = to_marking(m);
      for (std::size_t t = 0; t < net.transitions.size(); ++t) {
        const auto& tr = net.transitions[t];
        bool en = oracle_enabled(tr, m), inh = oracle_inhibited(tr, m);
        CHECK(enabled(net, sym, t).is_constant());
        CHECK(enabled(net, sym, t).is_true() == en);
        CHECK(inhibited(net, sym, t).is_true() == inh);
        CHECK(active(net, sym, t).is_true() == (en && !inh));
        CHECK(enabled(net, m, t) == en);
        CHECK(inhibited(net, m, t) == inh);
        CHECK(active(net, m, t) == (en && !inh));
        if (en) {
          CHECK(fire_marking(net, m, t) == oracle_fire(tr, m));
          CHECK(ground(fire_marking(net, sym, t)) == oracle_fire(tr, m));
          for (std::size_t u = 0; u < net.transitions.size(); ++u) {
            Tokens inter = m;
            for (const auto& a : tr.pre) inter[a.place] -= a.weight;
            bool still = oracle_enabled(net.transitions[u], inter);
            CHECK(enabled_in_intermediate(net, u, m, t) == still);
            bool fresh = oracle_enabled(net.transitions[u], oracle_fire(tr, m)) && (u == t || !still);
            CHECK(newly_enabled(net, u, m, t) == fresh);
          }
        }
      }
    }
  }
}

TEST_CASE("k-safety on ground and symbolic markings") {
  CHECK(k_safe(1, Tokens{0, 1, 1}));
  CHECK_FALSE(k_safe(1, Tokens{0, 2, 1}));
  CHECK(k_safe(2, Tokens{2, 2}));
  Var x = int_var("x");
  Formula f = k_safe(1, Marking{LinExpr::variable(x), LinExpr(1)});
  CHECK(evaluate(f, {{"x", 1}}));
  CHECK_FALSE(evaluate(f, {{"x", 2}}));
}

TEST_CASE("validation reports malformed nets") {
  Net empty;
  auto issues = validate(empty);
  CHECK(issues.size() >= 2);

  Net n = io::load_native(model("fig2"));
  Net bad = n;
  bad.transitions[0].pre.push_back(Arc{99, 1});
  CHECK_FALSE(validate(bad).empty());
  bad = n;
  bad.transitions[1].interval = Interval{LinExpr(5), TimeBound::finite(LinExpr(2))};
  CHECK_FALSE(validate(bad).empty());
  bad = n;
  bad.initial[0] = LinExpr(-1);
  CHECK_FALSE(validate(bad).empty());
  bad = n;
  bad.transitions[1].interval.lo = LinExpr::variable(real_var("ghost"));
  CHECK_FALSE(validate(bad).empty());

  smt::SolverSession solver(smt::z3_config());
  bad = n;
  bad.constraint = Term::variable(real_var("a")) < Term(0) && Term::variable(real_var("a")) > Term(1);
  CHECK_FALSE(validate(bad, &solver).empty());
  bad = n;
  bad.constraint = Term::variable(real_var("a")) >= Term(0);
  bad.transitions[2].interval = Interval{LinExpr::variable(real_var("a")) + LinExpr(5), TimeBound::finite(LinExpr(2))};
  CHECK_FALSE(validate(bad, &solver).empty());
  CHECK(validate(n, &solver).empty());
}

TEST_CASE("instantiation substitutes parameters and checks the constraint") {
  Net n = io::load_native(model("net3"));
  Net inst = instantiate(n, {{"lower", 3}, {"upper", 4}});
  CHECK(inst.params.empty());
  CHECK(inst.transitions[2].interval.lo == LinExpr(3));
  CHECK(*inst.transitions[2].interval.hi.value == LinExpr(4));
  CHECK_THROWS_AS(instantiate(n, {{"lower", 5}, {"upper", 4}}), StructuralError);
  CHECK_THROWS_AS(instantiate(n, {{"lower", 1}}), StructuralError);

  Net pm = io::load_native(model("fig2_marking"));
  CHECK_FALSE(pm.ground_initial().has_value());
  CHECK_THROWS_AS(instantiate(pm, {{"a", 1}, {"x1", Rational(1, 2)}, {"x2", 0}, {"x3", 0}}), StructuralError);
}

TEST_CASE("native format round-trips") {
  for (const char* name : {"fig1", "fig1_pi", "fig2", "fig2_marking", "net3", "producer_consumer", "scheduling", "tutorial"}) {
    CAPTURE(name);
    Net n = io::load_native(model(name));
    Net back = io::parse_native(io::print_native(n));
    CHECK(io::structurally_equal(n, back));
  }
}

TEST_CASE("native parse errors carry line numbers") {
  try {
    io::parse_native("net x\nplace p = 1\ntrans t : q -> p in [0, 1]\n");
    FAIL("expected a parse error");
  } catch (const io::ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(io::parse_native("net empty\n"), io::ParseError);
  CHECK_THROWS_AS(io::parse_native("net x\nplace p\ntrans t : p -> p in [3, 1]\n"), io::ParseError);
}
