#include "pitpn/concrete.hpp"
#include "pitpn/native_format.hpp"
#include "pitpn/oracle.hpp"

#include <doctest.h>

#include <set>

using namespace pitpn;

namespace {

Net load(const std::string& name) { return io::load_native(std::string(PITPN_MODELS_DIR) + "/" + name + ".pn"); }

Net net3(int lo, int hi) { return instantiate(load("net3"), {{"lower", lo}, {"upper", hi}}); }

Formula hole_formula(const Net& net, const std::string& text) { return io::parse_formula(text, io::predicate_symbols(net)); }

std::set<std::pair<Tokens, std::vector<Rational>>> untagged(const concrete::StateGraph& g) {
  std::set<std::pair<Tokens, std::vector<Rational>>> out;
  for (const auto& s : g.states) out.emplace(s.marking, s.clocks);
  return out;
}

}  // namespace

TEST_CASE("net3(3,4) reaches p2 = 2 with t3's clock at 4") {
  Net n = net3(3, 4);
  concrete::Engine e(n, concrete::Mode::r0());
  auto r = concrete::search_ef(e, e.initial_state(), concrete::compile(n, hole_formula(n, "p2 = 2")));
  REQUIRE(r.verdict == concrete::Verdict::Found);
  REQUIRE(r.witness);
  const auto& last = r.witness->last();
  CHECK(last.marking[n.require_place("p2")] == 2);
  CHECK(last.clocks[n.require_transition("t3")] == 4);
  CHECK(e.replay(*r.witness));
}

TEST_CASE("exhaustive safety verdicts of the sampled engine") {
  {
    Net n = net3(2, 3);
    concrete::Engine e(n, concrete::Mode::r0());
    auto r = concrete::check_ag(e, e.initial_state(), concrete::compile(n, hole_formula(n, "ksafe(1)")));
    CHECK(r.verdict == concrete::Verdict::NotFound);
  }
  {
    Net n = net3(3, 4);
    concrete::Engine e(n, concrete::Mode::r0());
    auto two = concrete::check_ag(e, e.initial_state(), concrete::compile(n, hole_formula(n, "ksafe(2)")));
    CHECK(two.verdict == concrete::Verdict::NotFound);
    auto one = concrete::check_ag(e, e.initial_state(), concrete::compile(n, hole_formula(n, "ksafe(1)")));
    CHECK(one.verdict == concrete::Verdict::Found);
  }
}

TEST_CASE("time-bounded search finds a witness inside the window") {
  Net n = net3(3, 4);
  concrete::Engine e(n, concrete::Mode::timed());
  concrete::SearchOptions o;
  o.time_bound = Rational(10);
  o.window = std::make_pair(Rational(5), std::optional<Rational>(Rational(10)));
  auto r = concrete::search_ef(e, e.initial_state(), concrete::compile(n, hole_formula(n, "!ksafe(1)")), o);
  REQUIRE(r.verdict == concrete::Verdict::Found);
  const auto& gt = r.witness->last().global_time;
  REQUIRE(gt);
  CHECK(*gt >= 5);
  CHECK(*gt <= 10);
  CHECK(e.replay(*r.witness));
}

TEST_CASE("clock and interval semantics are bisimilar on the sampled grid") {
  for (auto [name, net] : {std::pair<std::string, Net>{"fig1_pi", load("fig1_pi")}, {"net3(3,4)", net3(3, 4)}}) {
    CAPTURE(name);
    auto rep = oracle::bisim_check(net, 6);
    CHECK(rep.ok);
    CHECK(rep.pairs > 0);
    CHECK(rep.max_depth_reached > 0);
    for (const auto& m : rep.mismatches) MESSAGE(m);
  }
}

TEST_CASE("mte equals the smallest remaining upper slack of active transitions") {
  Net n = net3(3, 4);
  concrete::Engine e(n, concrete::Mode::r0());
  auto g = concrete::explore(e, e.initial_state());
  REQUIRE(g.complete);
  for (const auto& s : g.states) {
    std::optional<Rational> expected;
    for (std::size_t t = 0; t < n.transitions.size(); ++t) {
      if (!active(n, s.marking, t) || !e.upper(t)) continue;
      Rational slack = *e.upper(t) - s.clocks[t];
      if (!expected || slack < *expected) expected = slack;
    }
    CHECK(e.mte(s) == expected);
    e.check_invariants(s);
  }
}

TEST_CASE("tick-alternating sampling preserves reachable markings and clocks") {
  for (auto net : {net3(3, 4), net3(2, 3), instantiate(load("fig2"), {{"a", 2}})}) {
    concrete::Engine r0(net, concrete::Mode::r0()), r1(net, concrete::Mode::r1());
    auto g0 = concrete::explore(r0, r0.initial_state());
    auto g1 = concrete::explore(r1, r1.initial_state());
    REQUIRE(g0.complete);
    REQUIRE(g1.complete);
    CHECK(untagged(g0) == untagged(g1));
  }
}

TEST_CASE("rules reject inapplicable steps and replay catches tampering") {
  Net n = net3(3, 4);
  concrete::Engine e(n, concrete::Mode::r1());
  auto s = e.initial_state();
  CHECK_FALSE(e.can_fire(s, n.require_transition("t1")));
  CHECK_THROWS_AS(e.fire(s, n.require_transition("t1")), concrete::RuleNotApplicable);
  CHECK_THROWS_AS(e.tick(s, 7), concrete::RuleNotApplicable);
  auto after = e.tick(s, 2);
  CHECK(after.flag == concrete::TickFlag::NotOk);
  CHECK_THROWS_AS(e.tick(after, 1), concrete::RuleNotApplicable);

  auto r = concrete::search_ef(e, s, concrete::compile(n, hole_formula(n, "p3 = 1")));
  REQUIRE(r.witness);
  concrete::Trace t = *r.witness;
  CHECK(e.replay(t));
  t.states.back().marking[0] += 1;
  std::string why;
  CHECK_FALSE(e.replay(t, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("inhibitor arcs block firing and freeze the clock") {
  Net n = io::parse_native(
      "net inhib\nplace a = 1\nplace b = 1\nplace c\n"
      "trans t : a -> c inhibit b in [1, 1]\ntrans u : b -> in [3, 3]\n");
  concrete::Engine e(n, concrete::Mode::r0());
  auto s = e.initial_state();
  std::size_t t = n.require_transition("t");
  s = e.tick(s, 2);
  CHECK(s.clocks[t] == 0);
  CHECK_FALSE(e.can_fire(s, t));
  s = e.tick(s, 1);
  s = e.fire(s, n.require_transition("u"));
  s = e.tick(s, 1);
  CHECK(e.can_fire(s, t));
  CHECK(e.mte(s) == 0);
}

TEST_CASE("strategies restrict the sampled state space") {
  Net n = instantiate(load("fig2"), {{"a", 2}});
  auto strat = strategy::parse("prefer(t3) or-else all", n);
  concrete::Engine e(n, concrete::Mode::r0());
  auto full = concrete::explore(e, e.initial_state(), 200'000);
  auto restricted = concrete::explore(e, e.initial_state(), 200'000, &strat);
  REQUIRE(restricted.complete);
  std::set<std::pair<Tokens, std::vector<Rational>>> all = untagged(full);
  for (const auto& s : restricted.states) CHECK(all.count({s.marking, s.clocks}) == 1);
  CHECK(restricted.states.size() < full.states.size());
}
