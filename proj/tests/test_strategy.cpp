#include "pitpn/native_format.hpp"
#include "pitpn/synthesis.hpp"

#include <doctest.h>

using namespace pitpn;
using strategy::Option;

namespace {

Net fig2() { return io::load_native(std::string(PITPN_MODELS_DIR) + "/fig2.pn"); }

}  // namespace

TEST_CASE("strategy text parses into tiers") {
  Net n = fig2();
  auto s = strategy::parse("prefer(t3, t4) or-else prefer(tick) or-else all", n);
  REQUIRE(s.tiers.size() == 2);
  CHECK(s.tiers[0].transitions == std::vector<std::size_t>{2, 3});
  CHECK_FALSE(s.tiers[0].includes_tick);
  CHECK(s.tiers[1].includes_tick);
  CHECK(strategy::parse("all", n).is_all());
  CHECK(strategy::parse(strategy::to_string(s, n), n).tiers.size() == 2);
  CHECK_THROWS_AS(strategy::parse("prefer(t9)", n), strategy::StrategyError);
  CHECK_THROWS_AS(strategy::parse("prefer(t1", n), strategy::StrategyError);
  CHECK_THROWS_AS(strategy::parse("sometimes", n), strategy::StrategyError);
}

TEST_CASE("filtering keeps the first tier that can fire") {
  Net n = fig2();
  auto s = strategy::parse("prefer(t3) or-else prefer(t1, t2)", n);
  std::vector<Option> all{Option::tick(), Option::fire(0), Option::fire(1), Option::fire(2)};
  auto only = [](std::vector<std::size_t> ok) {
    return [ok](const Option& o) { return !o.is_tick && std::find(ok.begin(), ok.end(), o.transition) != ok.end(); };
  };

  auto first = strategy::filter_successors(all, s, only({0, 2}));
  CHECK(first == std::vector<Option>{Option::fire(2)});

  auto second = strategy::filter_successors(all, s, only({0, 1}));
  CHECK(second == std::vector<Option>{Option::fire(0), Option::fire(1)});

  auto none = strategy::filter_successors(all, s, only({3}));
  CHECK(none == all);

  CHECK(strategy::filter_successors(all, strategy::Strategy::all(), only({})) == all);
}

TEST_CASE("preferring t3 keeps the producer-consumer 1-safe for every a") {
  smt::SolverSession solver(smt::z3_config());
  Net n = fig2();
  auto strat = strategy::parse("prefer(t3) or-else all", n, "t3-first");
  symbolic::Engine e(n, solver, {false, &strat});
  auto phi0 = io::parse_formula("a >= 0", io::parameter_symbols(n));
  auto r = folding::folded_search(e, {e.init_state(phi0)}, Formula::falsity());
  CHECK(r.complete);
  REQUIRE(r.nodes.size() > 1);
  for (const auto& node : r.nodes)
    CHECK(solver.entails(node.state.formula(), k_safe(1, node.state.marking)) == true);

  symbolic::Engine plain(n, solver);
  symbolic::Budget b;
  b.max_solutions = 1;
  auto unsafe = folding::folded_search(plain, {plain.init_state(phi0)}, io::parse_formula("!ksafe(1)", io::predicate_symbols(n)), b);
  CHECK(unsafe.solutions.size() == 1);
}
