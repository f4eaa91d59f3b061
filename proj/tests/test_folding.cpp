#include "pitpn/folding.hpp"
#include "pitpn/native_format.hpp"
#include "grid_oracle.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace pitpn;

namespace {

Net load(const std::string& name) { return io::load_native(std::string(PITPN_MODELS_DIR) + "/" + name + ".pn"); }

Formula pred(const Net& net, const std::string& text) { return io::parse_formula(text, io::predicate_symbols(net)); }
Formula params(const Net& net, const std::string& text) { return io::parse_formula(text, io::parameter_symbols(net)); }

}  // namespace

TEST_CASE("subsumption agrees with grid concretization on sampled state pairs") {
  smt::SolverSession solver(smt::z3_config());
  auto cmp = grid_oracle::compare(solver);
  std::size_t compared = 0, related = 0;
  for (const auto& p : cmp.pairs) {
    CAPTURE(p.u);
    CAPTURE(p.v);
    if (!p.comparable) {
      CHECK(p.subsumes == false);
      continue;
    }
    REQUIRE(p.subsumes.has_value());
    CHECK(*p.subsumes == p.expected);
    ++compared;
    related += *p.subsumes ? 1 : 0;
  }
  CHECK(cmp.largest_set > 20);
  CHECK(compared >= 100);
  CHECK(related > cmp.states);
  CHECK(related < compared);
}

TEST_CASE("subsumption is reflexive and transitive on reachable states") {
  smt::SolverSession solver(smt::z3_config());
  Net n = load("fig2");
  symbolic::Engine e(n, solver);
  symbolic::Budget b;
  b.max_depth = 6;
  auto r = symbolic::smt_search(e, {e.init_state(params(n, "0 <= a && a < 4"))}, Formula::falsity(), b);
  std::vector<folding::ProjectedState> p;
  for (const auto& node : r.nodes) p.push_back(folding::project_now(e, node.state, solver));
  std::map<std::pair<std::size_t, std::size_t>, bool> rel;
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(folding::subsumes(solver, p[i], p[i]) == true);
    for (std::size_t j = 0; j < p.size(); ++j) rel[{i, j}] = folding::subsumes(solver, p[i], p[j]).value_or(false);
  }
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      for (std::size_t k = 0; k < p.size(); ++k)
        if (rel[{i, j}] && rel[{j, k}]) CHECK(rel[{i, k}]);
}

TEST_CASE("rebasing keeps the projection and a stronger parameter constraint is subsumed") {
  smt::SolverSession solver(smt::z3_config());
  Net n = load("fig2");
  symbolic::Engine e(n, solver);
  auto weak = e.init_state(params(n, "a >= 0"));
  auto strong = e.init_state(params(n, "a >= 4"));
  auto pw = folding::project_now(e, weak, solver), ps = folding::project_now(e, strong, solver);
  CHECK(folding::subsumes(solver, ps, pw) == true);
  CHECK(folding::subsumes(solver, pw, ps) == false);

  auto s = e.fire(e.tick(e.fire(e.tick(weak), n.require_transition("t1"))), n.require_transition("t2"));
  auto p = folding::project_now(e, s, solver);
  auto again = folding::project_now(e, folding::rebase(e, s, p), solver);
  CHECK(folding::subsumes(solver, p, again) == true);
  CHECK(folding::subsumes(solver, again, p) == true);
}

TEST_CASE("returning to the initial marking twice gives mutually subsuming states") {
  smt::SolverSession solver(smt::z3_config());
  Net n = load("fig2");
  symbolic::Engine e(n, solver);
  symbolic::Budget b;
  b.max_solutions = 8;
  Formula home = pred(n, "p1 = 0 && p2 = 0 && p3 = 0 && p4 = 1 && p5 = 1");
  auto r = symbolic::smt_search(e, {e.init_state(params(n, "0 <= a && a < 4"))}, home, b);
  REQUIRE(r.solutions.size() == 8);
  // Two later returns home, both reached by a firing.
  std::vector<std::size_t> fired;
  for (const auto& sol : r.solutions)
    if (r.nodes[sol.node].step.kind == symbolic::Step::Kind::Fire) fired.push_back(sol.node);
  REQUIRE(fired.size() >= 2);
  const auto& first = r.nodes[fired[0]].state;
  const auto& second = r.nodes[fired[1]].state;
  auto u = folding::project_now(e, first, solver);
  auto v = folding::project_now(e, second, solver);
  REQUIRE(u.comparable(v));
  CHECK(folding::subsumes(solver, u, v) == true);
  CHECK(folding::subsumes(solver, v, u) == true);
  // Plain implication between the unprojected constraints does not see it.
  CHECK_FALSE(solver.entails(first.formula(), second.formula()) == true);
}

TEST_CASE("folded search terminates where the unfolded one keeps going") {
  smt::SolverSession solver(smt::z3_config());
  Net n = load("fig2");
  symbolic::Engine e(n, solver);
  auto init = e.init_state(params(n, "0 <= a && a < 4"));

  auto unsafe = folding::folded_search(e, {init}, pred(n, "!ksafe(1)"));
  CHECK(unsafe.complete);
  CHECK(unsafe.solutions.empty());
  CHECK(unsafe.visited_set_size >= 1);

  Formula home = pred(n, "p1 = 0 && p2 = 0 && p3 = 0 && p4 = 1 && p5 = 1");
  auto folded_home = folding::folded_search(e, {init}, home);
  CHECK(folded_home.complete);
  CHECK(folded_home.solutions.size() >= 1);
  CHECK(folded_home.solutions.size() < 10);

  symbolic::Budget b;
  b.max_depth = 16;
  auto unfolded_home = symbolic::smt_search(e, {init}, home, b);
  CHECK_FALSE(unfolded_home.complete);
  CHECK(unfolded_home.solutions.size() > folded_home.solutions.size());

  symbolic::Budget one;
  one.max_solutions = 1;
  auto at_init = folding::folded_search(e, {init}, Formula::truth(), one);
  CHECK(at_init.solutions.size() == 1);
  CHECK(at_init.visited_set_size >= 1);
}

TEST_CASE("every folded solution is a real solution") {
  smt::SolverSession solver(smt::z3_config());
  Net n = load("fig2");
  symbolic::Engine e(n, solver);
  Formula goal = pred(n, "p3 = 1");
  auto r = folding::folded_search(e, {e.init_state(params(n, "0 <= a && a < 4"))}, goal);
  REQUIRE(r.complete);
  REQUIRE_FALSE(r.solutions.empty());
  for (const auto& sol : r.solutions) {
    CHECK(e.satisfiable(sol.witness));
    auto c = symbolic::concretize(e, r, sol, goal);
    CHECK(c.replayed);
    CHECK(c.goal_holds);
  }
}

TEST_CASE("folded search with goal false completes on the benchmark models") {
  smt::SolverSession solver(smt::z3_config());
  for (auto [name, phi] : {std::pair<const char*, const char*>{"producer_consumer", "0 <= a && a < 4"},
                           {"scheduling", "48 < a && a <= 70"}}) {
    CAPTURE(name);
    Net n = load(name);
    symbolic::Engine e(n, solver);
    symbolic::Budget b;
    b.time_limit = std::chrono::minutes(5);
    auto r = folding::folded_search(e, {e.init_state(params(n, phi))}, Formula::falsity(), b);
    CHECK(r.complete);
    CHECK(r.solutions.empty());
  }
}
