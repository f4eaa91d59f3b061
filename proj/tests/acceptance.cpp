// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include "pitpn/bench.hpp"
#include "pitpn/ltl.hpp"
#include "pitpn/native_format.hpp"
#include "pitpn/oracle.hpp"
#include "pitpn/synthesis.hpp"
#include "grid_oracle.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace pitpn;

namespace {

Net load(const std::string& name) { return io::load_native(std::string(PITPN_MODELS_DIR) + "/" + name + ".pn"); }
Formula pred(const Net& n, const std::string& text) { return io::parse_formula(text, io::predicate_symbols(n)); }
Formula params(const Net& n, const std::string& text) { return io::parse_formula(text, io::parameter_symbols(n)); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Symbolic witnesses collected from the other criteria, checked together.
std::vector<std::pair<std::string, synthesis::Witness>> g_witnesses;

void keep(const std::string& from, const std::vector<synthesis::Witness>& ws) {
  for (const auto& w : ws) g_witnesses.emplace_back(from, w);
}

std::string infix(const Formula& f) { return io::print_formula(f); }

Outcome c1() {
  Net n = load("fig2");
  synthesis::Options o;
  o.folded = false;
  o.budget.max_solutions = 1;
  auto r = synthesis::ef_synth(n, params(n, "a >= 0"), pred(n, "!ksafe(1)"), o);
  keep("1", r.witnesses);
  smt::SolverSession s(smt::z3_config());
  bool ok = s.equivalent(r.constraint, params(n, "a >= 4")) == true;
  return {ok, "constraint " + infix(r.constraint)};
}

Outcome c2() {
  Net n = load("fig2");
  smt::SolverSession solver(smt::z3_config());
  symbolic::Engine e(n, solver);
  auto init = e.init_state(params(n, "0 <= a && a < 4"));
  Formula bad = pred(n, "!ksafe(1)");
  auto folded = folding::folded_search(e, {init}, bad);
  symbolic::Budget b;
  b.time_limit = std::chrono::seconds(30);
  auto unfolded = symbolic::smt_search(e, {init}, bad, b);
  bool ok = folded.complete && folded.solutions.empty() && !unfolded.complete && unfolded.stop_reason == "time" &&
            unfolded.solutions.empty();
  std::ostringstream d;
  d << "folded complete=" << folded.complete << " solutions=" << folded.solutions.size()
    << " visited=" << folded.visited_set_size << "; unfolded stopped by '" << unfolded.stop_reason << "' after "
    << unfolded.nodes.size() << " states";
  return {ok, d.str()};
}

Outcome c3() {
  Net base = load("net3");
  Net n34 = instantiate(base, {{"lower", 3}, {"upper", 4}});
  Net n23 = instantiate(base, {{"lower", 2}, {"upper", 3}});
  concrete::Engine e34(n34, concrete::Mode::r0()), e23(n23, concrete::Mode::r0());
  auto reach = concrete::search_ef(e34, e34.initial_state(), concrete::compile(n34, pred(n34, "p2 = 2")));
  bool reach_ok = reach.verdict == concrete::Verdict::Found && reach.witness &&
                  reach.witness->last().clocks[n34.require_transition("t3")] == 4 && e34.replay(*reach.witness);
  auto safe1 = concrete::check_ag(e23, e23.initial_state(), concrete::compile(n23, pred(n23, "ksafe(1)")));
  auto safe2 = concrete::check_ag(e34, e34.initial_state(), concrete::compile(n34, pred(n34, "ksafe(2)")));
  bool ok = reach_ok && safe1.verdict == concrete::Verdict::NotFound && safe2.verdict == concrete::Verdict::NotFound;
  auto holds = [](const concrete::SearchResult& r) {
    return r.verdict == concrete::Verdict::NotFound ? "holds" : "does not hold";
  };
  std::ostringstream d;
  d << "p2=2 " << concrete::to_string(reach.verdict) << " (t3 clock "
    << (reach.witness ? to_string(reach.witness->last().clocks[n34.require_transition("t3")]) : "-")
    << "); 1-safety of net3(2,3) " << holds(safe1) << "; 2-safety of net3(3,4) " << holds(safe2);
  return {ok, d.str()};
}

Outcome c4() {
  Net n = instantiate(load("net3"), {{"lower", 3}, {"upper", 4}});
  concrete::Engine e(n, concrete::Mode::timed());
  concrete::SearchOptions o;
  o.time_bound = Rational(10);
  o.window = std::make_pair(Rational(5), std::optional<Rational>(Rational(10)));
  auto r = concrete::search_ef(e, e.initial_state(), concrete::compile(n, pred(n, "!ksafe(1) && GT >= 5")), o);
  if (r.verdict != concrete::Verdict::Found || !r.witness) return {false, "no witness"};
  const auto& gt = r.witness->last().global_time;
  bool ok = gt && *gt >= 5 && *gt <= 10 && e.replay(*r.witness);
  return {ok, "witness at GT=" + (gt ? to_string(*gt) : std::string("?")) + ", replayed"};
}

Outcome c5() {
  Net n = load("scheduling");
  auto t0 = std::chrono::steady_clock::now();
  auto r = synthesis::ag_synth(n, params(n, "30 <= a && a <= 70"), pred(n, "ksafe(1)"));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  keep("5", r.witnesses);
  smt::SolverSession s(smt::z3_config());
  bool ok = r.status == synthesis::Status::Exact && secs <= 600 &&
            s.equivalent(r.constraint, params(n, "a > 48 && 30 <= a && a <= 70")) == true;
  std::ostringstream d;
  d << synthesis::to_string(r.status) << " " << infix(r.constraint) << " in " << secs << " s";
  return {ok, d.str()};
}

Outcome c6() {
  Net n = load("scheduling");
  Var b = real_var("b");
  synthesis::Options o;
  o.folded = false;
  o.budget.max_solutions = 1;
  synthesis::Window w{LinExpr::variable(b), LinExpr::variable(b)};
  auto r = synthesis::ef_timed(n, params(n, "30 <= a && a <= 70"), pred(n, "!ksafe(1)"), w, o);
  keep("6", r.witnesses);
  smt::SolverSession s(smt::z3_config());
  Formula onto_b = synthesis::project_onto(s, r.constraint, {"b"});
  Term tb = Term::variable(b);
  bool ok = s.equivalent(onto_b, tb >= Term(60) && tb <= Term(96)) == true;
  return {ok, "b-projection " + infix(synthesis::tidy(s, onto_b))};
}

Outcome c7() {
  Net n = load("fig2_marking");
  auto r = synthesis::ag_synth(n, params(n, "a >= 0"), pred(n, "ksafe(1)"));
  keep("7", r.witnesses);
  smt::SolverSession s(smt::z3_config());
  Formula expected = params(n, "x1 = 0 && x3 = 0 && 0 <= x2 && x2 <= 1 && a >= 0");
  bool ok = s.equivalent(r.constraint, expected) == true;
  return {ok, synthesis::to_string(r.status) + " " + infix(synthesis::tidy(s, r.constraint)) + " (expected " +
                  infix(expected) + ")"};
}

Outcome c8() {
  Net n = load("fig2");
  smt::SolverSession solver(smt::z3_config());
  auto strat = strategy::parse("prefer(t3) or-else all", n, "t3-first");
  symbolic::Engine e(n, solver, {false, &strat});
  auto r = folding::folded_search(e, {e.init_state(params(n, "a >= 0"))}, Formula::falsity());
  std::size_t safe = 0;
  for (const auto& node : r.nodes)
    if (solver.entails(node.state.formula(), k_safe(1, node.state.marking)) == true) ++safe;
  bool ok = r.complete && safe == r.nodes.size();
  return {ok, "complete=" + std::to_string(r.complete) + ", " + std::to_string(safe) + "/" +
                  std::to_string(r.nodes.size()) + " visited states entail 1-safety"};
}

Outcome c9() {
  Net n = instantiate(load("net3"), {{"lower", 3}, {"upper", 4}});
  concrete::Engine e(n, concrete::Mode::r0());
  auto both = ltl::model_check(e, ltl::parse("([]<> p3 = 0) /\\ ([]<> p3 = 1)", n));
  auto reach = ltl::model_check(e, ltl::parse("<> (p2 = 2)", n));
  bool ok = both.verdict != concrete::Verdict::Inconclusive && both.holds && !reach.holds && !reach.cycle.empty();
  return {ok, std::string("recurrence ") + (both.holds ? "holds" : "fails") + "; <>(p2 = 2) " +
                  (reach.holds ? "holds" : "fails with lasso stem " + std::to_string(reach.stem.size()) + " cycle " +
                                                std::to_string(reach.cycle.size()))};
}

Outcome c10() {
  std::ostringstream d;
  bool ok = true;

  // (a)
  for (auto [name, net] : {std::pair<std::string, Net>{"fig1_pi", load("fig1_pi")},
                           {"net3(3,4)", instantiate(load("net3"), {{"lower", 3}, {"upper", 4}})}}) {
    auto rep = oracle::bisim_check(net, 6);
    ok = ok && rep.ok && rep.pairs > 0;
    d << "(a) " << name << " " << (rep.ok ? "ok" : "MISMATCH") << " " << rep.pairs << " pairs; ";
  }

  // (b)
  std::size_t good = 0;
  for (const auto& [from, w] : g_witnesses)
    if (w.concrete && w.concrete->replayed && w.concrete->goal_holds) ++good;
  ok = ok && !g_witnesses.empty() && good == g_witnesses.size();
  d << "(b) " << good << "/" << g_witnesses.size() << " witnesses replay; ";

  // (c)
  {
    Net n = instantiate(load("net3"), {{"lower", 3}, {"upper", 4}});
    concrete::Engine ce(n, concrete::Mode::r0());
    auto g = concrete::explore(ce, ce.initial_state());
    std::set<Tokens> reached;
    for (const auto& s : g.states) reached.insert(s.marking);
    smt::SolverSession solver(smt::z3_config());
    symbolic::Engine e(n, solver);
    symbolic::Budget b;
    b.max_depth = 14;
    auto r = symbolic::smt_search(e, {e.init_state(Formula::truth())}, Formula::falsity(), b);
    std::size_t covered = 0;
    for (const auto& m : reached) {
      for (const auto& node : r.nodes) {
        std::vector<Formula> eqs{node.state.formula()};
        for (std::size_t p = 0; p < m.size(); ++p) eqs.push_back(eq(Term(node.state.marking[p]), Term(m[p])));
        if (e.satisfiable(Formula::conj(eqs))) {
          ++covered;
          break;
        }
      }
    }
    ok = ok && g.complete && covered == reached.size();
    d << "(c) " << covered << "/" << reached.size() << " markings covered; ";
  }

  // (d)
  {
    smt::SolverSession solver(smt::z3_config());
    auto cmp = grid_oracle::compare(solver);
    std::size_t compared = 0, agree = 0;
    for (const auto& p : cmp.pairs) {
      if (!p.comparable) continue;
      ++compared;
      if (p.subsumes == p.expected) ++agree;
    }
    ok = ok && compared >= 100 && agree == compared;
    d << "(d) " << agree << "/" << compared << " pairs agree; ";
  }

  // (e)
  {
    smt::SolverSession solver(smt::z3_config());
    struct Case {
      const char* model;
      const char* phi0;
    };
    for (const auto& c : {Case{"producer_consumer", "0 <= a && a < 4"}, Case{"scheduling", "48 < a && a <= 70"},
                          Case{"tutorial", "true"}}) {
      Net n = load(c.model);
      symbolic::Engine e(n, solver);
      symbolic::Budget b;
      b.time_limit = std::chrono::seconds(120);
      auto r = folding::folded_search(e, {e.init_state(params(n, c.phi0))}, Formula::falsity(), b);
      ok = ok && r.complete;
      d << "(e) " << c.model << " " << (r.complete ? "complete" : "stopped (" + r.stop_reason + ")") << " with "
        << r.visited_set_size << " visited; ";
    }
  }
  return {ok, d.str()};
}

Outcome c11() {
  auto suite = bench::default_suite(PITPN_MODELS_DIR);
  suite.thresholds = {0};
  suite.safety = false;
  suite.timeout = std::chrono::seconds(120);
  suite.jobs = 4;
  auto cells = bench::run(suite);
  std::size_t found = 0;
  for (const auto& c : cells) found += c.outcome == bench::Outcome::Found ? 1 : 0;
  std::cout << bench::table(cells);
  return {found == cells.size() && cells.size() == 34,
          std::to_string(found) + "/" + std::to_string(cells.size()) + " EF(p > 0) cells found a solution"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1  EF not 1-safe gives a >= 4", c1},
      {"2  folded AG 1-safe completes, unfolded exhausts 30 s", c2},
      {"3  net3 sampled reachability and k-safety", c3},
      {"4  time-bounded witness in [5, 10]", c4},
      {"5  scheduling AG 1-safe gives a > 48", c5},
      {"6  scheduling window gives 60 <= b <= 96", c6},
      {"7  parametric marking safe region", c7},
      {"8  t3-first strategy keeps fig2 1-safe", c8},
      {"9  net3 LTL verdicts", c9},
      {"10 property suites", c10},
      {"11 bench EF(p > 0) verdict pattern", c11},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    std::printf("[%s] criterion %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
