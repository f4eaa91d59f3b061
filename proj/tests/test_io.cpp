#include "pitpn/bench.hpp"
#include "pitpn/query.hpp"
#include "pitpn/romeo.hpp"
#include "pitpn/smtlib.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace pitpn;

namespace {

std::string models(const std::string& rel) { return std::string(PITPN_MODELS_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("Romeo fixtures import with the published sizes") {
  auto pc = io::load_romeo(models("romeo/producer_consumer.xml"));
  CHECK(pc.net.places.size() == 5);
  CHECK(pc.net.transitions.size() == 4);
  CHECK(pc.net.params.size() == 1);
  CHECK(io::structurally_equal(pc.net, io::load_native(models("producer_consumer.pn"))));

  auto sched = io::load_romeo(models("romeo/scheduling.xml"));
  CHECK(sched.net.params.size() == 3);
  CHECK(sched.net.transitions.size() == 9);
  CHECK(sched.net.arc_count() == 15);

  auto tut = io::load_romeo(models("romeo/tutorial.xml"));
  CHECK(tut.net.places.size() == 6);
  CHECK(tut.net.transitions.size() == 5);
  CHECK(tut.net.params.size() == 2);
  CHECK(io::structurally_equal(tut.net, io::load_native(models("tutorial.pn"))));
  const auto& again = tut.net.transitions[tut.net.require_transition("startOver")].post;
  REQUIRE(again.size() == 1);
  CHECK(again[0].weight == 2);

  auto odd = io::load_romeo(models("romeo/unknown_element.xml"));
  CHECK(odd.diagnostics.size() == 2);
  CHECK_FALSE(odd.net.places.empty());
}

TEST_CASE("Romeo input errors") {
  CHECK_THROWS_AS(io::parse_romeo("<TPN><place id='0'"), io::ParseError);
  CHECK_THROWS_AS(io::parse_romeo("<TPN><place id='0' label='p' initialMarking='1'/>"
                                  "<transition id='0' label='t' eft='1' lft='2'/>"
                                  "<arc place='0' transition='0' type='sideways'/></TPN>"),
                  io::ParseError);
  CHECK_THROWS_AS(io::parse_romeo("<TPN><place id='0' label='p' initialMarking='1'/>"
                                  "<transition id='0' label='t' eft='1' lft='2'/>"
                                  "<arc place='7' transition='0' type='PlaceTransition'/></TPN>"),
                  io::ParseError);
  CHECK_THROWS_AS(io::parse_romeo("<TPN><place id='0' label='p'/>"
                                  "<transition id='0' label='t' eft='x' lft='2'/></TPN>"),
                  io::ParseError);
  auto inf = io::parse_romeo("<TPN><place id='0' label='p' initialMarking='1'/>"
                             "<transition id='0' label='t' eft='1' lft='inf'/>"
                             "<arc place='0' transition='0' type='PlaceTransition'/></TPN>");
  CHECK(inf.net.transitions[0].interval.hi.is_infinite());
}

TEST_CASE("query files parse and timed modalities are refused") {
  auto q = io::parse_query("# comment\nquery ef-timed\ninit a >= 0\ngoal !ksafe(1)\nwindow [b, inf]\n"
                           "engine symbolic\nmax-solutions 2\ntimeout 30\n");
  CHECK(q.kind == io::QueryKind::EfTimed);
  CHECK(q.window_lo == "b");
  CHECK(q.window_hi.empty());
  CHECK(q.engine == io::EngineKind::Symbolic);
  CHECK(q.max_solutions == 2u);
  CHECK(q.timeout == 30.0);

  auto s = io::parse_query("query check-ag\nsafe ksafe(1)\nstrategy first = prefer(t3) or-else all\nuse first\n");
  REQUIRE(s.strategies.size() == 1);
  CHECK(s.use_strategy == "first");

  CHECK(io::parse_engine("unfolded") == io::EngineKind::Symbolic);
  CHECK_THROWS_AS(io::parse_engine("quantum"), io::QueryError);
  CHECK_THROWS_AS(io::parse_query("query nonsense\n"), io::QueryError);
  CHECK_THROWS_AS(io::parse_query("query ef-synth\nfrobnicate 3\n"), io::QueryError);
  for (const char* text : {"query af-timed\n", "query eu\n", "query check-ag\nsafe AF p1 = 1\n"}) {
    CAPTURE(text);
    try {
      io::parse_query(text);
      FAIL("expected a refusal");
    } catch (const io::QueryError& e) {
      CHECK(std::string(e.what()).find("unsupported - see concrete LTL (query mc-ltl)") != std::string::npos);
    }
  }
}

TEST_CASE("reports carry a constraint that reads back from SMT-LIB") {
  Net n = io::load_native(models("fig2.pn"));
  auto q = io::parse_query("query ef-synth\ninit a >= 0\ngoal !ksafe(1)\nengine symbolic\nmax-solutions 1\n");
  io::RunOptions o;
  o.model_name = "fig2";
  auto r = io::run_query(n, q, o);
  CHECK(r.verdict == "underapprox");
  REQUIRE(r.constraint);
  auto j = nlohmann::json::parse(io::to_json(r, &n));
  CHECK(j["model"] == "fig2");
  std::map<std::string, Var> vars{{"a", real_var("a")}};
  Formula back = smtlib::to_formula(smtlib::parse_one(j["constraint"].get<std::string>()), vars);
  smt::SolverSession s(smt::z3_config());
  CHECK(s.equivalent(back, Term::variable(real_var("a")) >= Term(4)) == true);
  CHECK(io::to_text(r, &n).find("constraint:") != std::string::npos);
}

TEST_CASE("query runs on each engine") {
  Net n = io::load_native(models("fig2.pn"));
  auto safe = io::run_query(n, io::load_query(std::string(PITPN_QUERIES_DIR) + "/fig2_ag_safe.q"));
  CHECK(safe.verdict == "holds");
  CHECK(safe.conclusive);

  auto sampled = io::run_query(n, io::parse_query("query search-ef\nengine concrete\nparams a = 5\ngoal !ksafe(1)\n"));
  CHECK(sampled.verdict == "reachable");
  CHECK(sampled.sampled);
  CHECK_FALSE(sampled.witness.empty());

  CHECK_THROWS_AS(io::run_query(n, io::parse_query("query search-ef\nengine concrete\ngoal p1 = 1\n")), io::QueryError);
  CHECK_THROWS_AS(io::run_query(n, io::parse_query("query ef-synth\ngoal nowhere = 1\n")), io::ParseError);
}

TEST_CASE("a bench cell finds an easy reachability target") {
  auto suite = bench::default_suite(PITPN_MODELS_DIR);
  REQUIRE(suite.models.size() == 3);
  suite.timeout = std::chrono::seconds(60);
  const auto& [name, net] = suite.models[2];
  CHECK(name == "tutorial");
  auto cell = bench::run_cell(net, name, "joined", 0, true, suite);
  CHECK(cell.outcome == bench::Outcome::Found);
  CHECK(cell.property() == "EF(joined > 0)");
  auto table = bench::table({cell});
  CHECK(table.find("solution") != std::string::npos);
  auto j = nlohmann::json::parse(bench::to_json({cell}));
  CHECK(j.size() == 1);
}
