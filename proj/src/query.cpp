#include "pitpn/query.hpp"

#include "pitpn/ltl.hpp"
#include "pitpn/synthesis.hpp"

#include <chrono>
#include <cctype>
#include <random>
#include <regex>
#include <set>
#include <sstream>

namespace pitpn::io {

std::string to_string(QueryKind k) {
  switch (k) {
    case QueryKind::Simulate: return "simulate";
    case QueryKind::SearchEf: return "search-ef";
    case QueryKind::CheckAg: return "check-ag";
    case QueryKind::McLtl: return "mc-ltl";
    case QueryKind::EfSynth: return "ef-synth";
    case QueryKind::AgSynth: return "ag-synth";
    case QueryKind::EfTimed: return "ef-timed";
    case QueryKind::BoundedResponse: return "bounded-response";
  }
  return "?";
}

std::string to_string(EngineKind e) {
  switch (e) {
    case EngineKind::Concrete: return "concrete";
    case EngineKind::Symbolic: return "symbolic";
    case EngineKind::Folded: return "folded";
  }
  return "?";
}

EngineKind parse_engine(const std::string& text) {
  if (text == "concrete") return EngineKind::Concrete;
  if (text == "symbolic" || text == "unfolded") return EngineKind::Symbolic;
  if (text == "folded") return EngineKind::Folded;
  throw QueryError("unknown engine '" + text + "' (concrete, symbolic or folded)");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value, std::size_t line) {
  try {
    std::size_t used = 0;
    long long n = std::stoll(value, &used);
    if (used == value.size() && n >= 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw QueryError(key + " needs a non-negative integer, got '" + value + "'", line);
}

QueryKind parse_kind(const std::string& text, std::size_t line) {
  static const std::regex timed_modality(R"(^(af|eg|au|eu|a-until|e-until|until)(-timed)?$)", std::regex::icase);
  if (std::regex_match(text, timed_modality))
    throw QueryError("'" + text + "' is unsupported - see concrete LTL (query mc-ltl)", line);
  for (QueryKind k : {QueryKind::Simulate, QueryKind::SearchEf, QueryKind::CheckAg, QueryKind::McLtl, QueryKind::EfSynth,
                      QueryKind::AgSynth, QueryKind::EfTimed, QueryKind::BoundedResponse})
    if (to_string(k) == text) return k;
  throw QueryError("unknown query kind '" + text + "'", line);
}

void reject_timed_modalities(const std::string& text, std::size_t line) {
  static const std::regex modality(R"((^|[^A-Za-z0-9_])(AF|EG|A\s*\[|E\s*\[)\s*(_?\[)?)");
  if (std::regex_search(text, modality))
    throw QueryError("timed A-eventually, E-globally and until modalities are unsupported - see concrete LTL (query mc-ltl)",
                     line);
}

}  // namespace

Query parse_query(const std::string& text) {
  Query q;
  bool have_kind = false;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string l = trim(raw);
    if (l.empty()) continue;
    auto space = l.find_first_of(" \t");
    std::string key = l.substr(0, space);
    std::string value = space == std::string::npos ? std::string{} : trim(l.substr(space));
    if (value.empty()) throw QueryError("'" + key + "' needs a value", line);

    if (key == "query") {
      q.kind = parse_kind(value, line);
      have_kind = true;
    } else if (key == "init") {
      q.init = value;
    } else if (key == "goal") {
      reject_timed_modalities(value, line);
      q.goal = value;
    } else if (key == "safe") {
      reject_timed_modalities(value, line);
      q.safe = value;
    } else if (key == "ltl") {
      q.ltl = value;
    } else if (key == "path") {
      if (value != "all" && value != "exists") throw QueryError("path is 'all' or 'exists'", line);
      q.ltl_exists = value == "exists";
    } else if (key == "window") {
      static const std::regex window(R"(^\[\s*([^,]+?)\s*,\s*([^\]]+?)\s*\]$)");
      std::smatch m;
      if (!std::regex_match(value, m, window)) throw QueryError("window must read [lo, hi]", line);
      q.window_lo = m[1];
      q.window_hi = (m[2] == "inf" || m[2] == "infinity") ? std::string{} : std::string(m[2]);
    } else if (key == "trigger") {
      q.trigger = value;
    } else if (key == "response") {
      q.response = value;
    } else if (key == "bound") {
      q.bound = value;
    } else if (key == "engine") {
      try {
        q.engine = parse_engine(value);
      } catch (const QueryError& e) {
        throw QueryError(e.what(), line);
      }
    } else if (key == "params") {
      std::stringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        auto eqpos = item.find('=');
        if (eqpos == std::string::npos) throw QueryError("params entries read name = value", line);
        q.params.emplace_back(trim(item.substr(0, eqpos)), trim(item.substr(eqpos + 1)));
      }
    } else if (key == "mode") {
      if (value != "r0" && value != "r1" && value != "r2" && value != "timed")
        throw QueryError("mode is r0, r1, r2 or timed", line);
      q.mode = value;
    } else if (key == "step") {
      q.step = value;
    } else if (key == "steps") {
      q.steps = parse_count(key, value, line);
    } else if (key == "seed") {
      q.seed = static_cast<unsigned>(parse_count(key, value, line));
    } else if (key == "max-depth") {
      q.max_depth = parse_count(key, value, line);
    } else if (key == "max-states") {
      q.max_states = parse_count(key, value, line);
    } else if (key == "max-solutions") {
      q.max_solutions = parse_count(key, value, line);
    } else if (key == "max-iterations") {
      q.max_iterations = parse_count(key, value, line);
    } else if (key == "timeout") {
      try {
        q.timeout = std::stod(value);
      } catch (const std::exception&) {
        throw QueryError("timeout needs a number of seconds", line);
      }
    } else if (key == "strategy") {
      auto eqpos = value.find('=');
      if (eqpos == std::string::npos) throw QueryError("strategy reads <name> = <expression>", line);
      q.strategies.emplace_back(trim(value.substr(0, eqpos)), trim(value.substr(eqpos + 1)));
    } else if (key == "use") {
      q.use_strategy = value;
    } else {
      throw QueryError("unknown key '" + key + "'", line);
    }
  }
  if (!have_kind) throw QueryError("missing 'query <kind>' line");
  auto need = [&](const std::string& field, const char* name) {
    if (field.empty()) throw QueryError(to_string(q.kind) + " needs '" + name + "'");
  };
  switch (q.kind) {
    case QueryKind::SearchEf:
    case QueryKind::EfSynth: need(q.goal, "goal"); break;
    case QueryKind::EfTimed:
      need(q.goal, "goal");
      need(q.window_lo, "window");
      break;
    case QueryKind::CheckAg:
    case QueryKind::AgSynth: need(q.safe, "safe"); break;
    case QueryKind::McLtl: need(q.ltl, "ltl"); break;
    case QueryKind::BoundedResponse:
      need(q.trigger, "trigger");
      need(q.response, "response");
      need(q.bound, "bound");
      break;
    case QueryKind::Simulate: break;
  }
  return q;
}

Query load_query(const std::string& path) { return parse_query(read_file(path)); }

namespace {

using Clock = std::chrono::steady_clock;

EngineKind default_engine(QueryKind k) {
  switch (k) {
    case QueryKind::Simulate:
    case QueryKind::McLtl: return EngineKind::Concrete;
    default: return EngineKind::Folded;
  }
}

class Runner {
 public:
  Runner(const Net& net, const Query& q, const RunOptions& o) : net_(net), q_(q), opts_(o) {
    engine_ = opts_.engine ? *opts_.engine : q_.engine ? *q_.engine : default_engine(q_.kind);
    timeout_ = opts_.timeout ? opts_.timeout : q_.timeout;
    report_.model = opts_.model_name.empty() ? net_.name : opts_.model_name;
    report_.query = to_string(q_.kind);
    report_.engine = to_string(engine_);
    report_.solver = opts_.solver.name + (opts_.solver.executable.empty() ? "" : " (" + opts_.solver.executable + ")");
    load_strategy();
  }

  Report run() {
    auto start = Clock::now();
    switch (q_.kind) {
      case QueryKind::Simulate: simulate(); break;
      case QueryKind::SearchEf: reach(parse_predicate(q_.goal), false); break;
      case QueryKind::CheckAg: reach(!parse_predicate(q_.safe), true); break;
      case QueryKind::McLtl: mc_ltl(); break;
      case QueryKind::EfSynth:
      case QueryKind::AgSynth:
      case QueryKind::EfTimed: synth(); break;
      case QueryKind::BoundedResponse: bounded_response(); break;
    }
    report_.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return report_;
  }

 private:
  Formula parse_predicate(const std::string& text) const {
    try {
      return parse_formula(text, predicate_symbols(net_));
    } catch (const ParseError& e) {
      throw QueryError("cannot read '" + text + "': " + e.what());
    }
  }

  Formula phi0() const {
    try {
      return parse_formula(q_.init, parameter_symbols(net_));
    } catch (const ParseError& e) {
      throw QueryError("cannot read init '" + q_.init + "': " + e.what());
    }
  }

  void load_strategy() {
    std::string pick = q_.use_strategy;
    if (pick.empty() && q_.strategies.size() == 1) pick = q_.strategies.front().first;
    if (pick.empty()) {
      if (q_.strategies.size() > 1) throw QueryError("several strategies defined; select one with 'use <name>'");
      return;
    }
    for (const auto& [name, text] : q_.strategies) {
      if (name != pick) continue;
      try {
        strategy_ = strategy::parse(text, net_, name);
      } catch (const strategy::StrategyError& e) {
        throw QueryError("strategy " + name + ": " + e.what());
      }
      report_.notes.push_back("strategy " + strategy::to_string(*strategy_, net_));
      return;
    }
    throw QueryError("no strategy named '" + pick + "'");
  }

  const strategy::Strategy* strat() const { return strategy_ ? &*strategy_ : nullptr; }

  // Concrete engine helpers.

  ParamValuation valuation() const {
    ParamValuation v;
    for (const auto& [name, value] : q_.params) {
      if (!net_.find_param(name)) throw QueryError("params: '" + name + "' is not a parameter of the net");
      try {
        v[name] = parse_rational(value);
      } catch (const std::exception&) {
        throw QueryError("params: cannot read value '" + value + "' for " + name);
      }
    }
    return v;
  }

  Net instantiated() const {
    try {
      return instantiate(net_, valuation());
    } catch (const StructuralError& e) {
      throw QueryError(std::string("the concrete engine needs every parameter fixed: ") + e.what());
    }
  }

  concrete::Mode mode() const {
    if (q_.mode.empty())
      return q_.kind == QueryKind::Simulate || q_.kind == QueryKind::McLtl ? concrete::Mode::r0() : concrete::Mode::r1();
    if (q_.mode == "r0") return concrete::Mode::r0();
    if (q_.mode == "r2") return concrete::Mode::r2();
    if (q_.mode == "timed") return concrete::Mode::timed();
    return concrete::Mode::r1();
  }

  Formula with_params(const Formula& f) const {
    Substitution sigma;
    for (const auto& [name, value] : valuation()) sigma.emplace(name, Term(LinExpr(value)));
    return substitute(f, sigma);
  }

  void trace_lines(const concrete::Engine& engine, const concrete::Trace& t) {
    report_.witness.push_back(engine.describe(t.initial));
    for (std::size_t i = 0; i < t.events.size(); ++i)
      report_.witness.push_back(engine.describe(t.events[i]) + "  ->  " + engine.describe(t.states[i]));
  }

  void require_concrete() const {
    if (engine_ != EngineKind::Concrete)
      throw QueryError(to_string(q_.kind) + " runs on the concrete engine only");
  }

  void require_symbolic() const {
    if (engine_ == EngineKind::Concrete)
      throw QueryError(to_string(q_.kind) + " needs the symbolic or folded engine");
  }

  void simulate() {
    require_concrete();
    Net n = instantiated();
    concrete::Engine engine(n, mode(), parse_rational(q_.step));
    report_.sampled = true;
    concrete::Trace trace;
    trace.initial = engine.initial_state();
    std::mt19937 rng(q_.seed);
    concrete::State s = trace.initial;
    for (std::size_t i = 0; i < q_.steps; ++i) {
      auto next = engine.successors(s, strat());
      if (next.empty()) {
        report_.notes.push_back("deadlock after " + std::to_string(i) + " step(s)");
        break;
      }
      std::uniform_int_distribution<std::size_t> pick(0, next.size() - 1);
      auto& [event, state] = next[pick(rng)];
      trace.events.push_back(event);
      trace.states.push_back(state);
      s = state;
    }
    trace_lines(engine, trace);
    report_.verdict = "simulated";
    report_.conclusive = true;
    report_.states = trace.states.size() + 1;
  }

  symbolic::Budget budget() const {
    symbolic::Budget b;
    b.max_depth = q_.max_depth;
    b.max_solutions = q_.max_solutions;
    if (q_.max_states) b.max_states = *q_.max_states;
    if (timeout_) b.time_limit = std::chrono::milliseconds(static_cast<long long>(*timeout_ * 1000));
    return b;
  }

  // EF goal (invariant = false) or AG via a search for the violation.
  void reach(const Formula& goal, bool invariant) {
    const std::string found = invariant ? "violated" : "reachable";
    const std::string exhausted = invariant ? "holds" : "unreachable";
    if (engine_ == EngineKind::Concrete) {
      Net n = instantiated();
      concrete::Engine engine(n, mode(), parse_rational(q_.step));
      report_.sampled = true;
      concrete::SearchOptions so;
      so.max_depth = q_.max_depth;
      if (q_.max_states) so.max_states = *q_.max_states;
      so.strategy = strat();
      auto r = concrete::search_ef(engine, engine.initial_state(), concrete::compile(n, with_params(goal)), so);
      report_.states = r.states;
      if (r.verdict == concrete::Verdict::Found) {
        report_.verdict = found;
        report_.conclusive = true;
        trace_lines(engine, *r.witness);
      } else if (r.verdict == concrete::Verdict::NotFound) {
        report_.verdict = exhausted;
        report_.conclusive = true;
      } else {
        report_.notes.push_back(r.reason);
      }
      return;
    }
    smt::SolverSession solver(opts_.solver);
    const bool gt = free_vars(goal).count(global_time_var()) > 0;
    symbolic::Engine engine(net_, solver, {gt, strat()});
    std::vector<symbolic::SymbolicState> init;
    try {
      init = engine.initial_states(phi0());
    } catch (const symbolic::Inapplicable&) {
      report_.verdict = exhausted;
      report_.conclusive = true;
      report_.notes.push_back("initial constraint is unsatisfiable");
      return;
    }
    symbolic::Budget b = budget();
    if (!b.max_solutions) b.max_solutions = 1;
    symbolic::SearchResult r = engine_ == EngineKind::Folded ? folding::folded_search(engine, init, goal, b)
                                                               : symbolic::smt_search(engine, init, goal, b);
    report_.states = r.nodes.size();
    if (!r.solutions.empty()) {
      report_.verdict = found;
      report_.conclusive = true;
      const auto& sol = r.solutions.front();
      std::set<std::string> keep;
      for (const auto& p : net_.params) keep.insert(p.name);
      report_.constraint = synthesis::tidy(solver, synthesis::project_onto(solver, sol.witness, keep));
      symbolic_path(engine, r, sol.node);
      concretization(symbolic::concretize(engine, r, sol, goal));
    } else if (r.complete) {
      report_.verdict = exhausted;
      report_.conclusive = true;
    } else {
      report_.notes.push_back("search stopped early (" + r.stop_reason + ")");
    }
    report_.solver_calls = solver.stats().checks;
    report_.qe_tactic = solver.stats().qe_tactic;
  }

  void symbolic_path(const symbolic::Engine& engine, const symbolic::SearchResult& r, std::size_t node) {
    for (std::size_t n : r.path(node)) {
      const auto& step = r.nodes[n].step;
      if (step.kind == symbolic::Step::Kind::Tick) report_.witness.push_back("tick " + step.delay->name);
      if (step.kind == symbolic::Step::Kind::Fire)
        report_.witness.push_back("fire " + net_.transitions[step.transition].name);
    }
    report_.witness.push_back("final: " + engine.describe(r.nodes[node].state));
  }

  void concretization(const symbolic::Concretization& c) {
    std::string values;
    for (const auto& [name, value] : c.params) values += (values.empty() ? "" : ", ") + name + " = " + pitpn::to_string(value);
    if (c.replayed && c.goal_holds)
      report_.notes.push_back("witness replays concretely" + (values.empty() ? "" : " with " + values));
    else
      report_.notes.push_back("witness did not replay concretely: " + c.error);
  }

  void mc_ltl() {
    require_concrete();
    Net n = instantiated();
    concrete::Engine engine(n, mode(), parse_rational(q_.step));
    report_.sampled = true;
    ltl::Property prop;
    try {
      prop = ltl::parse(q_.ltl, n);
    } catch (const std::exception& e) {
      throw QueryError(std::string("ltl: ") + e.what());
    }
    std::size_t max_states = q_.max_states ? *q_.max_states : 2'000'000;
    auto r = ltl::model_check(engine, prop, !q_.ltl_exists, max_states);
    report_.states = r.graph_states;
    if (r.verdict == concrete::Verdict::Inconclusive) {
      report_.notes.push_back(r.reason);
      return;
    }
    report_.verdict = r.holds ? "holds" : "violated";
    report_.conclusive = true;
    const bool show = q_.ltl_exists ? r.holds : !r.holds;
    if (show) {
      report_.notes.push_back(q_.ltl_exists ? "witness lasso" : "counterexample lasso");
      for (const auto& s : r.stem) report_.witness.push_back(engine.describe(s));
      for (std::size_t i = 0; i < r.cycle.size(); ++i)
        report_.witness.push_back((i == 0 ? "cycle: " : "       ") + engine.describe(r.cycle[i]));
    }
  }

  synthesis::Options synth_options() const {
    synthesis::Options o;
    o.solver = opts_.solver;
    o.folded = engine_ == EngineKind::Folded;
    o.budget = budget();
    if (q_.max_iterations) o.max_iterations = *q_.max_iterations;
    o.strategy = strat();
    return o;
  }

  LinExpr window_expr(const std::string& text, Net& extended) const {
    Symbols s;
    s.identifier = [&extended](const std::string& id) -> std::optional<Term> {
      if (const Param* p = extended.find_param(id)) return Term::variable(p->var());
      if (id.empty() || !(std::isalpha(static_cast<unsigned char>(id[0])) || id[0] == '_')) return std::nullopt;
      return Term::variable(real_var(id));
    };
    try {
      return parse_linear(text, s);
    } catch (const ParseError& e) {
      throw QueryError("window: " + std::string(e.what()));
    }
  }

  void synth() {
    require_symbolic();
    auto o = synth_options();
    synthesis::Result r;
    if (q_.kind == QueryKind::EfSynth) {
      r = synthesis::ef_synth(net_, phi0(), parse_predicate(q_.goal), o);
    } else if (q_.kind == QueryKind::AgSynth) {
      r = synthesis::ag_synth(net_, phi0(), parse_predicate(q_.safe), o);
    } else {
      Net scratch = net_;
      synthesis::Window w{window_expr(q_.window_lo, scratch), std::nullopt};
      if (!q_.window_hi.empty()) w.hi = window_expr(q_.window_hi, scratch);
      r = synthesis::ef_timed(net_, phi0(), parse_predicate(q_.goal), w, o);
    }
    report_.constraint = r.constraint;
    report_.verdict = synthesis::to_string(r.status);
    report_.conclusive = r.status == synthesis::Status::Exact;
    report_.states = r.states;
    report_.solver_calls = r.solver_checks;
    report_.qe_tactic = r.qe_tactic;
    report_.notes.push_back(r.note);
    for (std::size_t i = 0; i < r.witnesses.size(); ++i) {
      const auto& w = r.witnesses[i];
      std::string steps;
      for (const auto& s : w.steps) steps += (steps.empty() ? "" : "; ") + s;
      report_.witness.push_back("path " + std::to_string(i + 1) + ": " + steps);
      report_.witness.push_back("  region: " + print_formula(w.region, &net_));
      if (w.concrete) concretization(*w.concrete);
    }
  }

  void bounded_response() {
    require_symbolic();
    if (engine_ == EngineKind::Symbolic) report_.notes.push_back("bounded response always runs the folded search");
    report_.engine = to_string(EngineKind::Folded);
    LinExpr bound;
    try {
      bound = parse_linear(q_.bound, parameter_symbols(net_));
    } catch (const ParseError& e) {
      throw QueryError("bound: " + std::string(e.what()));
    }
    auto r = synthesis::bounded_response(net_, phi0(), parse_predicate(q_.trigger), parse_predicate(q_.response), bound,
                                         synth_options());
    report_.verdict = synthesis::to_string(r.verdict);
    report_.conclusive = r.verdict != synthesis::Verdict::Inconclusive;
    report_.states = r.states;
    report_.solver_calls = r.solver_checks;
    report_.qe_tactic = r.qe_tactic;
    report_.notes.push_back(r.note);
    if (r.counterexample) {
      std::string steps;
      for (const auto& s : r.counterexample->steps) steps += (steps.empty() ? "" : "; ") + s;
      report_.witness.push_back("path: " + steps);
      report_.constraint = r.counterexample->region;
    }
  }

  const Net& net_;
  const Query& q_;
  const RunOptions& opts_;
  EngineKind engine_;
  std::optional<double> timeout_;
  std::optional<strategy::Strategy> strategy_;
  Report report_;
};

}  // namespace

Report run_query(const Net& net, const Query& query, const RunOptions& options) {
  return Runner(net, query, options).run();
}

}  // namespace pitpn::io
