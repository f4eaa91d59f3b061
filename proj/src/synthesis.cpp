#include "pitpn/synthesis.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pitpn::synthesis {

std::string to_string(Status s) {
  switch (s) {
    case Status::Exact: return "exact";
    case Status::UnderApprox: return "underapprox";
    case Status::OverApprox: return "overapprox";
    case Status::Unknown: return "unknown";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

Formula project_onto(smt::SolverSession& solver, const Formula& f, const std::set<std::string>& keep) {
  std::vector<Var> hidden;
  for (const auto& v : free_vars(f))
    if (!keep.count(v.name)) hidden.push_back(v);
  if (hidden.empty()) return f;
  return solver.project_out(hidden, f);
}

namespace {

Formula prune(smt::SolverSession& solver, const Formula& f) {
  if (f.kind() != Formula::Kind::And && f.kind() != Formula::Kind::Or) return f;
  const bool is_and = f.kind() == Formula::Kind::And;
  std::vector<Formula> parts;
  for (const auto& p : f.parts()) parts.push_back(prune(solver, p));
  for (std::size_t i = parts.size(); i-- > 0;) {
    std::vector<Formula> others;
    for (std::size_t j = 0; j < parts.size(); ++j)
      if (j != i) others.push_back(parts[j]);
    bool redundant = is_and ? solver.entails(Formula::conj(others), parts[i]) == true
                            : solver.entails(parts[i], Formula::disj(others)) == true;
    if (redundant) parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return is_and ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
}

void collect_atoms(const Formula& f, std::map<std::string, Formula>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom: out.emplace(f.to_string(), f); break;
    case Formula::Kind::Not: collect_atoms(f.body(), out); break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& p : f.parts()) collect_atoms(p, out);
      break;
    default: break;
  }
}

Formula complement(const Formula& atom) {
  const Term zero(LinExpr{});
  switch (atom.rel()) {
    case Rel::Lt: return atom.term() >= zero;
    case Rel::Le: return atom.term() > zero;
    case Rel::Ge: return atom.term() < zero;
    case Rel::Gt: return atom.term() <= zero;
    case Rel::Eq: return !atom;
  }
  return !atom;
}

// Disjunction of implicants of f, each a cube over the atoms of f shrunk
// while it still entails f. nullopt when the solver gives up or the cover
// grows past `max_cubes`.
std::optional<Formula> implicant_cover(smt::SolverSession& solver, const Formula& f, std::size_t max_cubes = 24) {
  std::map<std::string, Formula> atoms;
  collect_atoms(f, atoms);
  if (atoms.size() > 64) return std::nullopt;
  std::vector<Formula> cover;
  while (cover.size() < max_cubes) {
    auto out = solver.check_sat(f && !Formula::disj(cover), true);
    if (out.result == smt::SatResult::Unsat) return Formula::disj(cover);
    if (out.result != smt::SatResult::Sat) return std::nullopt;
    std::vector<Formula> cube;
    try {
      for (const auto& [text, a] : atoms) cube.push_back(evaluate(a, out.model) ? a : complement(a));
    } catch (const std::out_of_range&) {
      return std::nullopt;
    }
    // Literals that imply a sibling go first so the weaker bound survives.
    std::vector<int> strength(cube.size(), 0);
    for (std::size_t i = 0; i < cube.size(); ++i)
      for (std::size_t j = 0; j < cube.size(); ++j)
        if (i != j && free_vars(cube[i]) == free_vars(cube[j]) && solver.entails(cube[i], cube[j]) == true &&
            solver.entails(cube[j], cube[i]) != true)
          ++strength[i];
    std::vector<std::size_t> order(cube.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return strength[x] > strength[y]; });
    std::vector<bool> kept(cube.size(), true);
    for (std::size_t i : order) {
      kept[i] = false;
      std::vector<Formula> rest;
      for (std::size_t j = 0; j < cube.size(); ++j)
        if (kept[j]) rest.push_back(cube[j]);
      if (solver.entails(Formula::conj(rest), f) != true) kept[i] = true;
    }
    std::vector<Formula> shrunk;
    for (std::size_t j = 0; j < cube.size(); ++j)
      if (kept[j]) shrunk.push_back(cube[j]);
    cube = std::move(shrunk);
    cover.push_back(Formula::conj(std::move(cube)));
  }
  return std::nullopt;
}

Formula merge_equalities(const Formula& f) {
  if (f.kind() != Formula::Kind::And && f.kind() != Formula::Kind::Or) return f;
  std::vector<Formula> parts;
  for (const auto& p : f.parts()) parts.push_back(merge_equalities(p));
  if (f.kind() == Formula::Kind::Or) return Formula::disj(std::move(parts));
  // Every bound rewritten as u <= 0; u <= 0 together with -u <= 0 is u = 0.
  const Term zero(LinExpr{});
  std::map<std::string, std::pair<std::size_t, Term>> bounds;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].kind() != Formula::Kind::Atom) continue;
    if (parts[i].rel() == Rel::Le) bounds.emplace(to_string(parts[i].term()), std::make_pair(i, parts[i].term()));
    if (parts[i].rel() == Rel::Ge) {
      Term u = zero - parts[i].term();
      bounds.emplace(to_string(u), std::make_pair(i, u));
    }
  }
  std::vector<bool> drop(parts.size(), false);
  std::vector<Formula> merged;
  for (const auto& [key, entry] : bounds) {
    auto it = bounds.find(to_string(zero - entry.second));
    if (it == bounds.end() || drop[entry.first] || drop[it->second.first]) continue;
    drop[entry.first] = drop[it->second.first] = true;
    merged.push_back(eq(entry.second, zero));
  }
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (!drop[i]) merged.push_back(parts[i]);
  return Formula::conj(std::move(merged));
}

}  // namespace

Formula tidy(smt::SolverSession& solver, const Formula& f) {
  if (f.is_constant()) return f;
  if (solver.check_valid(f) == true) return Formula::truth();
  if (solver.check_sat(f, false).result == smt::SatResult::Unsat) return Formula::falsity();
  Formula simplified = normalize(prune(solver, solver.simplify(f)));
  if (auto cover = implicant_cover(solver, simplified)) {
    Formula c = normalize(prune(solver, *cover));
    if (c.to_string().size() < simplified.to_string().size()) return normalize(merge_equalities(c));
  }
  return normalize(merge_equalities(simplified));
}

namespace {

std::set<std::string> param_names(const Net& net) {
  std::set<std::string> out;
  for (const auto& p : net.params) out.insert(p.name);
  return out;
}

std::vector<symbolic::SymbolicState> initial(const symbolic::Engine& engine, const Formula& phi0,
                                             const Options& options) {
  if (options.initial) return {engine.init_state(*options.initial, phi0)};
  return engine.initial_states(phi0);
}

symbolic::SearchResult run(const symbolic::Engine& engine, const std::vector<symbolic::SymbolicState>& init,
                           const Formula& goal, const Options& options, const symbolic::Budget& budget) {
  if (options.folded) return folding::folded_search(engine, init, goal, budget);
  return symbolic::smt_search(engine, init, goal, budget);
}

Witness make_witness(const symbolic::Engine& engine, const symbolic::SearchResult& r, const symbolic::Solution& sol,
                     const Formula& goal, const Options& options) {
  Witness w;
  w.region = tidy(engine.solver(), project_onto(engine.solver(), sol.witness, param_names(engine.net())));
  for (std::size_t n : r.path(sol.node)) {
    const auto& step = r.nodes[n].step;
    if (step.kind == symbolic::Step::Kind::Tick) w.steps.push_back("tick " + step.delay->name);
    if (step.kind == symbolic::Step::Kind::Fire) w.steps.push_back("fire " + engine.net().transitions[step.transition].name);
  }
  if (options.concretize) w.concrete = symbolic::concretize(engine, r, sol, goal);
  return w;
}

Status status_of(const symbolic::SearchResult& r) {
  if (r.complete) return Status::Exact;
  if (r.unknown) return Status::Unknown;
  return Status::UnderApprox;
}

std::string stop_note(const symbolic::SearchResult& r) {
  if (r.complete) return "search completed";
  return "search stopped early (" + r.stop_reason + ")";
}

Result ef_on(const Net& net, const Formula& phi0, const Formula& goal, bool global_clock, const Options& options) {
  smt::SolverSession solver(options.solver);
  symbolic::Engine engine(net, solver, {global_clock, options.strategy});
  Result out;
  std::vector<symbolic::SymbolicState> init;
  try {
    init = initial(engine, phi0, options);
  } catch (const symbolic::Inapplicable&) {
    out.constraint = Formula::falsity();
    out.status = Status::Exact;
    out.note = "initial constraint is unsatisfiable";
    return out;
  }
  auto r = run(engine, init, goal, options, options.budget);
  std::vector<Formula> regions;
  for (const auto& sol : r.solutions) {
    out.witnesses.push_back(make_witness(engine, r, sol, goal, options));
    regions.push_back(out.witnesses.back().region);
  }
  out.constraint = tidy(solver, Formula::disj(regions));
  out.status = status_of(r);
  out.iterations = 1;
  out.states = r.nodes.size();
  out.solver_checks = solver.stats().checks;
  out.qe_tactic = solver.stats().qe_tactic;
  out.note = stop_note(r);
  return out;
}

}  // namespace

Result ef_synth(const Net& net, const Formula& phi0, const Formula& pred, const Options& options) {
  return ef_on(net, phi0, pred, false, options);
}

Result ef_timed(const Net& net, const Formula& phi0, const Formula& pred, const Window& window, const Options& options) {
  Net extended = net;
  std::set<Var> window_vars;
  for (const auto& [v, c] : window.lo.coeffs()) window_vars.insert(v);
  if (window.hi)
    for (const auto& [v, c] : window.hi->coeffs()) window_vars.insert(v);
  for (const auto& v : window_vars)
    if (!extended.find_param(v.name)) extended.params.push_back(Param{v.name, Sort::Real});
  Term gt = Term::variable(global_time_var());
  Formula goal = pred && (Term(window.lo) <= gt);
  if (window.hi) goal = goal && (gt <= Term(*window.hi));
  return ef_on(extended, phi0, goal, true, options);
}

Result ag_synth(const Net& net, const Formula& phi0, const Formula& safe, const Options& options) {
  Result out;
  Formula K = phi0;
  const Formula bad = !safe;
  const auto params = param_names(net);
  symbolic::Budget budget = options.budget;
  budget.max_solutions = 1;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    smt::SolverSession solver(options.solver);
    symbolic::Engine engine(net, solver, {false, options.strategy});
    std::vector<symbolic::SymbolicState> init;
    try {
      init = initial(engine, K, options);
    } catch (const symbolic::Inapplicable&) {
      out.constraint = Formula::falsity();
      out.status = Status::Exact;
      out.note = "no parameter values remain";
      return out;
    }
    auto r = run(engine, init, bad, options, budget);
    out.states += r.nodes.size();
    out.solver_checks += solver.stats().checks;
    if (!solver.stats().qe_tactic.empty()) out.qe_tactic = solver.stats().qe_tactic;
    if (!r.solutions.empty()) {
      out.witnesses.push_back(make_witness(engine, r, r.solutions.front(), bad, options));
      K = K && !out.witnesses.back().region;
      ++out.iterations;
      continue;
    }
    std::vector<Formula> base;
    for (const auto& s : init) base.push_back(s.formula());
    out.constraint = tidy(solver, project_onto(solver, Formula::disj(base), params));
    if (r.complete) {
      out.status = Status::Exact;
      out.note = "no counterexample left after " + std::to_string(out.iterations) + " iteration(s)";
    } else {
      out.status = r.unknown ? Status::Unknown : Status::OverApprox;
      out.note = "last search stopped early (" + r.stop_reason + "); unsafe values may remain";
    }
    return out;
  }
  smt::SolverSession solver(options.solver);
  out.constraint = tidy(solver, project_onto(solver, K, params));
  out.status = Status::OverApprox;
  out.note = "iteration cap of " + std::to_string(options.max_iterations) + " reached; unsafe values may remain";
  return out;
}

namespace {

CheckResult check_with(symbolic::Engine& engine, const Formula& phi0, const Formula& goal, const Options& options) {
  CheckResult out;
  std::vector<symbolic::SymbolicState> init;
  try {
    init = initial(engine, phi0, options);
  } catch (const symbolic::Inapplicable&) {
    out.verdict = Verdict::Holds;
    out.note = "initial constraint is unsatisfiable";
    return out;
  }
  symbolic::Budget budget = options.budget;
  budget.max_solutions = 1;
  auto r = folding::folded_search(engine, init, goal, budget);
  out.states = r.nodes.size();
  if (!r.solutions.empty()) {
    out.verdict = Verdict::Violated;
    out.counterexample = make_witness(engine, r, r.solutions.front(), goal, options);
  } else if (r.complete) {
    out.verdict = Verdict::Holds;
  }
  out.note = stop_note(r);
  out.solver_checks = engine.solver().stats().checks;
  out.qe_tactic = engine.solver().stats().qe_tactic;
  return out;
}

}  // namespace

CheckResult bounded_response(const Net& net, const Formula& phi0, const Formula& trigger, const Formula& response,
                             const LinExpr& bound, const Options& options) {
  smt::SolverSession solver(options.solver);
  symbolic::Engine engine(net, solver, {false, options.strategy});
  engine.track_response({trigger, response});
  Formula goal = Term::variable(real_var(symbolic::response_hole())) > Term(bound);
  return check_with(engine, phi0, goal, options);
}

CheckResult ag_check(const Net& net, const Formula& phi0, const Formula& safe, const Options& options) {
  smt::SolverSession solver(options.solver);
  symbolic::Engine engine(net, solver, {false, options.strategy});
  return check_with(engine, phi0, !safe, options);
}

}  // namespace pitpn::synthesis
