#include "pitpn/folding.hpp"

#include <set>

namespace pitpn::folding {

Var canonical_place(const std::string& place) { return int_var("%m." + place); }
Var canonical_clock(const std::string& transition) { return real_var("%c." + transition); }
Var canonical_global_time() { return real_var("%gt"); }
Var canonical_response() { return real_var("%rc"); }

bool ProjectedState::comparable(const ProjectedState& other) const {
  return tick_ok == other.tick_ok && has_global_time == other.has_global_time &&
         has_response == other.has_response && ground == other.ground;
}

ProjectedState project_now(const symbolic::Engine& engine, const symbolic::SymbolicState& s,
                           smt::SolverSession& solver) {
  const Net& net = engine.net();
  ProjectedState p;
  p.tick_ok = s.tick_ok;
  p.has_global_time = s.global_time.has_value();
  p.has_response = s.response.has_value();

  std::vector<Formula> body = s.constraint;
  std::set<std::string> keep;
  for (const auto& param : net.params) keep.insert(param.name);
  auto bind = [&](const Var& v, const Term& value) {
    keep.insert(v.name);
    body.push_back(eq(Term::variable(v), value));
  };
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    const LinExpr& m = s.marking[i];
    if (m.is_constant() && is_integral(m.constant())) {
      p.ground.push_back(boost::multiprecision::numerator(m.constant()).convert_to<std::int64_t>());
    } else {
      p.ground.push_back(std::nullopt);
      bind(canonical_place(net.places[i]), Term(m));
    }
  }
  for (std::size_t t = 0; t < net.transitions.size(); ++t) bind(canonical_clock(net.transitions[t].name), s.clocks[t]);
  if (s.global_time) bind(canonical_global_time(), *s.global_time);
  if (s.response) bind(canonical_response(), *s.response);

  Formula f = Formula::conj(std::move(body));
  std::vector<Var> hidden;
  for (const auto& v : free_vars(f))
    if (!keep.count(v.name)) hidden.push_back(v);
  Formula closed = Formula::exists(hidden, f);
  try {
    p.closure = solver.eliminate(closed);
  } catch (const smt::SolverError&) {
    p.closure = closed;
    p.eliminated = false;
  }
  return p;
}

symbolic::SymbolicState rebase(const symbolic::Engine& engine, const symbolic::SymbolicState& s,
                               const ProjectedState& p) {
  if (!p.eliminated) return s;
  const Net& net = engine.net();
  symbolic::SymbolicState out = s;
  Substitution sigma;
  auto renew = [&](const Var& canonical, const std::string& kind, const std::string& id, Sort sort) {
    Var v{symbolic::fresh_name(kind, id, out.fresh++), sort};
    sigma.emplace(canonical.name, Term::variable(v));
    return v;
  };
  for (std::size_t i = 0; i < net.places.size(); ++i)
    if (!p.ground[i]) out.marking[i] = LinExpr::variable(renew(canonical_place(net.places[i]), "m", net.places[i], Sort::Int));
  for (std::size_t t = 0; t < net.transitions.size(); ++t) {
    const Term& c = s.clocks[t];
    const std::string& name = net.transitions[t].name;
    if (c.is_linear() && c.linear().is_constant()) {
      sigma.emplace(canonical_clock(name).name, c);
    } else {
      out.clocks[t] = Term::variable(renew(canonical_clock(name), "c", name, Sort::Real));
    }
  }
  if (s.global_time) out.global_time = Term::variable(renew(canonical_global_time(), "gt", "GT", Sort::Real));
  if (s.response) out.response = Term::variable(renew(canonical_response(), "rc", "R", Sort::Real));
  out.constraint.clear();
  for (const auto& f : conjuncts(substitute(p.closure, sigma)))
    if (!f.is_true()) out.constraint.push_back(f);
  return out;
}

std::optional<bool> subsumes(smt::SolverSession& solver, const ProjectedState& u, const ProjectedState& v) {
  if (!u.comparable(v)) return false;
  auto r = solver.check_sat(u.closure && !v.closure, false).result;
  if (r == smt::SatResult::Unknown) return std::nullopt;
  return r == smt::SatResult::Unsat;
}

bool VisitedSet::insert_if_new(ProjectedState p) {
  for (auto it = members_.rbegin(); it != members_.rend(); ++it) {
    if (!p.comparable(*it)) continue;
    ++checks_;
    auto r = subsumes(*solver_, p, *it);
    if (!r) {
      ++unknowns_;
      continue;
    }
    if (*r) return false;
  }
  members_.push_back(std::move(p));
  return true;
}

FoldedResult folded_search(const symbolic::Engine& engine, const std::vector<symbolic::SymbolicState>& init,
                           const Formula& goal, const symbolic::Budget& budget) {
  smt::SolverSession& solver = engine.solver();
  if (!solver.supports_qe())
    throw smt::UnsupportedOperation("folding needs quantifier elimination, which solver '" + solver.config().name +
                                    "' does not provide");
  VisitedSet visited(solver);
  auto admit = [&](symbolic::SymbolicState& s) {
    if (!visited.insert_if_new(project_now(engine, s, solver))) return false;
    s = rebase(engine, s, visited.members().back());
    return true;
  };
  FoldedResult r;
  static_cast<symbolic::SearchResult&>(r) = symbolic::search(engine, init, goal, budget, admit);
  r.visited_set_size = visited.size();
  return r;
}

}  // namespace pitpn::folding
