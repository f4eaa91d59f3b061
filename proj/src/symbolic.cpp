#include "pitpn/symbolic.hpp"

#include "pitpn/native_format.hpp"

#include <algorithm>
#include <deque>

namespace pitpn::symbolic {

std::string response_hole() { return "$rc"; }

std::string fresh_name(const std::string& kind, const std::string& id, std::size_t counter) {
  return "#" + kind + "-" + id + "-" + std::to_string(counter);
}

Engine::Engine(const Net& net, smt::SolverSession& solver, EngineOptions options)
    : net_(net), solver_(&solver), options_(options) {
  if (net_.places.empty()) throw StructuralError("net has no places");
  if (net_.initial.size() != net_.places.size()) throw StructuralError("initial marking does not match the places");
}

bool Engine::satisfiable(const Formula& f) const {
  auto r = solver_->check_sat(f, false);
  if (r.result == smt::SatResult::Unknown) throw SolverUnknown("solver could not decide satisfiability: " + r.reason);
  return r.result == smt::SatResult::Sat;
}

SymbolicState Engine::init_state(const Formula& phi0) const { return init_state(net_.initial, phi0); }

SymbolicState Engine::init_state(const Marking& m0, const Formula& phi0) const {
  if (m0.size() != net_.places.size()) throw StructuralError("initial marking does not match the places");
  SymbolicState s;
  s.marking = m0;
  s.clocks.assign(net_.transitions.size(), Term(0));
  if (options_.global_clock) s.global_time = Term(0);
  auto add = [&](const Formula& f) {
    if (!f.is_true()) s.constraint.push_back(f);
  };
  add(phi0);
  add(net_.constraint);
  for (const auto& p : net_.params) add(Term::variable(p.var()) >= Term(0));
  for (const auto& e : m0) add(Term(e) >= Term(0));
  for (const auto& t : net_.transitions) {
    add(Term(t.interval.lo) >= Term(0));
    if (t.interval.hi.value) add(Term(t.interval.lo) <= Term(*t.interval.hi.value));
  }
  if (!satisfiable(s.formula())) throw Inapplicable("initial constraint is unsatisfiable");
  return s;
}

std::vector<SymbolicState> Engine::initial_states(const Formula& phi0) const {
  SymbolicState s = init_state(phi0);
  if (!response_) return {s};
  return split_response(s);
}

Formula Engine::mte_predicate(const SymbolicState& s, const Term& delay) const {
  std::vector<Formula> parts;
  for (std::size_t t = 0; t < net_.transitions.size(); ++t) {
    const auto& hi = net_.transitions[t].interval.hi.value;
    if (!hi) continue;
    parts.push_back(Formula::ite(active(net_, s.marking, t), delay <= Term(*hi) - s.clocks[t], Formula::truth()));
  }
  return Formula::conj(std::move(parts));
}

Term Engine::fresh_definition(SymbolicState& s, const std::string& kind, const std::string& id,
                              const Term& value) const {
  if (value.is_linear()) return value;
  Term v = Term::variable(real_var(fresh_name(kind, id, s.fresh++)));
  s.constraint.push_back(eq(v, value));
  return v;
}

std::optional<SymbolicState> Engine::tick_unchecked(const SymbolicState& s) const {
  if (!s.tick_ok) return std::nullopt;
  SymbolicState out = s;
  Term delay = Term::variable(real_var(fresh_name("tick", "T", out.fresh++)));
  out.constraint.push_back(delay >= Term(0));
  Formula mte = mte_predicate(s, delay);
  if (mte.is_false()) return std::nullopt;
  if (!mte.is_true()) out.constraint.push_back(mte);
  for (std::size_t t = 0; t < net_.transitions.size(); ++t) {
    Term advanced = Term::ite(active(net_, s.marking, t), s.clocks[t] + delay, s.clocks[t]);
    out.clocks[t] = fresh_definition(out, "clock", net_.transitions[t].name, advanced);
  }
  if (out.global_time) out.global_time = *out.global_time + delay;
  if (out.response) out.response = *out.response + delay;
  out.tick_ok = false;
  return out;
}

std::optional<SymbolicState> Engine::fire_unchecked(const SymbolicState& s, std::size_t t) const {
  const Transition& tr = net_.transitions.at(t);
  Formula act = active(net_, s.marking, t);
  if (act.is_false()) return std::nullopt;
  SymbolicState out = s;
  std::vector<Formula> guard{act, Term(tr.interval.lo) <= s.clocks[t]};
  if (tr.interval.hi.value) guard.push_back(s.clocks[t] <= Term(*tr.interval.hi.value));
  Formula g = Formula::conj(std::move(guard));
  if (g.is_false()) return std::nullopt;
  if (!g.is_true()) out.constraint.push_back(g);
  out.marking = fire_marking(net_, s.marking, t);
  for (std::size_t u = 0; u < net_.transitions.size(); ++u) {
    if (u == t) {
      out.clocks[u] = Term(0);
      continue;
    }
    Term kept = Term::ite(enabled_in_intermediate(net_, u, s.marking, t), s.clocks[u], Term(0));
    out.clocks[u] = fresh_definition(out, "clock", net_.transitions[u].name, kept);
  }
  out.tick_ok = true;
  return out;
}

SymbolicState Engine::tick(const SymbolicState& s) const {
  if (!s.tick_ok) throw Inapplicable("tick after tick");
  auto out = tick_unchecked(s);
  if (!out || !satisfiable(out->formula())) throw Inapplicable("tick constraint is unsatisfiable");
  return *out;
}

SymbolicState Engine::fire(const SymbolicState& s, std::size_t t) const {
  auto out = fire_unchecked(s, t);
  if (!out || !satisfiable(out->formula()))
    throw Inapplicable("transition " + net_.transitions.at(t).name + " cannot fire");
  return *out;
}

std::vector<SymbolicState> Engine::split_response(const SymbolicState& s) const {
  std::vector<SymbolicState> out;
  Formula psi = instantiate(response_->response, s);
  auto branch = [&](const Formula& cond, std::optional<Term> clock) {
    if (cond.is_false()) return;
    SymbolicState b = s;
    if (!cond.is_true()) {
      b.constraint.push_back(cond);
      if (!satisfiable(b.formula())) return;
    }
    b.response = std::move(clock);
    out.push_back(std::move(b));
  };
  if (!s.response) {
    Formula start = instantiate(response_->trigger, s) && !psi;
    branch(start, Term(0));
    branch(!start, std::nullopt);
  } else {
    branch(psi, std::nullopt);
    branch(!psi, s.response);
  }
  return out;
}

std::vector<std::pair<Step, SymbolicState>> Engine::successors(const SymbolicState& s) const {
  std::vector<strategy::Option> options;
  std::vector<std::optional<SymbolicState>> fired(net_.transitions.size());
  for (std::size_t t = 0; t < net_.transitions.size(); ++t) {
    auto next = fire_unchecked(s, t);
    if (!next || !satisfiable(next->formula())) continue;
    fired[t] = std::move(next);
    options.push_back(strategy::Option::fire(t));
  }
  if (s.tick_ok) options.push_back(strategy::Option::tick());
  if (options_.strategy && !options_.strategy->is_all())
    options = strategy::filter_successors(options, *options_.strategy, [](const strategy::Option&) { return true; });

  std::vector<std::pair<Step, SymbolicState>> out;
  for (const auto& o : options) {
    if (o.is_tick) {
      auto next = tick_unchecked(s);
      if (!next || !satisfiable(next->formula())) continue;
      Step step{Step::Kind::Tick, real_var(fresh_name("tick", "T", s.fresh)), 0};
      out.emplace_back(step, std::move(*next));
      continue;
    }
    Step step{Step::Kind::Fire, std::nullopt, o.transition};
    if (response_) {
      for (auto& b : split_response(*fired[o.transition])) out.emplace_back(step, std::move(b));
    } else {
      out.emplace_back(step, std::move(*fired[o.transition]));
    }
  }
  return out;
}

Formula Engine::instantiate(const Formula& predicate, const SymbolicState& s) const {
  Substitution sigma;
  for (std::size_t p = 0; p < net_.places.size(); ++p) sigma.emplace(place_hole(net_.places[p]), Term(s.marking[p]));
  for (std::size_t t = 0; t < net_.transitions.size(); ++t)
    sigma.emplace(clock_hole(net_.transitions[t].name), s.clocks[t]);
  sigma.emplace(response_hole(), s.response ? *s.response : Term(-1));
  if (s.global_time) {
    sigma.emplace(global_time_hole(), *s.global_time);
  } else {
    for (const auto& v : free_vars(predicate))
      if (v.name == global_time_hole()) throw StructuralError("predicate mentions the global clock, which is off");
  }
  return substitute(predicate, sigma);
}

std::string Engine::describe(const SymbolicState& s) const {
  std::string out = s.tick_ok ? "tickOk" : "tickNotOk";
  out += " m:";
  for (std::size_t p = 0; p < net_.places.size(); ++p) out += " " + net_.places[p] + "=" + to_string(Term(s.marking[p]));
  out += " clocks:";
  for (std::size_t t = 0; t < net_.transitions.size(); ++t)
    out += " " + net_.transitions[t].name + "=" + to_string(s.clocks[t]);
  if (s.global_time) out += " GT=" + to_string(*s.global_time);
  if (s.response) out += " response=" + to_string(*s.response);
  return out;
}

std::vector<std::size_t> SearchResult::path(std::size_t node) const {
  std::vector<std::size_t> out;
  for (std::optional<std::size_t> n = node; n; n = nodes[*n].parent) out.push_back(*n);
  std::reverse(out.begin(), out.end());
  return out;
}

SearchResult search(const Engine& engine, const std::vector<SymbolicState>& init, const Formula& goal,
                    const Budget& budget, const Admission& admit) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  SearchResult r;
  std::deque<std::size_t> queue;
  bool cut = false;
  auto stop = [&](const std::string& why) {
    if (r.stop_reason.empty()) r.stop_reason = why;
  };

  r.roots = init;
  for (std::size_t k = 0; k < init.size(); ++k) {
    SymbolicState s = init[k];
    if (admit && !admit(s)) {
      ++r.subsumed;
      continue;
    }
    r.nodes.push_back({std::move(s), {}, std::nullopt, 0, k});
    queue.push_back(r.nodes.size() - 1);
  }

  while (!queue.empty()) {
    if (budget.time_limit && clock::now() - start > *budget.time_limit) {
      stop("time");
      break;
    }
    std::size_t cur = queue.front();
    queue.pop_front();
    ++r.visited;
    try {
      const SymbolicState& s = r.nodes[cur].state;
      if (!goal.is_false()) {
        Formula witness = s.formula() && engine.instantiate(goal, s);
        if (!witness.is_false() && engine.satisfiable(witness)) {
          r.solutions.push_back({cur, witness});
          if (budget.max_solutions && r.solutions.size() >= *budget.max_solutions) {
            stop("solutions");
            queue.push_front(cur);  // its successors are unexplored
            break;
          }
        }
      }
      if (budget.max_depth && r.nodes[cur].depth >= *budget.max_depth) {
        cut = true;
        continue;
      }
      auto succ = engine.successors(r.nodes[cur].state);
      for (auto& [step, next] : succ) {
        if (admit && !admit(next)) {
          ++r.subsumed;
          continue;
        }
        if (r.nodes.size() >= budget.max_states) {
          stop("states");
          break;
        }
        r.nodes.push_back({std::move(next), step, cur, r.nodes[cur].depth + 1, r.nodes[cur].root});
        queue.push_back(r.nodes.size() - 1);
      }
      if (r.stop_reason == "states") {
        queue.push_front(cur);
        break;
      }
    } catch (const SolverUnknown&) {
      ++r.unknown;
      cut = true;
    }
  }
  r.frontier = queue.size();
  if (r.stop_reason.empty() && cut) r.stop_reason = r.unknown ? "unknown" : "depth";
  r.complete = r.stop_reason.empty() && queue.empty();
  return r;
}

SearchResult smt_search(const Engine& engine, const std::vector<SymbolicState>& init, const Formula& goal,
                        const Budget& budget) {
  return search(engine, init, goal, budget, {});
}

Concretization concretize(const Engine& engine, const SearchResult& result, const Solution& solution,
                          const Formula& goal) {
  Concretization c;
  const auto& spec = engine.response_spec();
  std::vector<std::size_t> path = result.path(solution.node);
  SymbolicState s = result.roots.at(result.nodes[path.front()].root);
  std::vector<std::optional<std::string>> delays;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Step& step = result.nodes[path[k]].step;
    std::optional<SymbolicState> next;
    if (step.kind == Step::Kind::Tick) {
      delays.push_back(fresh_name("tick", "T", s.fresh));
      next = engine.tick_unchecked(s);
    } else {
      delays.push_back(std::nullopt);
      next = engine.fire_unchecked(s, step.transition);
    }
    if (next && spec && step.kind == Step::Kind::Fire) {
      bool running = result.nodes[path[k]].state.response.has_value();
      std::optional<SymbolicState> branch;
      for (auto& b : engine.split_response(*next))
        if (b.response.has_value() == running) branch = std::move(b);
      next = std::move(branch);
    }
    if (!next) {
      c.error = "path step is not applicable when re-derived";
      return c;
    }
    s = std::move(*next);
  }
  auto outcome = engine.solver().check_sat(s.formula() && engine.instantiate(goal, s), true);
  if (outcome.result != smt::SatResult::Sat) {
    c.error = "re-derived path constraint is not satisfiable (" + smt::to_string(outcome.result) + ")";
    return c;
  }
  const Assignment& model = outcome.model;
  auto value = [&](const std::string& name) {
    auto it = model.find(name);
    return it == model.end() ? Rational(0) : it->second;
  };
  const Net& net = engine.net();
  for (const auto& p : net.params) c.params[p.name] = value(p.name);
  Net inst;
  try {
    inst = pitpn::instantiate(net, c.params);
  } catch (const std::exception& e) {
    c.error = std::string("instantiation failed: ") + e.what();
    return c;
  }
  concrete::Engine ce(inst, concrete::Mode{true, engine.options().global_clock});
  c.trace.initial = ce.initial_state();
  concrete::State cur = c.trace.initial;
  try {
    for (std::size_t k = 1; k < path.size(); ++k) {
      const Step& step = result.nodes[path[k]].step;
      concrete::Event e = step.kind == Step::Kind::Tick ? concrete::Event::tick(value(*delays[k - 1]))
                                                        : concrete::Event::fire(step.transition);
      cur = ce.apply(cur, e);
      c.trace.events.push_back(e);
      c.trace.states.push_back(cur);
    }
  } catch (const concrete::RuleNotApplicable& e) {
    c.error = std::string("replay failed: ") + e.what();
    return c;
  }
  c.replayed = ce.replay(c.trace, &c.error);
  Substitution sigma;
  for (const auto& [name, v] : c.params) sigma.emplace(name, Term(v));
  if (!spec) {
    c.goal_holds = concrete::compile(inst, substitute(goal, sigma))(c.trace.last());
    return c;
  }
  auto trigger = concrete::compile(inst, substitute(spec->trigger, sigma));
  auto response = concrete::compile(inst, substitute(spec->response, sigma));
  std::optional<Rational> clock;
  auto reached = [&](const concrete::State& st) {
    if (clock && response(st)) clock.reset();
    else if (!clock && trigger(st) && !response(st)) clock = Rational(0);
  };
  reached(c.trace.initial);
  for (std::size_t k = 0; k < c.trace.events.size(); ++k) {
    if (c.trace.events[k].kind == concrete::Event::Kind::Tick) {
      if (clock) *clock += c.trace.events[k].delta;
    } else {
      reached(c.trace.states[k]);
    }
  }
  Assignment at_end = concrete::holes(inst, c.trace.last());
  at_end[response_hole()] = clock ? *clock : Rational(-1);
  c.goal_holds = evaluate(substitute(goal, sigma), at_end);
  return c;
}

}  // namespace pitpn::symbolic
