#include "pitpn/net.hpp"

#include "pitpn/smt.hpp"

#include <set>

namespace pitpn {

std::optional<std::size_t> Net::place_index(const std::string& id) const {
  for (std::size_t i = 0; i < places.size(); ++i)
    if (places[i] == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Net::transition_index(const std::string& id) const {
  for (std::size_t i = 0; i < transitions.size(); ++i)
    if (transitions[i].name == id) return i;
  return std::nullopt;
}

std::size_t Net::require_place(const std::string& id) const {
  if (auto i = place_index(id)) return *i;
  throw StructuralError("unknown place '" + id + "'");
}

std::size_t Net::require_transition(const std::string& id) const {
  if (auto i = transition_index(id)) return *i;
  throw StructuralError("unknown transition '" + id + "'");
}

const Param* Net::find_param(const std::string& id) const {
  for (const auto& p : params)
    if (p.name == id) return &p;
  return nullptr;
}

std::vector<Var> Net::param_vars() const {
  std::vector<Var> out;
  for (const auto& p : params) out.push_back(p.var());
  return out;
}

std::size_t Net::arc_count() const {
  std::size_t n = 0;
  for (const auto& t : transitions) n += t.pre.size() + t.post.size() + t.inhibit.size();
  return n;
}

std::optional<Tokens> Net::ground_initial() const { return ground(initial); }

namespace {

void check_place(const Net& net, std::size_t p) {
  if (p >= net.places.size()) throw StructuralError("arc references place index " + std::to_string(p));
}

const Transition& transition_at(const Net& net, std::size_t t) {
  if (t >= net.transitions.size()) throw StructuralError("unknown transition index " + std::to_string(t));
  return net.transitions[t];
}

const LinExpr& entry(const Net& net, const Marking& m, std::size_t p) {
  check_place(net, p);
  if (p >= m.size()) throw StructuralError("marking has no entry for place '" + net.places[p] + "'");
  return m[p];
}

Term as_term(const LinExpr& e) { return Term(e); }

}  // namespace

Formula enabled(const Net& net, const Marking& m, std::size_t t) {
  std::vector<Formula> parts;
  for (const auto& arc : transition_at(net, t).pre) parts.push_back(as_term(entry(net, m, arc.place)) >= Term(Rational(arc.weight)));
  return Formula::conj(std::move(parts));
}

Formula inhibited(const Net& net, const Marking& m, std::size_t t) {
  std::vector<Formula> parts;
  for (const auto& arc : transition_at(net, t).inhibit)
    if (arc.weight > 0) parts.push_back(as_term(entry(net, m, arc.place)) >= Term(Rational(arc.weight)));
  return Formula::disj(std::move(parts));
}

Formula active(const Net& net, const Marking& m, std::size_t t) {
  return enabled(net, m, t) && !inhibited(net, m, t);
}

Formula enabled_in_intermediate(const Net& net, std::size_t t, const Marking& m, std::size_t tf) {
  Marking mid = m;
  for (const auto& arc : transition_at(net, tf).pre) mid[arc.place] -= LinExpr(Rational(arc.weight));
  return enabled(net, mid, t);
}

Formula newly_enabled(const Net& net, std::size_t t, const Marking& m, std::size_t tf) {
  Formula after = enabled(net, fire_marking(net, m, tf), t);
  if (t == tf) return after;
  return after && !enabled_in_intermediate(net, t, m, tf);
}

Marking fire_marking(const Net& net, const Marking& m, std::size_t tf) {
  Marking out = m;
  const Transition& tr = transition_at(net, tf);
  for (const auto& arc : tr.pre) {
    check_place(net, arc.place);
    out[arc.place] -= LinExpr(Rational(arc.weight));
  }
  for (const auto& arc : tr.post) {
    check_place(net, arc.place);
    out[arc.place] += LinExpr(Rational(arc.weight));
  }
  return out;
}

Formula k_safe(std::int64_t k, const Marking& m) {
  std::vector<Formula> parts;
  for (const auto& e : m) parts.push_back(Term(e) <= Term(Rational(k)));
  return Formula::conj(std::move(parts));
}

bool enabled(const Net& net, const Tokens& m, std::size_t t) {
  for (const auto& arc : transition_at(net, t).pre)
    if (m[arc.place] < arc.weight) return false;
  return true;
}

bool inhibited(const Net& net, const Tokens& m, std::size_t t) {
  for (const auto& arc : transition_at(net, t).inhibit)
    if (arc.weight > 0 && m[arc.place] >= arc.weight) return true;
  return false;
}

bool active(const Net& net, const Tokens& m, std::size_t t) { return enabled(net, m, t) && !inhibited(net, m, t); }

bool enabled_in_intermediate(const Net& net, std::size_t t, const Tokens& m, std::size_t tf) {
  Tokens mid = m;
  for (const auto& arc : transition_at(net, tf).pre) mid[arc.place] -= arc.weight;
  return enabled(net, mid, t);
}

bool newly_enabled(const Net& net, std::size_t t, const Tokens& m, std::size_t tf) {
  bool after = enabled(net, fire_marking(net, m, tf), t);
  if (t == tf) return after;
  return after && !enabled_in_intermediate(net, t, m, tf);
}

Tokens fire_marking(const Net& net, const Tokens& m, std::size_t tf) {
  Tokens out = m;
  const Transition& tr = transition_at(net, tf);
  for (const auto& arc : tr.pre) out[arc.place] -= arc.weight;
  for (const auto& arc : tr.post) out[arc.place] += arc.weight;
  return out;
}

bool k_safe(std::int64_t k, const Tokens& m) {
  for (auto v : m)
    if (v > k) return false;
  return true;
}

Marking to_marking(const Tokens& tokens) {
  Marking m;
  m.reserve(tokens.size());
  for (auto v : tokens) m.emplace_back(Rational(v));
  return m;
}

std::optional<Tokens> ground(const Marking& m) {
  Tokens out;
  out.reserve(m.size());
  for (const auto& e : m) {
    if (!e.is_constant() || !is_integral(e.constant())) return std::nullopt;
    out.push_back(numerator(e.constant()).convert_to<std::int64_t>());
  }
  return out;
}

namespace {

LinExpr substitute_linear(const LinExpr& e, const ParamValuation& v) {
  LinExpr out(e.constant());
  for (const auto& [var, k] : e.coeffs()) {
    auto it = v.find(var.name);
    out += it == v.end() ? LinExpr::variable(var, k) : LinExpr(k * it->second);
  }
  return out;
}

}  // namespace

Net instantiate(const Net& net, const ParamValuation& valuation) {
  for (const auto& p : net.params) {
    auto it = valuation.find(p.name);
    if (it == valuation.end()) throw StructuralError("no value for parameter '" + p.name + "'");
    if (p.sort == Sort::Int && (!is_integral(it->second) || it->second < 0))
      throw StructuralError("marking parameter '" + p.name + "' needs a natural value");
  }
  if (!evaluate(net.constraint, valuation))
    throw StructuralError("parameter valuation violates the constraint " + net.constraint.to_string());
  Net out = net;
  out.params.clear();
  out.constraint = Formula::truth();
  for (auto& e : out.initial) e = substitute_linear(e, valuation);
  for (auto& t : out.transitions) {
    t.interval.lo = substitute_linear(t.interval.lo, valuation);
    if (t.interval.hi.value) t.interval.hi.value = substitute_linear(*t.interval.hi.value, valuation);
  }
  return out;
}

std::vector<std::string> validate(const Net& net, smt::SolverSession* solver) {
  std::vector<std::string> issues;
  if (net.places.empty()) issues.push_back("net has no places");
  if (net.transitions.empty()) issues.push_back("net has no transitions");

  std::set<std::string> seen;
  for (const auto& p : net.places) {
    if (p.empty()) issues.push_back("place with empty name");
    if (!seen.insert("p:" + p).second) issues.push_back("duplicate place '" + p + "'");
  }
  for (const auto& t : net.transitions) {
    if (t.name.empty()) issues.push_back("transition with empty name");
    if (!seen.insert("t:" + t.name).second) issues.push_back("duplicate transition '" + t.name + "'");
  }
  std::set<std::string> param_names;
  for (const auto& p : net.params)
    if (!param_names.insert(p.name).second) issues.push_back("duplicate parameter '" + p.name + "'");

  auto check_vars = [&](const std::set<Var>& vars, const std::string& where, std::optional<Sort> required) {
    for (const auto& v : vars) {
      const Param* p = net.find_param(v.name);
      if (!p) {
        issues.push_back(where + " mentions undeclared parameter '" + v.name + "'");
      } else if (required && p->sort != *required) {
        issues.push_back(where + " uses " + to_string(p->sort) + " parameter '" + v.name + "'");
      }
    }
  };
  auto lin_vars = [](const LinExpr& e) {
    std::set<Var> out;
    for (const auto& entry : e.coeffs()) out.insert(entry.first);
    return out;
  };

  if (net.initial.size() != net.places.size()) issues.push_back("initial marking does not cover every place");
  for (std::size_t i = 0; i < net.initial.size() && i < net.places.size(); ++i) {
    const LinExpr& e = net.initial[i];
    if (e.is_constant() && (e.constant() < 0 || !is_integral(e.constant())))
      issues.push_back("initial marking of '" + net.places[i] + "' is not a natural number");
    check_vars(lin_vars(e), "initial marking of '" + net.places[i] + "'", Sort::Int);
  }
  check_vars(free_vars(net.constraint), "constraint", std::nullopt);

  for (const auto& t : net.transitions) {
    auto arcs = [&](const std::vector<Arc>& list, const char* kind) {
      for (const auto& a : list) {
        if (a.place >= net.places.size()) {
          issues.push_back("transition '" + t.name + "' has a " + kind + " arc to an unknown place");
        } else if (a.weight <= 0) {
          issues.push_back("transition '" + t.name + "' has a non-positive " + kind + " weight on '" +
                           net.places[a.place] + "'");
        }
      }
    };
    arcs(t.pre, "input");
    arcs(t.post, "output");
    arcs(t.inhibit, "inhibitor");
    const auto& iv = t.interval;
    check_vars(lin_vars(iv.lo), "interval of '" + t.name + "'", Sort::Real);
    if (iv.hi.value) check_vars(lin_vars(*iv.hi.value), "interval of '" + t.name + "'", Sort::Real);
    if (iv.lo.is_constant() && iv.lo.constant() < 0) issues.push_back("interval of '" + t.name + "' has a negative lower bound");
    if (iv.hi.value && iv.lo.is_constant() && iv.hi.value->is_constant() && iv.lo.constant() > iv.hi.value->constant())
      issues.push_back("interval of '" + t.name + "' is empty: [" + iv.lo.to_string() + ", " + iv.hi.value->to_string() + "]");
  }

  if (solver && issues.empty()) {
    if (solver->check_sat(net.constraint, false).result == smt::SatResult::Unsat) {
      issues.push_back("constraint is unsatisfiable");
    } else {
      for (const auto& t : net.transitions) {
        const auto& iv = t.interval;
        Formula ok = Term(iv.lo) >= Term(0);
        if (iv.hi.value) ok = ok && Term(iv.lo) <= Term(*iv.hi.value);
        if (iv.lo.is_constant() && (!iv.hi.value || iv.hi.value->is_constant())) continue;
        if (solver->check_sat(net.constraint && ok, false).result == smt::SatResult::Unsat)
          issues.push_back("interval of '" + t.name + "' is empty under the constraint");
      }
    }
  }
  return issues;
}

std::string place_hole(const std::string& place) { return "$m." + place; }
std::string clock_hole(const std::string& transition) { return "$c." + transition; }
std::string global_time_hole() { return "$gt"; }
Var place_hole_var(const std::string& place) { return int_var(place_hole(place)); }
Var clock_hole_var(const std::string& transition) { return real_var(clock_hole(transition)); }
Var global_time_var() { return real_var(global_time_hole()); }

}  // namespace pitpn
