#include "pitpn/expr.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pitpn {

Rational parse_rational(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw std::invalid_argument("empty number");
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    s = s.substr(1);
  }
  auto digits_only = [](const std::string& d) {
    return !d.empty() && std::all_of(d.begin(), d.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  Rational value;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!digits_only(num) || !digits_only(den)) throw std::invalid_argument("bad rational: " + text);
    Integer d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: " + text);
    value = Rational(Integer(num), d);
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!digits_only(whole) || (!frac.empty() && !digits_only(frac)))
      throw std::invalid_argument("bad decimal: " + text);
    Integer scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    value = Rational(Integer(whole + frac), scale);
  } else {
    if (!digits_only(s)) throw std::invalid_argument("bad number: " + text);
    value = Rational(Integer(s));
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& r) {
  if (is_integral(r)) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

bool is_integral(const Rational& r) { return denominator(r) == 1; }

std::string to_string(Sort s) { return s == Sort::Int ? "Int" : "Real"; }

// ---------------------------------------------------------------- LinExpr

LinExpr::LinExpr(Rational constant) : constant_(std::move(constant)) {}

LinExpr LinExpr::variable(const Var& v, const Rational& coeff) {
  LinExpr e;
  if (coeff != 0) e.coeffs_.emplace(v, coeff);
  return e;
}

Rational LinExpr::coeff(const Var& v) const {
  auto it = coeffs_.find(v);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

Sort LinExpr::sort() const {
  if (!is_integral(constant_)) return Sort::Real;
  for (const auto& [v, k] : coeffs_)
    if (v.sort == Sort::Real || !is_integral(k)) return Sort::Real;
  return Sort::Int;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  constant_ += other.constant_;
  for (const auto& [v, k] : other.coeffs_) {
    auto [it, inserted] = coeffs_.emplace(v, k);
    if (!inserted) {
      it->second += k;
      if (it->second == 0) coeffs_.erase(it);
    }
  }
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) { return *this += -other; }

LinExpr& LinExpr::operator*=(const Rational& k) {
  if (k == 0) {
    constant_ = 0;
    coeffs_.clear();
    return *this;
  }
  constant_ *= k;
  for (auto& entry : coeffs_) entry.second *= k;
  return *this;
}

LinExpr LinExpr::operator-() const {
  LinExpr e = *this;
  e *= Rational(-1);
  return e;
}

std::string LinExpr::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [v, k] : coeffs_) {
    Rational mag = k < 0 ? Rational(-k) : k;
    if (first) {
      if (k < 0) out << "-";
    } else {
      out << (k < 0 ? " - " : " + ");
    }
    if (mag != 1) out << pitpn::to_string(mag) << "*";
    out << v.name;
    first = false;
  }
  if (first) return pitpn::to_string(constant_);
  if (constant_ != 0) out << (constant_ < 0 ? " - " : " + ") << pitpn::to_string(constant_ < 0 ? Rational(-constant_) : constant_);
  return out.str();
}

// ---------------------------------------------------------------- nodes

struct TermNode {
  Term::Kind kind = Term::Kind::Linear;
  LinExpr lin;
  std::optional<Formula> cond;
  std::optional<Term> a, b;
  Rational factor{1};

  static Term make(TermNode node) { return Term(std::make_shared<const TermNode>(std::move(node))); }
};

struct FormulaNode {
  Formula::Kind kind = Formula::Kind::True;
  std::optional<Term> term;
  Rel rel = Rel::Eq;
  std::optional<Formula> body;
  std::vector<Formula> parts;
  std::vector<Var> bound;

  static Formula make(FormulaNode node) { return Formula(std::make_shared<const FormulaNode>(std::move(node))); }
};

namespace {
const std::shared_ptr<const FormulaNode>& true_node() {
  static const auto node = [] {
    FormulaNode n;
    n.kind = Formula::Kind::True;
    return std::make_shared<const FormulaNode>(std::move(n));
  }();
  return node;
}
const std::shared_ptr<const FormulaNode>& false_node() {
  static const auto node = [] {
    FormulaNode n;
    n.kind = Formula::Kind::False;
    return std::make_shared<const FormulaNode>(std::move(n));
  }();
  return node;
}
}  // namespace

// ---------------------------------------------------------------- Term

Term::Term() : Term(LinExpr()) {}

Term::Term(LinExpr lin) {
  TermNode n;
  n.kind = Kind::Linear;
  n.lin = std::move(lin);
  node_ = std::make_shared<const TermNode>(std::move(n));
}

Term Term::variable(const Var& v) { return Term(LinExpr::variable(v)); }

Term Term::ite(const Formula& cond, const Term& then_term, const Term& else_term) {
  if (cond.is_true()) return then_term;
  if (cond.is_false()) return else_term;
  if (then_term == else_term) return then_term;
  TermNode n;
  n.kind = Kind::Ite;
  n.cond = cond;
  n.a = then_term;
  n.b = else_term;
  return TermNode::make(std::move(n));
}

Term::Kind Term::kind() const { return node_->kind; }

const LinExpr& Term::linear() const {
  if (node_->kind != Kind::Linear) throw std::logic_error("term is not linear: " + pitpn::to_string(*this));
  return node_->lin;
}
const Formula& Term::condition() const { return *node_->cond; }
const Term& Term::lhs() const { return *node_->a; }
const Term& Term::rhs() const { return *node_->b; }
const Rational& Term::factor() const { return node_->factor; }

Sort Term::sort() const {
  switch (node_->kind) {
    case Kind::Linear: return node_->lin.sort();
    case Kind::Ite:
    case Kind::Add:
      return lhs().sort() == Sort::Int && rhs().sort() == Sort::Int ? Sort::Int : Sort::Real;
    case Kind::Scale:
      return is_integral(node_->factor) ? lhs().sort() : Sort::Real;
  }
  return Sort::Real;
}

Term operator+(const Term& a, const Term& b) {
  if (a.is_linear() && b.is_linear()) return Term(a.linear() + b.linear());
  if (a.is_linear() && a.linear() == LinExpr()) return b;
  if (b.is_linear() && b.linear() == LinExpr()) return a;
  TermNode n;
  n.kind = Term::Kind::Add;
  n.a = a;
  n.b = b;
  return TermNode::make(std::move(n));
}

Term operator*(const Rational& k, const Term& a) {
  if (k == 1) return a;
  if (k == 0) return Term(0);
  if (a.is_linear()) return Term(a.linear() * k);
  if (a.kind() == Term::Kind::Scale) return (k * a.factor()) * a.lhs();
  TermNode n;
  n.kind = Term::Kind::Scale;
  n.a = a;
  n.factor = k;
  return TermNode::make(std::move(n));
}

Term Term::operator-() const { return Rational(-1) * *this; }

Term operator-(const Term& a, const Term& b) { return a + (-b); }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Linear: return a.linear() == b.linear();
    case Term::Kind::Ite:
      return a.condition() == b.condition() && a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case Term::Kind::Add: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case Term::Kind::Scale: return a.factor() == b.factor() && a.lhs() == b.lhs();
  }
  return false;
}

std::string to_string(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Linear: return t.linear().to_string();
    case Term::Kind::Ite:
      return "ite(" + t.condition().to_string() + ", " + to_string(t.lhs()) + ", " + to_string(t.rhs()) + ")";
    case Term::Kind::Add: return "(" + to_string(t.lhs()) + " + " + to_string(t.rhs()) + ")";
    case Term::Kind::Scale: return to_string(t.factor()) + "*(" + to_string(t.lhs()) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------- Rel

std::string to_string(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

bool holds(Rel r, const Rational& d) {
  switch (r) {
    case Rel::Lt: return d < 0;
    case Rel::Le: return d <= 0;
    case Rel::Eq: return d == 0;
    case Rel::Ge: return d >= 0;
    case Rel::Gt: return d > 0;
  }
  return false;
}

// ---------------------------------------------------------------- Formula

Formula::Formula() : node_(true_node()) {}
Formula Formula::truth() { return Formula(true_node()); }
Formula Formula::falsity() { return Formula(false_node()); }

Formula Formula::atom(const Term& lhs, Rel rel, const Term& rhs) {
  Term diff = lhs - rhs;
  if (diff.is_linear() && diff.linear().is_constant()) return constant(holds(rel, diff.linear().constant()));
  FormulaNode n;
  n.kind = Kind::Atom;
  n.term = diff;
  n.rel = rel;
  return FormulaNode::make(std::move(n));
}

Formula Formula::negation(const Formula& f) {
  switch (f.kind()) {
    case Kind::True: return falsity();
    case Kind::False: return truth();
    case Kind::Not: return f.body();
    case Kind::Atom:
      switch (f.rel()) {
        case Rel::Lt: return atom(f.term(), Rel::Ge, 0);
        case Rel::Le: return atom(f.term(), Rel::Gt, 0);
        case Rel::Ge: return atom(f.term(), Rel::Lt, 0);
        case Rel::Gt: return atom(f.term(), Rel::Le, 0);
        case Rel::Eq: break;
      }
      break;
    default: break;
  }
  FormulaNode n;
  n.kind = Kind::Not;
  n.body = f;
  return FormulaNode::make(std::move(n));
}

namespace {

bool cheap_equal(const Formula& a, const Formula& b) {
  if (a.node() == b.node()) return true;
  if (a.kind() == Formula::Kind::Atom && b.kind() == Formula::Kind::Atom)
    return a.rel() == b.rel() && a.term() == b.term();
  return false;
}

Formula junction(Formula::Kind kind, std::vector<Formula> parts) {
  const bool is_and = kind == Formula::Kind::And;
  std::vector<Formula> flat;
  flat.reserve(parts.size());
  for (auto& p : parts) {
    if (p.kind() == (is_and ? Formula::Kind::True : Formula::Kind::False)) continue;
    if (p.kind() == (is_and ? Formula::Kind::False : Formula::Kind::True)) return p;
    auto push = [&](const Formula& q) {
      for (const auto& existing : flat)
        if (cheap_equal(existing, q)) return;
      flat.push_back(q);
    };
    if (p.kind() == kind) {
      for (const auto& q : p.parts()) push(q);
    } else {
      push(p);
    }
  }
  if (flat.empty()) return Formula::constant(is_and);
  if (flat.size() == 1) return flat.front();
  FormulaNode n;
  n.kind = kind;
  n.parts = std::move(flat);
  return FormulaNode::make(std::move(n));
}

}  // namespace

Formula Formula::conj(std::vector<Formula> parts) { return junction(Kind::And, std::move(parts)); }
Formula Formula::disj(std::vector<Formula> parts) { return junction(Kind::Or, std::move(parts)); }
Formula Formula::implies(const Formula& a, const Formula& b) { return disj({negation(a), b}); }
Formula Formula::iff(const Formula& a, const Formula& b) {
  if (a.is_true()) return b;
  if (b.is_true()) return a;
  if (a.is_false()) return negation(b);
  if (b.is_false()) return negation(a);
  return conj({implies(a, b), implies(b, a)});
}

Formula Formula::ite(const Formula& c, const Formula& t, const Formula& e) {
  if (c.is_true()) return t;
  if (c.is_false()) return e;
  return disj({conj({c, t}), conj({negation(c), e})});
}

Formula Formula::exists(std::vector<Var> vars, const Formula& body) {
  if (body.is_constant()) return body;
  auto fv = free_vars(body);
  std::vector<Var> used;
  for (auto& v : vars)
    if (fv.count(v) && std::find(used.begin(), used.end(), v) == used.end()) used.push_back(v);
  if (used.empty()) return body;
  FormulaNode n;
  n.kind = Kind::Exists;
  n.bound = std::move(used);
  n.body = body;
  return FormulaNode::make(std::move(n));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const Term& Formula::term() const { return *node_->term; }
Rel Formula::rel() const { return node_->rel; }
const Formula& Formula::body() const { return *node_->body; }
const std::vector<Formula>& Formula::parts() const { return node_->parts; }
const std::vector<Var>& Formula::bound() const { return node_->bound; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return true;
    case Formula::Kind::Atom: return a.rel() == b.rel() && a.term() == b.term();
    case Formula::Kind::Not: return a.body() == b.body();
    case Formula::Kind::And:
    case Formula::Kind::Or: return a.parts() == b.parts();
    case Formula::Kind::Exists: return a.bound() == b.bound() && a.body() == b.body();
  }
  return false;
}

namespace {

std::string atom_to_string(const Term& t, Rel rel) {
  if (t.is_linear()) {
    LinExpr lhs = t.linear();
    Rational rhs = -lhs.constant();
    lhs -= LinExpr(lhs.constant());
    // Prefer a positive leading coefficient: `x >= 3` over `-x <= -3`.
    if (!lhs.coeffs().empty() && lhs.coeffs().begin()->second < 0) {
      lhs = -lhs;
      rhs = -rhs;
      switch (rel) {
        case Rel::Lt: rel = Rel::Gt; break;
        case Rel::Le: rel = Rel::Ge; break;
        case Rel::Ge: rel = Rel::Le; break;
        case Rel::Gt: rel = Rel::Lt; break;
        case Rel::Eq: break;
      }
    }
    return lhs.to_string() + " " + to_string(rel) + " " + to_string(rhs);
  }
  return to_string(t) + " " + to_string(rel) + " 0";
}

}  // namespace

std::string Formula::to_string() const {
  switch (kind()) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Atom: return atom_to_string(term(), rel());
    case Kind::Not: return "!(" + body().to_string() + ")";
    case Kind::And:
    case Kind::Or: {
      std::string sep = kind() == Kind::And ? " && " : " || ";
      std::string out = "(";
      for (std::size_t i = 0; i < parts().size(); ++i) {
        if (i) out += sep;
        out += parts()[i].to_string();
      }
      return out + ")";
    }
    case Kind::Exists: {
      std::string out = "exists ";
      for (std::size_t i = 0; i < bound().size(); ++i) out += (i ? "," : "") + bound()[i].name;
      return out + ". (" + body().to_string() + ")";
    }
  }
  return "?";
}

// ---------------------------------------------------------------- traversal

void collect_free_vars(const Term& t, std::set<Var>& out) {
  switch (t.kind()) {
    case Term::Kind::Linear:
      for (const auto& entry : t.linear().coeffs()) out.insert(entry.first);
      break;
    case Term::Kind::Ite:
      collect_free_vars(t.condition(), out);
      collect_free_vars(t.lhs(), out);
      collect_free_vars(t.rhs(), out);
      break;
    case Term::Kind::Add:
      collect_free_vars(t.lhs(), out);
      collect_free_vars(t.rhs(), out);
      break;
    case Term::Kind::Scale: collect_free_vars(t.lhs(), out); break;
  }
}

void collect_free_vars(const Formula& f, std::set<Var>& out) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: break;
    case Formula::Kind::Atom: collect_free_vars(f.term(), out); break;
    case Formula::Kind::Not: collect_free_vars(f.body(), out); break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& p : f.parts()) collect_free_vars(p, out);
      break;
    case Formula::Kind::Exists: {
      std::set<Var> inner;
      collect_free_vars(f.body(), inner);
      for (const auto& v : f.bound()) inner.erase(v);
      out.insert(inner.begin(), inner.end());
      break;
    }
  }
}

std::set<Var> free_vars(const Formula& f) {
  std::set<Var> out;
  collect_free_vars(f, out);
  return out;
}

std::set<Var> free_vars(const Term& t) {
  std::set<Var> out;
  collect_free_vars(t, out);
  return out;
}

Term substitute(const Term& t, const Substitution& sigma) {
  switch (t.kind()) {
    case Term::Kind::Linear: {
      const LinExpr& lin = t.linear();
      bool touched = false;
      for (const auto& entry : lin.coeffs())
        if (sigma.count(entry.first.name)) touched = true;
      if (!touched) return t;
      Term result(LinExpr(lin.constant()));
      for (const auto& [v, k] : lin.coeffs()) {
        auto it = sigma.find(v.name);
        result = result + (it == sigma.end() ? Term(LinExpr::variable(v, k)) : k * it->second);
      }
      return result;
    }
    case Term::Kind::Ite:
      return Term::ite(substitute(t.condition(), sigma), substitute(t.lhs(), sigma), substitute(t.rhs(), sigma));
    case Term::Kind::Add: return substitute(t.lhs(), sigma) + substitute(t.rhs(), sigma);
    case Term::Kind::Scale: return t.factor() * substitute(t.lhs(), sigma);
  }
  return t;
}

Formula substitute(const Formula& f, const Substitution& sigma) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False: return f;
    case Formula::Kind::Atom: return Formula::atom(substitute(f.term(), sigma), f.rel(), 0);
    case Formula::Kind::Not: return Formula::negation(substitute(f.body(), sigma));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> parts;
      parts.reserve(f.parts().size());
      for (const auto& p : f.parts()) parts.push_back(substitute(p, sigma));
      return f.kind() == Formula::Kind::And ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    case Formula::Kind::Exists: {
      Substitution inner = sigma;
      for (const auto& v : f.bound()) inner.erase(v.name);
      return Formula::exists(f.bound(), substitute(f.body(), inner));
    }
  }
  return f;
}

Rational evaluate(const Term& t, const Assignment& values) {
  switch (t.kind()) {
    case Term::Kind::Linear: {
      Rational sum = t.linear().constant();
      for (const auto& [v, k] : t.linear().coeffs()) {
        auto it = values.find(v.name);
        if (it == values.end()) throw std::out_of_range("no value for " + v.name);
        sum += k * it->second;
      }
      return sum;
    }
    case Term::Kind::Ite:
      return evaluate(t.condition(), values) ? evaluate(t.lhs(), values) : evaluate(t.rhs(), values);
    case Term::Kind::Add: return evaluate(t.lhs(), values) + evaluate(t.rhs(), values);
    case Term::Kind::Scale: return t.factor() * evaluate(t.lhs(), values);
  }
  return 0;
}

bool evaluate(const Formula& f, const Assignment& values) {
  switch (f.kind()) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Atom: return holds(f.rel(), evaluate(f.term(), values));
    case Formula::Kind::Not: return !evaluate(f.body(), values);
    case Formula::Kind::And:
      return std::all_of(f.parts().begin(), f.parts().end(), [&](const Formula& p) { return evaluate(p, values); });
    case Formula::Kind::Or:
      return std::any_of(f.parts().begin(), f.parts().end(), [&](const Formula& p) { return evaluate(p, values); });
    case Formula::Kind::Exists: throw std::logic_error("cannot evaluate a quantified formula");
  }
  return false;
}

std::vector<Formula> conjuncts(const Formula& f) {
  if (f.kind() == Formula::Kind::And) return f.parts();
  if (f.is_true()) return {};
  return {f};
}

Formula normalize(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Not: return Formula::negation(normalize(f.body()));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<std::pair<std::string, Formula>> keyed;
      for (const auto& p : f.parts()) {
        Formula q = normalize(p);
        keyed.emplace_back(q.to_string(), q);
      }
      std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<Formula> parts;
      for (auto& kv : keyed) parts.push_back(kv.second);
      return f.kind() == Formula::Kind::And ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    case Formula::Kind::Exists: return Formula::exists(f.bound(), normalize(f.body()));
    default: return f;
  }
}

namespace {

using Case = std::pair<Formula, LinExpr>;

std::vector<Case> term_cases(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Linear: return {{Formula::truth(), t.linear()}};
    case Term::Kind::Ite: {
      Formula c = expand_ite(t.condition());
      std::vector<Case> out;
      for (auto& [g, e] : term_cases(t.lhs())) out.emplace_back(c && g, e);
      for (auto& [g, e] : term_cases(t.rhs())) out.emplace_back(!c && g, e);
      return out;
    }
    case Term::Kind::Add: {
      std::vector<Case> out;
      auto left = term_cases(t.lhs());
      auto right = term_cases(t.rhs());
      for (auto& [g1, e1] : left)
        for (auto& [g2, e2] : right) out.emplace_back(g1 && g2, e1 + e2);
      return out;
    }
    case Term::Kind::Scale: {
      auto out = term_cases(t.lhs());
      for (auto& c : out) c.second *= t.factor();
      return out;
    }
  }
  return {};
}

}  // namespace

Formula expand_ite(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      if (f.term().is_linear()) return f;
      std::vector<Formula> alts;
      for (auto& [g, e] : term_cases(f.term())) alts.push_back(g && Formula::atom(Term(e), f.rel(), 0));
      return Formula::disj(std::move(alts));
    }
    case Formula::Kind::Not: return Formula::negation(expand_ite(f.body()));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> parts;
      for (const auto& p : f.parts()) parts.push_back(expand_ite(p));
      return f.kind() == Formula::Kind::And ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    case Formula::Kind::Exists: return Formula::exists(f.bound(), expand_ite(f.body()));
    default: return f;
  }
}

}  // namespace pitpn
