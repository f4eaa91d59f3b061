#include "pitpn/smtlib.hpp"

#include <cctype>
#include <sstream>
#include <variant>

namespace pitpn::smtlib {

std::string SExpr::to_string() const {
  if (is_atom) return atom;
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ' ';
    out += items[i].to_string();
  }
  return out + ")";
}

namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  SExpr read() {
    skip();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      SExpr list;
      list.is_atom = false;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unbalanced parenthesis");
        if (text_[pos_] == ')') {
          ++pos_;
          return list;
        }
        list.items.push_back(read());
      }
    }
    if (c == ')') throw ParseError("unexpected ')'");
    SExpr atom;
    if (c == '|') {
      auto end = text_.find('|', pos_ + 1);
      if (end == std::string::npos) throw ParseError("unterminated quoted symbol");
      atom.atom = text_.substr(pos_, end - pos_ + 1);
      pos_ = end + 1;
      return atom;
    }
    if (c == '"') {
      std::size_t end = pos_ + 1;
      while (end < text_.size()) {
        if (text_[end] == '"') {
          if (end + 1 < text_.size() && text_[end + 1] == '"') {
            end += 2;
            continue;
          }
          break;
        }
        ++end;
      }
      if (end >= text_.size()) throw ParseError("unterminated string");
      atom.atom = text_.substr(pos_, end - pos_ + 1);
      pos_ = end + 1;
      return atom;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')' && text_[pos_] != ';')
      ++pos_;
    atom.atom = text_.substr(start, pos_ - start);
    return atom;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

bool simple_symbol_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("~!@$%^&*_-+=<>.?/").find(c) != std::string_view::npos;
}

}  // namespace

std::vector<SExpr> parse_all(const std::string& text) {
  Reader reader(text);
  std::vector<SExpr> out;
  while (!reader.at_end()) out.push_back(reader.read());
  return out;
}

SExpr parse_one(const std::string& text) {
  Reader reader(text);
  SExpr e = reader.read();
  if (!reader.at_end()) throw ParseError("trailing input after expression");
  return e;
}

std::string symbol(const std::string& name) {
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name)
    if (!simple_symbol_char(c)) simple = false;
  // Leading characters that the solver may read as something else.
  if (!name.empty() && (name[0] == '-' || name[0] == '+' || name[0] == '.' || name[0] == '@')) simple = false;
  return simple ? name : "|" + name + "|";
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '|' && s.back() == '|') return s.substr(1, s.size() - 2);
  return s;
}

// ---------------------------------------------------------------- printing

std::string print(const Rational& r, Sort sort) {
  auto magnitude = [&](const Integer& v) { return sort == Sort::Real ? v.str() + ".0" : v.str(); };
  Rational mag = r < 0 ? Rational(-r) : r;
  std::string body;
  if (is_integral(mag)) {
    body = magnitude(numerator(mag));
  } else {
    body = "(/ " + magnitude(numerator(mag)) + " " + magnitude(denominator(mag)) + ")";
  }
  return r < 0 ? "(- " + body + ")" : body;
}

namespace {

std::string print_var(const Var& v, Sort context) {
  std::string s = symbol(v.name);
  if (context == Sort::Real && v.sort == Sort::Int) return "(to_real " + s + ")";
  return s;
}

std::string print_linear(const LinExpr& e, Sort sort) {
  std::vector<std::string> parts;
  for (const auto& [v, k] : e.coeffs()) {
    if (k == 1) {
      parts.push_back(print_var(v, sort));
    } else {
      parts.push_back("(* " + print(k, sort) + " " + print_var(v, sort) + ")");
    }
  }
  if (e.constant() != 0 || parts.empty()) parts.push_back(print(e.constant(), sort));
  if (parts.size() == 1) return parts[0];
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::string print_term(const Term& t, Sort sort) {
  switch (t.kind()) {
    case Term::Kind::Linear: return print_linear(t.linear(), sort);
    case Term::Kind::Ite:
      return "(ite " + print(t.condition()) + " " + print_term(t.lhs(), sort) + " " + print_term(t.rhs(), sort) + ")";
    case Term::Kind::Add: return "(+ " + print_term(t.lhs(), sort) + " " + print_term(t.rhs(), sort) + ")";
    case Term::Kind::Scale: return "(* " + print(t.factor(), sort) + " " + print_term(t.lhs(), sort) + ")";
  }
  return "";
}

const char* rel_symbol(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "=";
}

}  // namespace

std::string print(const Term& t) { return print_term(t, t.sort()); }

std::string print(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::True: return "true";
    case Formula::Kind::False: return "false";
    case Formula::Kind::Atom: {
      const Term& t = f.term();
      Sort sort = t.sort();
      if (t.is_linear()) {
        LinExpr lhs = t.linear();
        Rational rhs = -lhs.constant();
        lhs -= LinExpr(lhs.constant());
        return std::string("(") + rel_symbol(f.rel()) + " " + print_linear(lhs, sort) + " " + print(rhs, sort) + ")";
      }
      return std::string("(") + rel_symbol(f.rel()) + " " + print_term(t, sort) + " " + print(Rational(0), sort) + ")";
    }
    case Formula::Kind::Not: return "(not " + print(f.body()) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string out = f.kind() == Formula::Kind::And ? "(and" : "(or";
      for (const auto& p : f.parts()) out += " " + print(p);
      return out + ")";
    }
    case Formula::Kind::Exists: {
      std::string out = "(exists (";
      for (std::size_t i = 0; i < f.bound().size(); ++i) {
        const Var& v = f.bound()[i];
        out += (i ? " (" : "(") + symbol(v.name) + " " + to_string(v.sort) + ")";
      }
      return out + ") " + print(f.body()) + ")";
    }
  }
  return "";
}

std::string declaration(const Var& v) { return "(declare-const " + symbol(v.name) + " " + to_string(v.sort) + ")"; }

// ---------------------------------------------------------------- decoding

Rational to_rational(const SExpr& e) {
  if (e.is_atom) {
    try {
      return parse_rational(e.atom);
    } catch (const std::invalid_argument&) {
      throw ParseError("not a numeral: " + e.atom);
    }
  }
  if (e.head_is("-") && e.items.size() == 2) return -to_rational(e.items[1]);
  if (e.head_is("/") && e.items.size() == 3) {
    Rational d = to_rational(e.items[2]);
    if (d == 0) throw ParseError("division by zero in literal");
    return to_rational(e.items[1]) / d;
  }
  if (e.head_is("to_real") && e.items.size() == 2) return to_rational(e.items[1]);
  throw ParseError("not a numeric literal: " + e.to_string());
}

namespace {

using Value = std::variant<Term, Formula>;

struct Converter {
  const std::map<std::string, Var>& vars;
  std::vector<std::map<std::string, Value>> scopes;

  const Value* lookup(const std::string& name) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return &found->second;
    }
    return nullptr;
  }

  Term term(const SExpr& e) {
    Value v = convert(e);
    if (auto* t = std::get_if<Term>(&v)) return *t;
    throw ParseError("expected a term, got a formula: " + e.to_string());
  }

  Formula formula(const SExpr& e) {
    Value v = convert(e);
    if (auto* f = std::get_if<Formula>(&v)) return *f;
    throw ParseError("expected a formula, got a term: " + e.to_string());
  }

  Value convert(const SExpr& e) {
    if (e.is_atom) {
      if (e.atom == "true") return Formula::truth();
      if (e.atom == "false") return Formula::falsity();
      std::string name = unquote(e.atom);
      if (const Value* bound = lookup(e.atom)) return *bound;
      if (const Value* bound = lookup(name)) return *bound;
      if (!e.atom.empty() && (std::isdigit(static_cast<unsigned char>(e.atom[0])) || e.atom[0] == '.'))
        return Term(to_rational(e));
      auto it = vars.find(name);
      if (it == vars.end()) throw ParseError("unknown symbol: " + name);
      return Term::variable(it->second);
    }
    if (e.items.empty()) throw ParseError("empty application");
    const SExpr& head = e.items[0];
    if (!head.is_atom) throw ParseError("unsupported application: " + e.to_string());
    const std::string& op = head.atom;
    const std::size_t n = e.items.size() - 1;
    auto arg = [&](std::size_t i) -> const SExpr& { return e.items[i + 1]; };

    if (op == "let") {
      if (n != 2 || arg(0).is_atom) throw ParseError("malformed let");
      std::map<std::string, Value> scope;
      for (const auto& binding : arg(0).items) {
        if (binding.is_atom || binding.items.size() != 2 || !binding.items[0].is_atom)
          throw ParseError("malformed let binding");
        scope.emplace(binding.items[0].atom, convert(binding.items[1]));
      }
      scopes.push_back(std::move(scope));
      Value body = convert(arg(1));
      scopes.pop_back();
      return body;
    }
    if (op == "exists" || op == "forall") {
      if (n != 2 || arg(0).is_atom) throw ParseError("malformed quantifier");
      std::vector<Var> bound;
      std::map<std::string, Value> scope;
      for (const auto& decl : arg(0).items) {
        if (decl.is_atom || decl.items.size() != 2) throw ParseError("malformed binder");
        Var v{unquote(decl.items[0].atom), decl.items[1].is("Int") ? Sort::Int : Sort::Real};
        bound.push_back(v);
        scope.emplace(decl.items[0].atom, Term::variable(v));
      }
      scopes.push_back(std::move(scope));
      Formula body = formula(arg(1));
      scopes.pop_back();
      if (op == "exists") return Formula::exists(bound, body);
      return Formula::negation(Formula::exists(bound, Formula::negation(body)));
    }
    if (op == "not" && n == 1) return Formula::negation(formula(arg(0)));
    if (op == "and" || op == "or") {
      std::vector<Formula> parts;
      for (std::size_t i = 0; i < n; ++i) parts.push_back(formula(arg(i)));
      return op == "and" ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    if (op == "=>") {
      if (n < 2) throw ParseError("malformed =>");
      Formula result = formula(arg(n - 1));
      for (std::size_t i = n - 1; i-- > 0;) result = Formula::implies(formula(arg(i)), result);
      return result;
    }
    if (op == "ite" && n == 3) {
      Formula c = formula(arg(0));
      Value t = convert(arg(1));
      Value f = convert(arg(2));
      if (std::holds_alternative<Formula>(t) && std::holds_alternative<Formula>(f))
        return Formula::ite(c, std::get<Formula>(t), std::get<Formula>(f));
      if (std::holds_alternative<Term>(t) && std::holds_alternative<Term>(f))
        return Term::ite(c, std::get<Term>(t), std::get<Term>(f));
      throw ParseError("ite branches of different kinds");
    }
    if (op == "=" || op == "<" || op == "<=" || op == ">" || op == ">=" || op == "distinct") {
      if (n < 2) throw ParseError("relation needs two operands");
      std::vector<Value> vals;
      for (std::size_t i = 0; i < n; ++i) vals.push_back(convert(arg(i)));
      if (op == "=" && std::holds_alternative<Formula>(vals[0])) {
        std::vector<Formula> parts;
        for (std::size_t i = 0; i + 1 < n; ++i)
          parts.push_back(Formula::iff(std::get<Formula>(vals[i]), std::get<Formula>(vals[i + 1])));
        return Formula::conj(std::move(parts));
      }
      auto as_term = [&](const Value& v) {
        if (auto* t = std::get_if<Term>(&v)) return *t;
        throw ParseError("relation over formulas: " + e.to_string());
      };
      if (op == "distinct") {
        std::vector<Formula> parts;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j)
            parts.push_back(Formula::negation(eq(as_term(vals[i]), as_term(vals[j]))));
        return Formula::conj(std::move(parts));
      }
      Rel rel = op == "=" ? Rel::Eq : op == "<" ? Rel::Lt : op == "<=" ? Rel::Le : op == ">" ? Rel::Gt : Rel::Ge;
      std::vector<Formula> chain;
      for (std::size_t i = 0; i + 1 < n; ++i) chain.push_back(Formula::atom(as_term(vals[i]), rel, as_term(vals[i + 1])));
      return Formula::conj(std::move(chain));
    }
    if (op == "+") {
      Term sum(0);
      for (std::size_t i = 0; i < n; ++i) sum = sum + term(arg(i));
      return sum;
    }
    if (op == "-") {
      if (n == 1) return -term(arg(0));
      Term result = term(arg(0));
      for (std::size_t i = 1; i < n; ++i) result = result - term(arg(i));
      return result;
    }
    if (op == "*") {
      // Linear arithmetic only: at most one non-constant factor.
      Rational k = 1;
      std::optional<Term> rest;
      for (std::size_t i = 0; i < n; ++i) {
        Term t = term(arg(i));
        if (t.is_linear() && t.linear().is_constant()) {
          k *= t.linear().constant();
        } else if (!rest) {
          rest = t;
        } else {
          throw ParseError("non-linear product: " + e.to_string());
        }
      }
      return rest ? k * *rest : Term(k);
    }
    if (op == "/" && n == 2) {
      Term den = term(arg(1));
      if (!den.is_linear() || !den.linear().is_constant() || den.linear().constant() == 0)
        throw ParseError("non-constant division: " + e.to_string());
      return Rational(1 / den.linear().constant()) * term(arg(0));
    }
    if (op == "to_real" && n == 1) return term(arg(0));
    throw ParseError("unsupported operator '" + op + "' in " + e.to_string());
  }
};

}  // namespace

Formula to_formula(const SExpr& e, const std::map<std::string, Var>& vars) {
  Converter c{vars, {}};
  return c.formula(e);
}

Term to_term(const SExpr& e, const std::map<std::string, Var>& vars) {
  Converter c{vars, {}};
  return c.term(e);
}

}  // namespace pitpn::smtlib
