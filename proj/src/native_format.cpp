#include "pitpn/native_format.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace pitpn::io {

ParseError::ParseError(const std::string& message, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

namespace {

enum class Tok { Ident, Number, Op, End };

struct Token {
  Tok kind;
  std::string text;
};

std::vector<Token> tokenize(const std::string& s) {
  static const std::vector<std::string> ops = {"<=", ">=", "==", "!=", "&&", "||", "->", "=>", "/\\", "\\/",
                                               "<",  ">",  "=",  "+",  "-",  "*",  "/",  "(",  ")",   ",",
                                               "!",  "~",  "[",  "]",  ";",  ":"};
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      out.push_back({Tok::Number, s.substr(i, j - i)});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '%') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.' ||
                              s[j] == '$' || s[j] == '%' || s[j] == '\''))
        ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i)});
      i = j;
      continue;
    }
    bool matched = false;
    for (const auto& op : ops) {
      if (s.compare(i, op.size(), op) == 0) {
        out.push_back({Tok::Op, op});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, ""});
  return out;
}

class FormulaParser {
 public:
  FormulaParser(const std::string& text, const Symbols& symbols) : toks_(tokenize(text)), sym_(symbols) {}

  Formula formula_only() {
    Formula f = implication();
    expect_end();
    return f;
  }

  Term term_only() {
    Term t = sum();
    expect_end();
    return t;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_op(const std::string& op) const { return peek().kind == Tok::Op && peek().text == op; }
  bool at_word(const std::string& w) const { return peek().kind == Tok::Ident && peek().text == w; }
  bool accept_op(const std::string& op) {
    if (!at_op(op)) return false;
    ++pos_;
    return true;
  }
  bool accept_word(const std::string& w) {
    if (!at_word(w)) return false;
    ++pos_;
    return true;
  }
  void expect_op(const std::string& op) {
    if (!accept_op(op)) throw ParseError("expected '" + op + "' near '" + peek().text + "'");
  }
  void expect_end() {
    if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'");
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (accept_op("->") || accept_op("=>")) return Formula::implies(lhs, implication());
    if (accept_word("implies")) return Formula::implies(lhs, implication());
    return lhs;
  }

  Formula disjunction() {
    std::vector<Formula> parts{conjunction()};
    while (accept_op("||") || accept_op("\\/") || accept_word("or")) parts.push_back(conjunction());
    return Formula::disj(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (accept_op("&&") || accept_op("/\\") || accept_word("and")) parts.push_back(unary());
    return Formula::conj(std::move(parts));
  }

  Formula unary() {
    if (accept_op("!") || accept_op("~") || accept_word("not")) return Formula::negation(unary());
    if (accept_word("true")) return Formula::truth();
    if (accept_word("false")) return Formula::falsity();
    if (at_op("(")) {
      std::size_t save = pos_;
      try {
        ++pos_;
        Formula inner = implication();
        expect_op(")");
        if (!is_relop() && !is_arith()) return inner;
      } catch (const ParseError&) {
      }
      pos_ = save;
    }
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::Op && peek(1).text == "(" && sym_.formula_call) {
      std::size_t save = pos_;
      std::string name = peek().text;
      pos_ += 2;
      auto args = call_args();
      if (auto f = sym_.formula_call(name, args)) return *f;
      pos_ = save;
    }
    return comparison();
  }

  bool is_relop() const {
    if (peek().kind != Tok::Op) return false;
    const auto& t = peek().text;
    return t == "<" || t == "<=" || t == "=" || t == "==" || t == ">=" || t == ">" || t == "!=";
  }
  bool is_arith() const {
    if (peek().kind != Tok::Op) return false;
    const auto& t = peek().text;
    return t == "+" || t == "-" || t == "*" || t == "/";
  }

  Formula comparison() {
    Term lhs = sum();
    if (!is_relop()) throw ParseError("expected a comparison near '" + peek().text + "'");
    std::vector<Formula> chain;
    while (is_relop()) {
      std::string op = peek().text;
      ++pos_;
      Term rhs = sum();
      if (op == "<") chain.push_back(lhs < rhs);
      else if (op == "<=") chain.push_back(lhs <= rhs);
      else if (op == ">") chain.push_back(lhs > rhs);
      else if (op == ">=") chain.push_back(lhs >= rhs);
      else if (op == "!=") chain.push_back(!eq(lhs, rhs));
      else chain.push_back(eq(lhs, rhs));
      lhs = rhs;
    }
    return Formula::conj(std::move(chain));
  }

  Term sum() {
    Term acc = product();
    for (;;) {
      if (accept_op("+")) {
        acc = acc + product();
      } else if (accept_op("-")) {
        acc = acc - product();
      } else {
        return acc;
      }
    }
  }

  Term product() {
    Term acc = factor();
    for (;;) {
      if (accept_op("*")) {
        Term rhs = factor();
        if (acc.is_linear() && acc.linear().is_constant()) {
          acc = acc.linear().constant() * rhs;
        } else if (rhs.is_linear() && rhs.linear().is_constant()) {
          acc = rhs.linear().constant() * acc;
        } else {
          throw ParseError("non-linear product");
        }
      } else if (accept_op("/")) {
        Term rhs = factor();
        if (!rhs.is_linear() || !rhs.linear().is_constant() || rhs.linear().constant() == 0)
          throw ParseError("division by a non-constant or zero");
        acc = Rational(1 / rhs.linear().constant()) * acc;
      } else {
        return acc;
      }
    }
  }

  Term factor() {
    if (accept_op("-")) return -factor();
    if (accept_op("+")) return factor();
    if (accept_op("(")) {
      Term t = sum();
      expect_op(")");
      return t;
    }
    const Token& tok = peek();
    if (tok.kind == Tok::Number) {
      ++pos_;
      try {
        return Term(parse_rational(tok.text));
      } catch (const std::invalid_argument&) {
        throw ParseError("bad number '" + tok.text + "'");
      }
    }
    if (tok.kind == Tok::Ident) {
      std::string name = tok.text;
      ++pos_;
      if (at_op("(")) {
        ++pos_;
        auto args = call_args();
        if (sym_.term_call)
          if (auto t = sym_.term_call(name, args)) return *t;
        throw ParseError("unknown function '" + name + "'");
      }
      if (sym_.identifier)
        if (auto t = sym_.identifier(name)) return *t;
      throw ParseError("unknown identifier '" + name + "'");
    }
    throw ParseError("unexpected '" + tok.text + "'");
  }

  /// Raw argument texts up to the matching ')'; the '(' is already consumed.
  std::vector<std::string> call_args() {
    std::vector<std::string> args;
    std::string cur;
    int depth = 0;
    for (;;) {
      const Token& tok = peek();
      if (tok.kind == Tok::End) throw ParseError("unterminated argument list");
      ++pos_;
      if (tok.kind == Tok::Op && tok.text == "(") ++depth;
      if (tok.kind == Tok::Op && tok.text == ")") {
        if (depth == 0) break;
        --depth;
      }
      if (depth == 0 && tok.kind == Tok::Op && tok.text == ",") {
        args.push_back(cur);
        cur.clear();
        continue;
      }
      if (!cur.empty()) cur += ' ';
      cur += tok.text;
    }
    if (!cur.empty() || !args.empty()) args.push_back(cur);
    return args;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Symbols& sym_;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Formula parse_formula(const std::string& text, const Symbols& symbols) {
  return FormulaParser(text, symbols).formula_only();
}

Term parse_term(const std::string& text, const Symbols& symbols) { return FormulaParser(text, symbols).term_only(); }

LinExpr parse_linear(const std::string& text, const Symbols& symbols) {
  Term t = parse_term(text, symbols);
  if (!t.is_linear()) throw ParseError("expected a linear expression: " + text);
  return t.linear();
}

Symbols parameter_symbols(const Net& net) {
  Symbols s;
  s.identifier = [&net](const std::string& id) -> std::optional<Term> {
    if (const Param* p = net.find_param(id)) return Term::variable(p->var());
    return std::nullopt;
  };
  return s;
}

Symbols predicate_symbols(const Net& net) {
  Symbols s;
  s.identifier = [&net](const std::string& id) -> std::optional<Term> {
    if (net.place_index(id)) return Term::variable(place_hole_var(id));
    if (const Param* p = net.find_param(id)) return Term::variable(p->var());
    if (id == "GT" || id == "gt") return Term::variable(global_time_var());
    return std::nullopt;
  };
  s.term_call = [&net](const std::string& fn, const std::vector<std::string>& args) -> std::optional<Term> {
    if (fn == "clock" && args.size() == 1) {
      std::string t = trim(args[0]);
      if (!net.transition_index(t)) throw ParseError("clock() of unknown transition '" + t + "'");
      return Term::variable(clock_hole_var(t));
    }
    if ((fn == "tokens" || fn == "m") && args.size() == 1) {
      std::string p = trim(args[0]);
      if (!net.place_index(p)) throw ParseError("unknown place '" + p + "'");
      return Term::variable(place_hole_var(p));
    }
    return std::nullopt;
  };
  s.formula_call = [&net](const std::string& fn, const std::vector<std::string>& args) -> std::optional<Formula> {
    if ((fn == "ksafe" || fn == "safe") && args.size() == 1) {
      Rational k = parse_rational(trim(args[0]));
      if (!is_integral(k)) throw ParseError("ksafe needs an integer");
      Marking m;
      for (const auto& p : net.places) m.push_back(LinExpr::variable(place_hole_var(p)));
      return k_safe(numerator(k).convert_to<std::int64_t>(), m);
    }
    return std::nullopt;
  };
  return s;
}

namespace {

std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<Arc> parse_arcs(const std::string& text, const Net& net, std::size_t line) {
  std::vector<Arc> arcs;
  std::string t = trim(text);
  if (t.empty()) return arcs;
  for (const auto& item : split_top(t, ',')) {
    if (item.empty()) throw ParseError("empty arc entry", line);
    std::string place = item;
    std::int64_t weight = 1;
    if (auto star = item.find('*'); star != std::string::npos) {
      place = trim(item.substr(0, star));
      try {
        weight = std::stoll(trim(item.substr(star + 1)));
      } catch (const std::exception&) {
        throw ParseError("bad arc weight in '" + item + "'", line);
      }
    }
    auto idx = net.place_index(place);
    if (!idx) throw ParseError("unknown place '" + place + "'", line);
    bool merged = false;
    for (auto& a : arcs)
      if (a.place == *idx) {
        a.weight += weight;
        merged = true;
      }
    if (!merged) arcs.push_back({*idx, weight});
  }
  return arcs;
}

std::string strip_comment(const std::string& line) {
  std::string out = line;
  if (auto h = out.find('#'); h != std::string::npos) out = out.substr(0, h);
  if (auto s = out.find("//"); s != std::string::npos) out = out.substr(0, s);
  return trim(out);
}

}  // namespace

Net parse_native(const std::string& text) {
  Net net;
  std::vector<Formula> constraints;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  bool seen_transition = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = strip_comment(raw);
    if (line.empty()) continue;
    auto space = line.find_first_of(" \t");
    std::string keyword = line.substr(0, space);
    std::string rest = space == std::string::npos ? "" : trim(line.substr(space));
    try {
      if (keyword == "net") {
        net.name = rest;
      } else if (keyword == "param") {
        auto colon = rest.find(':');
        std::string id = trim(rest.substr(0, colon));
        std::string sort = colon == std::string::npos ? "real" : trim(rest.substr(colon + 1));
        if (id.empty()) throw ParseError("parameter without a name", lineno);
        if (net.find_param(id)) throw ParseError("duplicate parameter '" + id + "'", lineno);
        if (sort != "real" && sort != "int") throw ParseError("parameter sort must be real or int", lineno);
        net.params.push_back({id, sort == "int" ? Sort::Int : Sort::Real});
      } else if (keyword == "constraint") {
        constraints.push_back(parse_formula(rest, parameter_symbols(net)));
      } else if (keyword == "place") {
        if (seen_transition) throw ParseError("places must precede transitions", lineno);
        auto eqpos = rest.find('=');
        std::string id = trim(rest.substr(0, eqpos));
        if (id.empty()) throw ParseError("place without a name", lineno);
        if (net.place_index(id)) throw ParseError("duplicate place '" + id + "'", lineno);
        LinExpr init = eqpos == std::string::npos ? LinExpr() : parse_linear(trim(rest.substr(eqpos + 1)), parameter_symbols(net));
        net.places.push_back(id);
        net.initial.push_back(init);
      } else if (keyword == "trans") {
        seen_transition = true;
        auto colon = rest.find(':');
        if (colon == std::string::npos) throw ParseError("expected ':' after transition name", lineno);
        Transition t;
        t.name = trim(rest.substr(0, colon));
        if (t.name.empty()) throw ParseError("transition without a name", lineno);
        if (net.transition_index(t.name)) throw ParseError("duplicate transition '" + t.name + "'", lineno);
        std::string body = rest.substr(colon + 1);
        auto in_pos = body.rfind(" in ");
        if (in_pos == std::string::npos) throw ParseError("expected 'in [lo, hi]'", lineno);
        std::string arcs = body.substr(0, in_pos);
        std::string interval = trim(body.substr(in_pos + 4));
        auto arrow = arcs.find("->");
        if (arrow == std::string::npos) throw ParseError("expected '->' between input and output places", lineno);
        std::string pre = arcs.substr(0, arrow);
        std::string post = arcs.substr(arrow + 2);
        std::string inhibit;
        if (auto inh = post.find("inhibit"); inh != std::string::npos) {
          inhibit = post.substr(inh + 7);
          post = post.substr(0, inh);
        }
        t.pre = parse_arcs(pre, net, lineno);
        t.post = parse_arcs(post, net, lineno);
        t.inhibit = parse_arcs(inhibit, net, lineno);
        if (interval.size() < 2 || interval.front() != '[' || interval.back() != ']')
          throw ParseError("interval must look like [lo, hi]", lineno);
        auto ends = split_top(interval.substr(1, interval.size() - 2), ',');
        if (ends.size() != 2) throw ParseError("interval needs two endpoints", lineno);
        t.interval.lo = parse_linear(ends[0], parameter_symbols(net));
        if (ends[1] == "inf" || ends[1] == "infinity" || ends[1] == "oo") {
          t.interval.hi = TimeBound::infinity();
        } else {
          t.interval.hi = TimeBound::finite(parse_linear(ends[1], parameter_symbols(net)));
        }
        net.transitions.push_back(std::move(t));
      } else {
        throw ParseError("unknown keyword '" + keyword + "'", lineno);
      }
    } catch (const ParseError& e) {
      if (e.line()) throw;
      throw ParseError(e.what(), lineno);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (net.places.empty()) throw ParseError("a net needs at least one place");
  if (net.transitions.empty()) throw ParseError("a net needs at least one transition");
  net.constraint = Formula::conj(std::move(constraints));
  auto issues = validate(net);
  if (!issues.empty()) throw ParseError(issues.front());
  return net;
}

Net load_native(const std::string& path) { return parse_native(read_file(path)); }

std::string print_formula(const Formula& f, const Net* net) {
  if (!net) return f.to_string();
  Substitution rename;
  for (const auto& v : free_vars(f)) {
    if (v.name.rfind("$m.", 0) == 0) rename[v.name] = Term::variable(Var{v.name.substr(3), v.sort});
    if (v.name.rfind("$c.", 0) == 0) rename[v.name] = Term::variable(Var{"clock(" + v.name.substr(3) + ")", v.sort});
    if (v.name == global_time_hole()) rename[v.name] = Term::variable(Var{"GT", v.sort});
  }
  return substitute(f, rename).to_string();
}

std::string print_native(const Net& net) {
  std::ostringstream out;
  out << "net " << (net.name.empty() ? "unnamed" : net.name) << "\n";
  for (const auto& p : net.params) out << "param " << p.name << " : " << (p.sort == Sort::Int ? "int" : "real") << "\n";
  for (const auto& c : conjuncts(net.constraint)) out << "constraint " << c.to_string() << "\n";
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    out << "place " << net.places[i];
    if (!(net.initial[i] == LinExpr())) out << " = " << net.initial[i].to_string();
    out << "\n";
  }
  auto arcs = [&](const std::vector<Arc>& list) {
    std::string s;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) s += ", ";
      s += net.places[list[i].place];
      if (list[i].weight != 1) s += "*" + std::to_string(list[i].weight);
    }
    return s;
  };
  for (const auto& t : net.transitions) {
    out << "trans " << t.name << " : " << arcs(t.pre) << " -> " << arcs(t.post);
    if (!t.inhibit.empty()) out << " inhibit " << arcs(t.inhibit);
    out << " in [" << t.interval.lo.to_string() << ", "
        << (t.interval.hi.value ? t.interval.hi.value->to_string() : std::string("inf")) << "]\n";
  }
  return out.str();
}

bool structurally_equal(const Net& a, const Net& b) {
  return a.name == b.name && a.places == b.places && a.transitions == b.transitions && a.params == b.params &&
         a.initial == b.initial && normalize(a.constraint).to_string() == normalize(b.constraint).to_string();
}

}  // namespace pitpn::io
