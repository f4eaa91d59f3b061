#include "pitpn/expr.hpp"
#include "pitpn/native_format.hpp"
#include "pitpn/smtlib.hpp"

#include <doctest.h>

#include <functional>
#include <random>

using namespace pitpn;

namespace {

// A formula tree kept on the test side, with its own evaluator.
struct Tree {
  enum Kind { Atom, Not, And, Or } kind = Atom;
  std::vector<Rational> coeffs;  // over x, y, n
  Rational constant;
  Rel rel = Rel::Le;
  std::vector<Tree> kids;
};

const std::vector<Var> kVars{real_var("x"), real_var("y"), int_var("n")};

Rational lhs(const Tree& t, const std::vector<Rational>& point) {
  Rational v = t.constant;
  for (std::size_t i = 0; i < point.size(); ++i) v += t.coeffs[i] * point[i];
  return v;
}

bool truth(const Tree& t, const std::vector<Rational>& point) {
  switch (t.kind) {
    case Tree::Atom: {
      Rational v = lhs(t, point);
      switch (t.rel) {
        case Rel::Lt: return v < 0;
        case Rel::Le: return v <= 0;
        case Rel::Eq: return v == 0;
        case Rel::Ge: return v >= 0;
        case Rel::Gt: return v > 0;
      }
      return false;
    }
    case Tree::Not: return !truth(t.kids[0], point);
    case Tree::And: {
      for (const auto& k : t.kids)
        if (!truth(k, point)) return false;
      return true;
    }
    case Tree::Or: {
      for (const auto& k : t.kids)
        if (truth(k, point)) return true;
      return false;
    }
  }
  return false;
}

Formula build(const Tree& t) {
  switch (t.kind) {
    case Tree::Atom: {
      LinExpr e(t.constant);
      for (std::size_t i = 0; i < kVars.size(); ++i) e += LinExpr::variable(kVars[i], t.coeffs[i]);
      return Formula::atom(Term(e), t.rel, Term(0));
    }
    case Tree::Not: return !build(t.kids[0]);
    case Tree::And:
    case Tree::Or: {
      std::vector<Formula> parts;
      for (const auto& k : t.kids) parts.push_back(build(k));
      return t.kind == Tree::And ? Formula::conj(parts) : Formula::disj(parts);
    }
  }
  return Formula::truth();
}

Tree random_tree(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> coin(0, 3), small(-3, 3), rel(0, 4);
  Tree t;
  if (depth == 0 || coin(rng) == 0) {
    t.kind = Tree::Atom;
    for (std::size_t i = 0; i < kVars.size(); ++i) t.coeffs.push_back(small(rng));
    t.constant = Rational(small(rng), 1 + std::abs(small(rng)));
    t.rel = static_cast<Rel>(rel(rng));
    return t;
  }
  int k = coin(rng);
  t.kind = k == 1 ? Tree::Not : k == 2 ? Tree::And : Tree::Or;
  int n = t.kind == Tree::Not ? 1 : 2 + coin(rng) % 2;
  for (int i = 0; i < n; ++i) t.kids.push_back(random_tree(rng, depth - 1));
  return t;
}

std::vector<Rational> random_point(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-8, 8), den(1, 4);
  return {Rational(num(rng), den(rng)), Rational(num(rng), den(rng)), Rational(num(rng))};
}

Assignment assignment(const std::vector<Rational>& p) {
  Assignment a;
  for (std::size_t i = 0; i < kVars.size(); ++i) a[kVars[i].name] = p[i];
  return a;
}

}  // namespace

TEST_CASE("rational parsing and printing") {
  CHECK(parse_rational("3") == 3);
  CHECK(parse_rational("-5/10") == Rational(-1, 2));
  CHECK(parse_rational("2.25") == Rational(9, 4));
  CHECK(to_string(Rational(7, 3)) == "7/3");
  CHECK(is_integral(Rational(8, 4)));
  CHECK_FALSE(is_integral(Rational(1, 3)));
  CHECK_THROWS(parse_rational("abc"));
}

TEST_CASE("linear expressions combine coefficients exactly") {
  Var x = real_var("x"), y = real_var("y");
  LinExpr e = LinExpr::variable(x, 2) + LinExpr::variable(y) - LinExpr::variable(x, 2) + Rational(1, 3);
  CHECK(e.coeffs().size() == 1);
  CHECK(e.coeff(x) == 0);
  CHECK(e.coeff(y) == 1);
  CHECK(e.constant() == Rational(1, 3));
  CHECK((e * 3).constant() == 1);
  CHECK((-e).coeff(y) == -1);
  CHECK(LinExpr::variable(int_var("n"), 2).sort() == Sort::Int);
  CHECK(LinExpr::variable(int_var("n"), Rational(1, 2)).sort() == Sort::Real);
}

TEST_CASE("constant atoms fold") {
  CHECK(Formula::atom(Term(2), Rel::Lt, Term(3)).is_true());
  CHECK(Formula::atom(Term(2), Rel::Gt, Term(3)).is_false());
  Formula a = Term::variable(real_var("x")) <= Term(1);
  CHECK((a && Formula::falsity()).is_false());
  CHECK((a || Formula::truth()).is_true());
  CHECK((!!a) == a);
}

TEST_CASE("formula evaluation agrees with an independent evaluator") {
  std::mt19937 rng(11);
  for (int round = 0; round < 300; ++round) {
    Tree t = random_tree(rng, 3);
    Formula f = build(t);
    for (int k = 0; k < 5; ++k) {
      auto p = random_point(rng);
      CHECK(evaluate(f, assignment(p)) == truth(t, p));
      CHECK(evaluate(normalize(f), assignment(p)) == truth(t, p));
    }
  }
}

TEST_CASE("SMT-LIB printing reads back to an equivalent formula") {
  std::mt19937 rng(5);
  std::map<std::string, Var> vars;
  for (const auto& v : kVars) vars.emplace(v.name, v);
  for (int round = 0; round < 200; ++round) {
    Tree t = random_tree(rng, 3);
    Formula f = build(t);
    Formula back = smtlib::to_formula(smtlib::parse_one(smtlib::print(f)), vars);
    for (int k = 0; k < 5; ++k) {
      auto p = random_point(rng);
      CHECK(evaluate(back, assignment(p)) == truth(t, p));
    }
  }
}

TEST_CASE("ITE terms evaluate by cases and expand to the same truth") {
  Var x = real_var("x"), y = real_var("y");
  Term tx = Term::variable(x), ty = Term::variable(y);
  Term m = Term::ite(tx <= ty, tx, ty);  // min(x, y)
  Formula f = m >= Term(1);
  Formula g = expand_ite(f);
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) {
      Assignment v{{"x", a}, {"y", b}};
      Rational expected = std::min(a, b);
      CHECK(evaluate(m, v) == expected);
      CHECK(evaluate(f, v) == (expected >= 1));
      CHECK(evaluate(g, v) == (expected >= 1));
    }
  CHECK(Term::ite(Formula::truth(), tx, ty) == tx);
}

TEST_CASE("substitution replaces free variables") {
  Var x = real_var("x"), y = real_var("y");
  Formula f = Term::variable(x) + Term::variable(y) <= Term(3);
  Formula g = substitute(f, {{"x", Term(LinExpr(2))}});
  CHECK(free_vars(g) == std::set<Var>{y});
  CHECK(evaluate(g, {{"y", 1}}));
  CHECK_FALSE(evaluate(g, {{"y", 2}}));
  CHECK_THROWS_AS(evaluate(f, {{"x", 1}}), std::out_of_range);
}

TEST_CASE("infix formulas round-trip through the printer") {
  io::Symbols s;
  s.identifier = [](const std::string& id) -> std::optional<Term> {
    if (id == "x" || id == "y") return Term::variable(real_var(id));
    return std::nullopt;
  };
  for (const char* text : {"x >= 0 && y < 2*x + 1", "!(x = 3) || y <= -1/2", "x - y > 0 -> y >= 4"}) {
    Formula f = io::parse_formula(text, s);
    Formula back = io::parse_formula(io::print_formula(f), s);
    for (int a = -4; a <= 4; ++a)
      for (int b = -4; b <= 4; ++b) {
        Assignment v{{"x", Rational(a, 2)}, {"y", b}};
        CHECK(evaluate(f, v) == evaluate(back, v));
      }
  }
  CHECK_THROWS_AS(io::parse_formula("z > 1", s), io::ParseError);
}
