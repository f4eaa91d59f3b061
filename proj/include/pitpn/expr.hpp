#pragma once

// Linear arithmetic terms and first-order formulas over integer and real
// variables. Every engine talks to every other engine (and to the SMT
// backend) in these types.

#include <boost/multiprecision/gmp.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pitpn {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);
bool is_integral(const Rational& r);

enum class Sort : std::uint8_t { Int, Real };

std::string to_string(Sort s);

struct Var {
  std::string name;
  Sort sort = Sort::Real;

  // Names are unique within an analysis, so ordering by name is enough.
  std::strong_ordering operator<=>(const Var& other) const { return name <=> other.name; }
  bool operator==(const Var& other) const { return name == other.name; }
};

inline Var real_var(std::string name) { return Var{std::move(name), Sort::Real}; }
inline Var int_var(std::string name) { return Var{std::move(name), Sort::Int}; }

/// c + sum(k_i * x_i) with exact rational coefficients. Zero coefficients are
/// never stored.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(Rational constant);  // NOLINT: implicit on purpose, constants are expressions
  LinExpr(int constant) : LinExpr(Rational(constant)) {}  // NOLINT
  static LinExpr variable(const Var& v, const Rational& coeff = 1);

  const Rational& constant() const { return constant_; }
  const std::map<Var, Rational>& coeffs() const { return coeffs_; }
  Rational coeff(const Var& v) const;
  bool is_constant() const { return coeffs_.empty(); }
  /// Int when every variable is Int and every coefficient is integral.
  Sort sort() const;

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(const Rational& k);
  LinExpr operator-() const;

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, const Rational& k) { return a *= k; }
  friend LinExpr operator*(const Rational& k, LinExpr a) { return a *= k; }
  friend bool operator==(const LinExpr& a, const LinExpr& b) {
    return a.constant_ == b.constant_ && a.coeffs_ == b.coeffs_;
  }

  std::string to_string() const;

 private:
  Rational constant_{0};
  std::map<Var, Rational> coeffs_;
};

class Formula;
struct TermNode;
struct FormulaNode;

/// Arithmetic term: a linear expression, an if-then-else over terms, a sum,
/// or a rational multiple. Smart constructors fold to Linear whenever no ITE
/// remains.
class Term {
 public:
  enum class Kind : std::uint8_t { Linear, Ite, Add, Scale };

  Term();
  Term(LinExpr lin);  // NOLINT
  Term(const Rational& c) : Term(LinExpr(c)) {}  // NOLINT
  Term(int c) : Term(LinExpr(c)) {}  // NOLINT
  static Term variable(const Var& v);
  static Term ite(const Formula& cond, const Term& then_term, const Term& else_term);

  Kind kind() const;
  bool is_linear() const { return kind() == Kind::Linear; }
  const LinExpr& linear() const;  // requires Linear
  const Formula& condition() const;  // requires Ite
  const Term& lhs() const;  // then-branch (Ite), first summand (Add), operand (Scale)
  const Term& rhs() const;  // else-branch (Ite), second summand (Add)
  const Rational& factor() const;  // requires Scale
  Sort sort() const;

  friend Term operator+(const Term& a, const Term& b);
  friend Term operator-(const Term& a, const Term& b);
  friend Term operator*(const Rational& k, const Term& a);
  Term operator-() const;

  friend bool operator==(const Term& a, const Term& b);
  const TermNode* node() const { return node_.get(); }

 private:
  explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const TermNode> node_;
  friend struct TermNode;
};

enum class Rel : std::uint8_t { Lt, Le, Eq, Ge, Gt };

std::string to_string(Rel r);
bool holds(Rel r, const Rational& lhs_minus_rhs);

/// Boolean formula. Atoms are stored as `term REL 0`.
class Formula {
 public:
  enum class Kind : std::uint8_t { True, False, Atom, Not, And, Or, Exists };

  Formula();  // true
  static Formula truth();
  static Formula falsity();
  static Formula constant(bool value) { return value ? truth() : falsity(); }
  static Formula atom(const Term& lhs, Rel rel, const Term& rhs);
  static Formula negation(const Formula& f);
  static Formula conj(std::vector<Formula> parts);
  static Formula disj(std::vector<Formula> parts);
  static Formula implies(const Formula& a, const Formula& b);
  static Formula iff(const Formula& a, const Formula& b);
  /// (c && t) || (!c && e), folded when c is constant.
  static Formula ite(const Formula& c, const Formula& t, const Formula& e);
  static Formula exists(std::vector<Var> vars, const Formula& body);

  Kind kind() const;
  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }
  bool is_constant() const { return is_true() || is_false(); }
  /// Atom accessors.
  const Term& term() const;
  Rel rel() const;
  /// Not / Exists body.
  const Formula& body() const;
  /// And / Or operands.
  const std::vector<Formula>& parts() const;
  /// Exists binder list.
  const std::vector<Var>& bound() const;

  friend Formula operator&&(const Formula& a, const Formula& b) { return conj({a, b}); }
  friend Formula operator||(const Formula& a, const Formula& b) { return disj({a, b}); }
  friend Formula operator!(const Formula& a) { return negation(a); }

  friend bool operator==(const Formula& a, const Formula& b);
  const FormulaNode* node() const { return node_.get(); }

  std::string to_string() const;

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const FormulaNode> node_;
  friend struct FormulaNode;
};

// Builders for the common atom shapes.
inline Formula operator<=(const Term& a, const Term& b) { return Formula::atom(a, Rel::Le, b); }
inline Formula operator<(const Term& a, const Term& b) { return Formula::atom(a, Rel::Lt, b); }
inline Formula operator>=(const Term& a, const Term& b) { return Formula::atom(a, Rel::Ge, b); }
inline Formula operator>(const Term& a, const Term& b) { return Formula::atom(a, Rel::Gt, b); }
inline Formula eq(const Term& a, const Term& b) { return Formula::atom(a, Rel::Eq, b); }

std::string to_string(const Term& t);

using Assignment = std::map<std::string, Rational>;
using Substitution = std::map<std::string, Term>;

void collect_free_vars(const Term& t, std::set<Var>& out);
void collect_free_vars(const Formula& f, std::set<Var>& out);
std::set<Var> free_vars(const Formula& f);
std::set<Var> free_vars(const Term& t);

Term substitute(const Term& t, const Substitution& sigma);
Formula substitute(const Formula& f, const Substitution& sigma);

/// Exact evaluation. Throws std::out_of_range when a free variable has no
/// value and std::logic_error on quantifiers.
Rational evaluate(const Term& t, const Assignment& values);
bool evaluate(const Formula& f, const Assignment& values);

/// Conjuncts of a top-level conjunction (or the formula itself).
std::vector<Formula> conjuncts(const Formula& f);

/// Sorts the operands of every And/Or by their printed form so that
/// equivalent results produced along different paths read identically.
Formula normalize(const Formula& f);

/// Case-splits every ITE term into boolean structure. Exponential; meant for
/// tests and small formulas only.
Formula expand_ite(const Formula& f);

}  // namespace pitpn
