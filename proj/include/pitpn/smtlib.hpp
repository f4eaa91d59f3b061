#pragma once

// SMT-LIB 2 text for terms and formulas, plus the S-expression reader used to
// decode solver replies (models, quantifier-elimination goals).

#include "pitpn/expr.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pitpn::smtlib {

struct SExpr {
  bool is_atom = true;
  std::string atom;
  std::vector<SExpr> items;

  bool is(const std::string& symbol) const { return is_atom && atom == symbol; }
  bool head_is(const std::string& symbol) const { return !is_atom && !items.empty() && items[0].is(symbol); }
  std::string to_string() const;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<SExpr> parse_all(const std::string& text);
SExpr parse_one(const std::string& text);

/// Plain symbols are emitted verbatim, anything else as |quoted|.
std::string symbol(const std::string& name);
std::string unquote(const std::string& symbol);

std::string print(const Rational& r, Sort sort);
std::string print(const Term& t);
std::string print(const Formula& f);
std::string declaration(const Var& v);

/// Decodes a numeric literal tree: `3`, `2.5`, `(- 4.0)`, `(/ 1.0 3.0)`.
Rational to_rational(const SExpr& e);

/// Converts a solver formula back into the AST. `vars` resolves free symbols;
/// unknown symbols raise ParseError.
Formula to_formula(const SExpr& e, const std::map<std::string, Var>& vars);
Term to_term(const SExpr& e, const std::map<std::string, Var>& vars);

}  // namespace pitpn::smtlib
