#pragma once

// Infix formula syntax and the line-based native model format:
//
//   net producer_consumer
//   param a : real
//   constraint a >= 0
//   place p4 = 1
//   trans t3 : p2, p4 -> p3 in [a, a]
//   trans t2 : p1 -> p2, p5 inhibit p3*2 in [2, inf]

#include "pitpn/net.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pitpn::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Resolves identifiers and function-style atoms while parsing a formula.
struct Symbols {
  /// Plain identifier to term (nullopt: unknown identifier).
  std::function<std::optional<Term>(const std::string&)> identifier;
  /// name(args...) used as a term, e.g. clock(t3). nullopt: unknown.
  std::function<std::optional<Term>(const std::string&, const std::vector<std::string>&)> term_call;
  /// name(args...) used as a formula, e.g. ksafe(1). nullopt: unknown.
  std::function<std::optional<Formula>(const std::string&, const std::vector<std::string>&)> formula_call;
};

Formula parse_formula(const std::string& text, const Symbols& symbols);
Term parse_term(const std::string& text, const Symbols& symbols);
LinExpr parse_linear(const std::string& text, const Symbols& symbols);

/// Symbols for formulas over a net's parameters only.
Symbols parameter_symbols(const Net& net);
/// Symbols for state predicates: place names ($m.*), clock(t) ($c.*), GT,
/// parameters, ksafe(k).
Symbols predicate_symbols(const Net& net);

Net parse_native(const std::string& text);
Net load_native(const std::string& path);
std::string print_native(const Net& net);

/// Infix rendering that parse_formula reads back.
std::string print_formula(const Formula& f, const Net* net = nullptr);

/// Equal structure; constraints are compared after printing.
bool structurally_equal(const Net& a, const Net& b);

std::string read_file(const std::string& path);

}  // namespace pitpn::io
