#pragma once

// Result records produced by query runs, with JSON and text renderings.

#include "pitpn/expr.hpp"
#include "pitpn/net.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pitpn::io {

struct Report {
  std::string model;
  std::string query;
  std::string engine;
  /// reachable, unreachable, holds, violated, exact, underapprox,
  /// overapprox, unknown, simulated or inconclusive.
  std::string verdict = "inconclusive";
  bool conclusive = false;
  std::optional<Formula> constraint;
  /// Results of the time-sampled engine are not sound for dense time.
  bool sampled = false;
  std::vector<std::string> witness;
  std::vector<std::string> notes;
  std::size_t states = 0;
  std::size_t solver_calls = 0;
  double seconds = 0;
  std::string solver;
  std::string qe_tactic;
};

/// Constraint as an SMT-LIB 2 term that smtlib::to_formula reads back.
std::string constraint_smtlib(const Report& r);

std::string to_json(const Report& r, const Net* net = nullptr);
std::string to_text(const Report& r, const Net* net = nullptr);

}  // namespace pitpn::io
