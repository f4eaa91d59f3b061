#pragma once

// Solver sessions over SMT-LIB 2 text, talking to an external solver process.
//
// Two adapters exist. The z3 adapter supports quantifiers and quantifier
// elimination; the generic adapter speaks plain quantifier-free SMT-LIB and
// reports `supports_qe() == false`, which callers use to refuse folding and
// synthesis instead of silently degrading.

#include "pitpn/expr.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pitpn::smt {

enum class SatResult { Sat, Unsat, Unknown };
std::string to_string(SatResult r);

struct SolverConfig {
  std::string name = "z3";
  std::string executable;
  std::vector<std::string> arguments;
  std::chrono::milliseconds timeout{60'000};
  bool quantifier_elimination = true;
  /// Emitted as (set-logic ...) when non-empty.
  std::string logic;
  /// Whether the solver understands (set-option :timeout <ms>).
  bool timeout_option = true;
};

/// PITPN_SOLVER if set, otherwise the z3 found at build time.
std::string default_solver_path();
SolverConfig z3_config(const std::string& executable = default_solver_path());
/// Quantifier-free adapter for any SMT-LIB 2 solver reading stdin.
SolverConfig generic_config(const std::string& executable, std::vector<std::string> arguments,
                            std::string logic = "QF_LIRA");

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckOutcome {
  SatResult result = SatResult::Unknown;
  /// Values for every free variable of the checked formula when Sat.
  Assignment model;
  std::string reason;
};

struct SolverStats {
  std::size_t checks = 0;
  std::size_t eliminations = 0;
  std::size_t restarts = 0;
  std::chrono::nanoseconds solver_time{0};
  /// Tactic of the last successful quantifier elimination.
  std::string qe_tactic;
};

class SolverProcess;

class SolverSession {
 public:
  explicit SolverSession(SolverConfig config);
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  const SolverConfig& config() const { return config_; }
  bool supports_qe() const { return config_.quantifier_elimination; }
  const SolverStats& stats() const { return stats_; }

  CheckOutcome check_sat(const Formula& f, bool want_model = true);
  /// true: valid, false: has a countermodel, nullopt: solver gave up.
  std::optional<bool> check_valid(const Formula& f);
  std::optional<bool> entails(const Formula& premise, const Formula& conclusion);
  std::optional<bool> equivalent(const Formula& a, const Formula& b);

  /// Quantifier-free formula equivalent to `f` (which may contain
  /// existential quantifiers). Throws UnsupportedOperation on QF adapters.
  Formula eliminate(const Formula& f);
  /// Context-dependent simplification (solver tactics); returns `f` itself
  /// on adapters without tactic support or when the solver fails.
  Formula simplify(const Formula& f);
  /// eliminate(exists vars. f)
  Formula project_out(const std::vector<Var>& vars, const Formula& f);

  /// Declared-variable bookkeeping is reset after a solver crash or timeout.
  void restart();

 private:
  void ensure_started();
  void declare(const std::set<Var>& vars);
  std::string exchange(const std::string& commands);

  SolverConfig config_;
  std::unique_ptr<SolverProcess> process_;
  std::map<std::string, Sort> declared_;
  SolverStats stats_;
};

}  // namespace pitpn::smt
