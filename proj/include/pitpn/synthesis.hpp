#pragma once

// Parameter synthesis on top of the symbolic and folded searches.

#include "pitpn/folding.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pitpn::synthesis {

/// OverApprox: a safety region from which unsafe values may not all have been
/// removed (budget or iteration cap).
enum class Status { Exact, UnderApprox, OverApprox, Unknown };
std::string to_string(Status s);

/// Thrown for timed modalities the symbolic engine does not decide.
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  smt::SolverConfig solver = smt::z3_config();
  /// Folded search (needs quantifier elimination) or plain smt-search.
  bool folded = true;
  symbolic::Budget budget;
  std::size_t max_iterations = 64;
  const strategy::Strategy* strategy = nullptr;
  /// Replay every witness through the concrete engine.
  bool concretize = true;
  /// Initial marking override; defaults to the net's.
  std::optional<Marking> initial;
};

/// One path found by a search, with its parameter region.
struct Witness {
  Formula region;
  std::vector<std::string> steps;
  std::optional<symbolic::Concretization> concrete;
};

struct Result {
  /// Over the parameters only.
  Formula constraint;
  Status status = Status::Unknown;
  std::size_t iterations = 0;
  std::vector<Witness> witnesses;
  std::size_t states = 0;
  std::size_t solver_checks = 0;
  std::string note;
  /// Quantifier elimination tactic the solver last used.
  std::string qe_tactic;
};

/// Parameter values for which some run reaches `pred`: the union over found
/// solutions of the projected witness constraints.
Result ef_synth(const Net& net, const Formula& phi0, const Formula& pred, const Options& options = {});

/// Parameter values under which no run leaves `safe`: repeatedly removes the
/// parameter region of a counterexample until the search finds none.
Result ag_synth(const Net& net, const Formula& phi0, const Formula& safe, const Options& options = {});

/// A time window lo <= GT <= hi; hi nullopt is infinity. Endpoints may use
/// variables that are not net parameters; they become synthesis parameters.
struct Window {
  LinExpr lo;
  std::optional<LinExpr> hi;
};

/// EF with the global clock inside the window.
Result ef_timed(const Net& net, const Formula& phi0, const Formula& pred, const Window& window,
                const Options& options = {});

enum class Verdict { Holds, Violated, Inconclusive };
std::string to_string(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Witness> counterexample;
  std::size_t states = 0;
  std::size_t solver_checks = 0;
  std::string note;
  std::string qe_tactic;
};

/// Every `trigger` state is followed by a `response` state within `bound`.
CheckResult bounded_response(const Net& net, const Formula& phi0, const Formula& trigger, const Formula& response,
                             const LinExpr& bound, const Options& options = {});

/// AG safe, decided by a folded search for not safe.
CheckResult ag_check(const Net& net, const Formula& phi0, const Formula& safe, const Options& options = {});

/// Drops conjuncts and disjuncts implied by their siblings, then sorts.
Formula tidy(smt::SolverSession& solver, const Formula& f);

/// Projection of a formula onto the given variables.
Formula project_onto(smt::SolverSession& solver, const Formula& f, const std::set<std::string>& keep);

}  // namespace pitpn::synthesis
