#pragma once

// Symbolic execution of parametric nets: states are constrained terms whose
// markings and clocks are expressions over parameters and fresh solver
// variables, and each rule application strengthens the constraint.

#include "pitpn/concrete.hpp"
#include "pitpn/smt.hpp"
#include "pitpn/strategy.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pitpn::symbolic {

struct SymbolicState {
  bool tick_ok = true;
  Marking marking;
  std::vector<Term> clocks;
  /// Present when the engine runs with a global clock.
  std::optional<Term> global_time;
  /// Bounded-response clock: nullopt is noClock.
  std::optional<Term> response;
  /// Conjuncts; the state constraint is their conjunction.
  std::vector<Formula> constraint;
  std::size_t fresh = 0;

  Formula formula() const { return Formula::conj(constraint); }
};

struct Step {
  enum class Kind : std::uint8_t { Init, Tick, Fire };
  Kind kind = Kind::Init;
  /// Tick: the fresh duration variable.
  std::optional<Var> delay;
  std::size_t transition = 0;
};

class Inapplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solver could not decide a satisfiability query.
class SolverUnknown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EngineOptions {
  bool global_clock = false;
  const strategy::Strategy* strategy = nullptr;
};

/// Response-clock tracking for bounded response properties: phi starts the
/// clock, psi stops it.
struct ResponseSpec {
  Formula trigger;   // hole formula
  Formula response;  // hole formula
};

class Engine {
 public:
  Engine(const Net& net, smt::SolverSession& solver, EngineOptions options = {});

  const Net& net() const { return net_; }
  smt::SolverSession& solver() const { return *solver_; }
  const EngineOptions& options() const { return options_; }

  void track_response(ResponseSpec spec) { response_ = std::move(spec); }
  const std::optional<ResponseSpec>& response_spec() const { return response_; }

  /// Initial states: the net's initial marking under phi0 (plus the net's own
  /// constraint). Several states only when response tracking splits on the
  /// trigger. Throws Inapplicable when the constraint is unsatisfiable.
  std::vector<SymbolicState> initial_states(const Formula& phi0) const;
  SymbolicState init_state(const Formula& phi0) const;
  SymbolicState init_state(const Marking& m0, const Formula& phi0) const;

  /// Conjunction over finite-upper transitions of
  /// ite(active(t), T <= hi(t) - clock(t), true).
  Formula mte_predicate(const SymbolicState& s, const Term& delay) const;

  /// Both throw Inapplicable (unsatisfiable or flag guard) or SolverUnknown.
  SymbolicState tick(const SymbolicState& s) const;
  SymbolicState fire(const SymbolicState& s, std::size_t t) const;

  /// Rule applications without the satisfiability filter.
  std::optional<SymbolicState> tick_unchecked(const SymbolicState& s) const;
  std::optional<SymbolicState> fire_unchecked(const SymbolicState& s, std::size_t t) const;

  /// Satisfiable successors (filtered through the strategy, if any). With
  /// response tracking a fire may yield two states.
  std::vector<std::pair<Step, SymbolicState>> successors(const SymbolicState& s) const;

  /// Replaces the holes of a state predicate with the state's expressions.
  Formula instantiate(const Formula& predicate, const SymbolicState& s) const;

  /// Satisfiability with Unknown turned into SolverUnknown.
  bool satisfiable(const Formula& f) const;

  std::string describe(const SymbolicState& s) const;

  /// Satisfiable response-clock branches of a freshly reached state: the
  /// trigger starts the clock, the response stops it. Needs response tracking.
  std::vector<SymbolicState> split_response(const SymbolicState& s) const;

 private:
  Term fresh_definition(SymbolicState& s, const std::string& kind, const std::string& id, const Term& value) const;

  Net net_;
  smt::SolverSession* solver_;
  EngineOptions options_;
  std::optional<ResponseSpec> response_;
};

/// Hole for the response clock in goal formulas. States without a running
/// response clock read it as -1.
std::string response_hole();

/// Fresh variable name `#<kind>-<id>-<counter>`.
std::string fresh_name(const std::string& kind, const std::string& id, std::size_t counter);

struct Budget {
  std::optional<std::size_t> max_depth;
  std::optional<std::size_t> max_solutions;
  std::size_t max_states = 200'000;
  std::optional<std::chrono::milliseconds> time_limit;
};

/// Node of a search tree: the path to any node is recovered through parents.
struct SearchNode {
  SymbolicState state;
  Step step;
  std::optional<std::size_t> parent;
  std::size_t depth = 0;
  /// Index into SearchResult::roots of the initial state this path starts from.
  std::size_t root = 0;
};

struct Solution {
  std::size_t node = 0;
  /// constraint(s) and goal(s)
  Formula witness;
};

struct SearchResult {
  std::vector<SearchNode> nodes;
  /// The initial states as given, before any admission rewrote them.
  std::vector<SymbolicState> roots;
  std::vector<Solution> solutions;
  /// True when every successor was explored (no budget cut the frontier).
  bool complete = false;
  /// Why the search stopped early: "", "depth", "solutions", "states", "time", "unknown".
  std::string stop_reason;
  std::size_t visited = 0;
  std::size_t subsumed = 0;
  std::size_t frontier = 0;
  std::size_t unknown = 0;

  std::vector<std::size_t> path(std::size_t node) const;
};

/// Breadth-first smt-search without folding.
SearchResult smt_search(const Engine& engine, const std::vector<SymbolicState>& init, const Formula& goal,
                        const Budget& budget = {});

/// Decides whether a newly generated state enters the frontier and may
/// replace it by an equivalent, smaller state (folding plugs its visited set
/// in here). Empty: admit everything unchanged.
using Admission = std::function<bool(SymbolicState&)>;
SearchResult search(const Engine& engine, const std::vector<SymbolicState>& init, const Formula& goal,
                    const Budget& budget, const Admission& admit);

/// Concrete counterpart of a symbolic path: parameter values taken from a
/// model of the witness, tick delays from the fresh duration variables.
struct Concretization {
  ParamValuation params;
  concrete::Trace trace;
  bool replayed = false;
  bool goal_holds = false;
  std::string error;
};

/// Re-derives the path from its root with the plain rules, extracts a model
/// of the resulting constraint and the goal, instantiates the net, replays
/// the path through the concrete engine (R1, or R2 with a global clock) and
/// evaluates the goal at the end. With response tracking the response clock
/// is recomputed along the concrete trace.
Concretization concretize(const Engine& engine, const SearchResult& result, const Solution& solution,
                          const Formula& goal);

}  // namespace pitpn::symbolic
