#pragma once

#include "pitpn/expr.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pitpn {

namespace smt {
class SolverSession;
}

/// Upper endpoint of a firing interval; nullopt means infinity.
struct TimeBound {
  std::optional<LinExpr> value;

  static TimeBound infinity() { return {}; }
  static TimeBound finite(LinExpr e) { return TimeBound{std::move(e)}; }
  bool is_infinite() const { return !value.has_value(); }
  friend bool operator==(const TimeBound&, const TimeBound&) = default;
};

struct Interval {
  LinExpr lo;
  TimeBound hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Arc {
  std::size_t place = 0;
  std::int64_t weight = 1;
  friend bool operator==(const Arc&, const Arc&) = default;
};

struct Transition {
  std::string name;
  std::vector<Arc> pre;
  std::vector<Arc> post;
  std::vector<Arc> inhibit;
  Interval interval;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Param {
  std::string name;
  /// Real for time parameters, Int for marking parameters.
  Sort sort = Sort::Real;
  Var var() const { return Var{name, sort}; }
  friend bool operator==(const Param&, const Param&) = default;
};

/// One integer-sorted expression per place, in place order.
using Marking = std::vector<LinExpr>;
/// Ground token counts, in place order.
using Tokens = std::vector<std::int64_t>;

struct Net {
  std::string name;
  std::vector<std::string> places;
  std::vector<Transition> transitions;
  std::vector<Param> params;
  Marking initial;
  Formula constraint;

  std::optional<std::size_t> place_index(const std::string& id) const;
  std::optional<std::size_t> transition_index(const std::string& id) const;
  std::size_t require_place(const std::string& id) const;
  std::size_t require_transition(const std::string& id) const;
  const Param* find_param(const std::string& id) const;
  std::vector<Var> param_vars() const;
  std::size_t arc_count() const;
  bool is_parametric() const { return !params.empty(); }
  /// The initial marking when every entry is a constant.
  std::optional<Tokens> ground_initial() const;
};

using NetPtr = std::shared_ptr<const Net>;

class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Marking-level predicates (symbolic markings).
Formula enabled(const Net& net, const Marking& m, std::size_t t);
Formula inhibited(const Net& net, const Marking& m, std::size_t t);
Formula active(const Net& net, const Marking& m, std::size_t t);
Formula newly_enabled(const Net& net, std::size_t t, const Marking& m, std::size_t tf);
Marking fire_marking(const Net& net, const Marking& m, std::size_t tf);
Formula k_safe(std::int64_t k, const Marking& m);

// The same predicates on ground markings.
bool enabled(const Net& net, const Tokens& m, std::size_t t);
bool inhibited(const Net& net, const Tokens& m, std::size_t t);
bool active(const Net& net, const Tokens& m, std::size_t t);
bool newly_enabled(const Net& net, std::size_t t, const Tokens& m, std::size_t tf);
Tokens fire_marking(const Net& net, const Tokens& m, std::size_t tf);
bool k_safe(std::int64_t k, const Tokens& m);

/// Pre(t) <= m - Pre(tf): t stays enabled in the intermediate marking.
bool enabled_in_intermediate(const Net& net, std::size_t t, const Tokens& m, std::size_t tf);
Formula enabled_in_intermediate(const Net& net, std::size_t t, const Marking& m, std::size_t tf);

Marking to_marking(const Tokens& tokens);
std::optional<Tokens> ground(const Marking& m);

using ParamValuation = Assignment;

/// Substitutes every parameter. Throws StructuralError when a parameter is
/// missing, a marking parameter gets a non-natural value, or the valuation
/// violates the net's constraint.
Net instantiate(const Net& net, const ParamValuation& valuation);

/// Static well-formedness report; an empty list means the net is clean.
/// Satisfiability checks run only when a solver session is supplied.
std::vector<std::string> validate(const Net& net, smt::SolverSession* solver = nullptr);

// Names of the holes a state predicate may mention, besides parameters.
std::string place_hole(const std::string& place);
std::string clock_hole(const std::string& transition);
std::string global_time_hole();
Var place_hole_var(const std::string& place);
Var clock_hole_var(const std::string& transition);
Var global_time_var();

}  // namespace pitpn
