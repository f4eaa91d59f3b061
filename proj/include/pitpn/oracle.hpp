#pragma once

// Interval-shrinking semantics of instantiated nets, kept only as an
// independent reference for the clock-based engine.

#include "pitpn/concrete.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pitpn::oracle {

struct RationalInterval {
  Rational lo;
  std::optional<Rational> hi;  // nullopt: infinity
  friend bool operator==(const RationalInterval&, const RationalInterval&) = default;
};

struct IntervalState {
  Tokens marking;
  /// Present exactly for the transitions enabled in `marking`.
  std::vector<std::optional<RationalInterval>> intervals;
  friend bool operator==(const IntervalState&, const IntervalState&) = default;
};

class IntervalSemantics {
 public:
  explicit IntervalSemantics(const Net& net);

  const Net& net() const { return net_; }
  IntervalState initial_state() const;
  /// nullopt when the delay is not allowed.
  std::optional<IntervalState> delay(const IntervalState& s, const Rational& delta) const;
  std::optional<IntervalState> fire(const IntervalState& s, std::size_t t) const;
  /// Firings in declaration order, then delay(step) if allowed.
  std::vector<std::pair<concrete::Event, IntervalState>> step(const IntervalState& s, const Rational& delay) const;

 private:
  Net net_;
  std::vector<RationalInterval> static_;
};

/// Def. 3: the clock state and the interval state describe the same
/// situation. On mismatch, `why` explains the first disagreement.
bool corresponds(const Net& net, const concrete::State& clocks, const IntervalState& intervals,
                 const std::vector<RationalInterval>& static_intervals, std::string* why = nullptr);

struct BisimReport {
  bool ok = true;
  std::size_t pairs = 0;
  std::size_t max_depth_reached = 0;
  std::vector<std::string> mismatches;
};

/// Explores both systems in lockstep up to `depth` events over the sampled
/// delay grid and checks that every move of one is matched by the other with
/// corresponding targets.
BisimReport bisim_check(const Net& net, std::size_t depth, const Rational& step = 1);

}  // namespace pitpn::oracle
