#pragma once

// Clock-based execution of instantiated nets with time sampling, and
// explicit-state reachability over the sampled state graph.

#include "pitpn/net.hpp"
#include "pitpn/strategy.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pitpn::concrete {

enum class TickFlag : std::uint8_t { None, Ok, NotOk };

/// R0 = {false, false}, R1 = {true, false}, R2 = {true, true}. The
/// time-bounded analyses use {false, true}: free ticking plus a global clock.
struct Mode {
  bool tick_alternation = false;
  bool global_clock = false;

  static Mode r0() { return {false, false}; }
  static Mode r1() { return {true, false}; }
  static Mode r2() { return {true, true}; }
  static Mode timed() { return {false, true}; }
};

struct State {
  TickFlag flag = TickFlag::None;
  Tokens marking;
  std::vector<Rational> clocks;
  std::optional<Rational> global_time;

  friend bool operator==(const State&, const State&) = default;
};

struct StateHash {
  std::size_t operator()(const State& s) const;
};

struct Event {
  enum class Kind : std::uint8_t { Tick, Fire };
  Kind kind = Kind::Tick;
  Rational delta;
  std::size_t transition = 0;

  static Event tick(Rational d) { return {Kind::Tick, std::move(d), 0}; }
  static Event fire(std::size_t t) { return {Kind::Fire, 0, t}; }
  friend bool operator==(const Event&, const Event&) = default;
};

struct Trace {
  State initial;
  std::vector<Event> events;
  /// states[i] is the state after events[i].
  std::vector<State> states;

  const State& last() const { return states.empty() ? initial : states.back(); }
};

class RuleNotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Engine {
 public:
  /// `net` must be fully instantiated (no parameters, constant intervals and
  /// marking).
  Engine(const Net& net, Mode mode = Mode::r1(), Rational step = 1);

  const Net& net() const { return net_; }
  Mode mode() const { return mode_; }
  const Rational& step() const { return step_; }
  const Rational& lower(std::size_t t) const { return lo_[t]; }
  const std::optional<Rational>& upper(std::size_t t) const { return hi_[t]; }

  State initial_state() const;
  /// nullopt is infinity.
  std::optional<Rational> mte(const State& s) const;
  State tick(const State& s, const Rational& delta) const;
  bool can_fire(const State& s, std::size_t t) const;
  State fire(const State& s, std::size_t t) const;
  State apply(const State& s, const Event& e) const;

  /// Fire successors in declaration order, then tick(step) when allowed.
  /// Under tick alternation the tick successors are tick(k * step) for every
  /// k with k * step <= mte (just tick(step) when mte is infinite).
  std::vector<std::pair<Event, State>> successors(const State& s,
                                                  const strategy::Strategy* strat = nullptr) const;

  /// Throws when a transition-clock invariant fails.
  void check_invariants(const State& s) const;

  /// Re-applies every event from the trace's initial state and compares.
  bool replay(const Trace& trace, std::string* error = nullptr) const;

  std::string describe(const State& s) const;
  std::string describe(const Event& e) const;

 private:
  Net net_;
  Mode mode_;
  Rational step_;
  std::vector<Rational> lo_;
  std::vector<std::optional<Rational>> hi_;
};

/// Values for the predicate holes ($m.*, $c.*, $gt) of a state.
Assignment holes(const Net& net, const State& s);

using StatePredicate = std::function<bool(const State&)>;
/// Compiles a hole formula (see net.hpp) into a predicate over states.
StatePredicate compile(const Net& net, const Formula& f);

enum class Verdict { Found, NotFound, Inconclusive };
std::string to_string(Verdict v);

struct SearchOptions {
  /// Explore only states whose global time is at most this (needs a global clock).
  std::optional<Rational> time_bound;
  /// Solutions must have global time within [lo, hi]; hi nullopt is infinity.
  std::optional<std::pair<Rational, std::optional<Rational>>> window;
  std::optional<std::size_t> max_depth;
  std::size_t max_states = 5'000'000;
  const strategy::Strategy* strategy = nullptr;
};

struct SearchResult {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Trace> witness;
  std::size_t states = 0;
  std::size_t edges = 0;
  std::string reason;
};

SearchResult search_ef(const Engine& engine, const State& init, const StatePredicate& goal,
                       const SearchOptions& options = {});

/// Found = counterexample (witness is a trace to a violating state).
SearchResult check_ag(const Engine& engine, const State& init, const StatePredicate& invariant,
                      const SearchOptions& options = {});

/// The full sampled state graph (budget-guarded) for LTL checking and tests.
struct StateGraph {
  std::vector<State> states;
  std::vector<std::vector<std::pair<Event, std::size_t>>> edges;
  bool complete = false;
};

StateGraph explore(const Engine& engine, const State& init, std::size_t max_states = 2'000'000,
                   const strategy::Strategy* strat = nullptr);

}  // namespace pitpn::concrete
