#pragma once

// LTL over state predicates: parser, tableau translation to a (generalized)
// Büchi automaton, and emptiness checking of its product with an explicit
// state graph by nested depth-first search.

#include "pitpn/concrete.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pitpn::ltl {

struct Node;

class Ltl {
 public:
  enum class Kind : std::uint8_t { True, False, Prop, Not, And, Or, Next, Until, Release };

  static Ltl truth();
  static Ltl falsity();
  static Ltl prop(std::size_t index);
  static Ltl negation(const Ltl& f);
  static Ltl conj(const Ltl& a, const Ltl& b);
  static Ltl disj(const Ltl& a, const Ltl& b);
  static Ltl next(const Ltl& f);
  static Ltl until(const Ltl& a, const Ltl& b);
  static Ltl release(const Ltl& a, const Ltl& b);
  static Ltl eventually(const Ltl& f) { return until(truth(), f); }
  static Ltl always(const Ltl& f) { return release(falsity(), f); }
  static Ltl implies(const Ltl& a, const Ltl& b) { return disj(negation(a), b); }

  Kind kind() const;
  std::size_t prop_index() const;
  const Ltl& left() const;   // operand of Not/Next, first operand otherwise
  const Ltl& right() const;

  /// Negation normal form: negations only directly above propositions.
  Ltl nnf() const;
  std::string to_string(const std::vector<std::string>& prop_names = {}) const;
  friend bool operator==(const Ltl& a, const Ltl& b);
  friend bool operator<(const Ltl& a, const Ltl& b);

 private:
  explicit Ltl(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
  friend struct Node;
};

/// A parsed property: the temporal skeleton plus one state formula per
/// proposition index.
struct Property {
  Ltl formula = Ltl::truth();
  std::vector<Formula> props;
  std::vector<std::string> prop_text;
};

class LtlParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operators: [] <> G F X U R W ~ ! /\ \/ && || -> <->; atoms are state
/// predicates (p3 = 0, clock(t1) >= 2, ksafe(1), in-time [5, 10], true).
Property parse(const std::string& text, const Net& net);

/// Explicit Kripke structure: labels[s][i] is the value of proposition i.
struct Kripke {
  std::vector<std::size_t> initial;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::vector<bool>> labels;
};

struct Buchi {
  struct State {
    std::vector<std::size_t> pos;  // propositions required true on entry
    std::vector<std::size_t> neg;  // propositions required false on entry
    bool contradictory = false;
    std::vector<std::size_t> succ;
    bool initial = false;
  };
  std::vector<State> states;
  /// Generalized acceptance: one set per Until subformula.
  std::vector<std::vector<bool>> accepting;
};

Buchi translate(const Ltl& f);

struct CheckResult {
  bool holds = true;
  /// Counterexample (or witness for exists_path) as Kripke state indices:
  /// stem then a cycle that returns to cycle.front().
  std::vector<std::size_t> stem;
  std::vector<std::size_t> cycle;
  std::size_t product_states = 0;
};

/// Every infinite path satisfies f. Deadlocked states stutter.
CheckResult check(const Kripke& k, const Ltl& f);
/// Some infinite path satisfies f; holds = true means a witness exists.
CheckResult exists_path(const Kripke& k, const Ltl& f);

struct ConcreteResult {
  concrete::Verdict verdict = concrete::Verdict::Inconclusive;  // Found = property holds
  bool holds = false;
  std::vector<concrete::State> stem;
  std::vector<concrete::State> cycle;
  std::size_t graph_states = 0;
  std::string reason;
};

/// Builds the sampled state graph and model-checks it. `universal` selects
/// A(phi) (default) or E(phi) = not A(not phi).
ConcreteResult model_check(const concrete::Engine& engine, const Property& property, bool universal = true,
                           std::size_t max_states = 2'000'000);

}  // namespace pitpn::ltl
