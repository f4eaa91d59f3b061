#pragma once

// Subsumption between symbolic states and the folded search built on it.
//
// A state is projected onto canonical variables (%m.<place>, %c.<transition>,
// %gt, %rc) by existentially closing everything else except the parameters.
// Because the names depend only on place and transition identifiers, the
// renaming between two projections of the same net is the identity.

#include "pitpn/symbolic.hpp"

#include <optional>
#include <vector>

namespace pitpn::folding {

Var canonical_place(const std::string& place);
Var canonical_clock(const std::string& transition);
Var canonical_global_time();
Var canonical_response();

struct ProjectedState {
  bool tick_ok = true;
  bool has_global_time = false;
  bool has_response = false;
  /// Ground marking entries; symbolic entries are nullopt and appear in the
  /// closure through their canonical variable.
  std::vector<std::optional<std::int64_t>> ground;
  /// Quantifier-free when elimination succeeded, otherwise an existential.
  Formula closure;
  bool eliminated = true;

  /// Same tick flag, same clock shape, same ground marking pattern.
  bool comparable(const ProjectedState& other) const;
};

/// The "now" projection: exists X. constraint and (canonical = expression).
ProjectedState project_now(const symbolic::Engine& engine, const symbolic::SymbolicState& s,
                           smt::SolverSession& solver);

/// Equivalent state whose constraint is the projection itself, with the
/// canonical variables renamed to fresh ones. Keeps constraints from growing
/// along a path. Constant clocks and ground marking entries stay literal.
symbolic::SymbolicState rebase(const symbolic::Engine& engine, const symbolic::SymbolicState& s,
                               const ProjectedState& p);

/// u below v: every concretization of u is one of v. nullopt when the solver
/// gives up. Different shapes are never related.
std::optional<bool> subsumes(smt::SolverSession& solver, const ProjectedState& u, const ProjectedState& v);

class VisitedSet {
 public:
  explicit VisitedSet(smt::SolverSession& solver) : solver_(&solver) {}

  /// Inserts `p` unless a member subsumes it (checked newest first). Returns
  /// whether it was inserted.
  bool insert_if_new(ProjectedState p);

  std::size_t size() const { return members_.size(); }
  std::size_t solver_checks() const { return checks_; }
  std::size_t unknowns() const { return unknowns_; }
  const std::vector<ProjectedState>& members() const { return members_; }

 private:
  smt::SolverSession* solver_;
  std::vector<ProjectedState> members_;
  std::size_t checks_ = 0;
  std::size_t unknowns_ = 0;
};

struct FoldedResult : symbolic::SearchResult {
  std::size_t visited_set_size = 0;
};

/// Breadth-first search that drops every generated state subsumed by one
/// already visited. `complete` with no solutions certifies unreachability.
/// Admitted states are rebased onto their projection.
/// Needs a solver with quantifier elimination.
FoldedResult folded_search(const symbolic::Engine& engine, const std::vector<symbolic::SymbolicState>& init,
                           const Formula& goal, const symbolic::Budget& budget = {});

}  // namespace pitpn::folding
