#pragma once

// Query files: one `key value` setting per line, `#` starts a comment.
//
//   query ef-synth
//   init a >= 0
//   goal !ksafe(1)
//   engine folded
//   max-solutions 1
//
// Kinds and the keys they read:
//   simulate          steps, seed, params, mode, step
//   search-ef         goal
//   check-ag          safe
//   mc-ltl            ltl, path (all | exists)
//   ef-synth          goal
//   ag-synth          safe
//   ef-timed          goal, window ([lo, hi] or [lo, inf])
//   bounded-response  trigger, response, bound
// Shared keys: init, engine (concrete | symbolic | folded), params
// (a = 3, b = 5/2), mode (r0 | r1 | r2 | timed), step, max-depth,
// max-states, max-solutions, max-iterations, timeout (seconds),
// strategy <name> = <expr>, use <name>.

#include "pitpn/native_format.hpp"
#include "pitpn/report.hpp"
#include "pitpn/smt.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pitpn::io {

enum class QueryKind { Simulate, SearchEf, CheckAg, McLtl, EfSynth, AgSynth, EfTimed, BoundedResponse };
std::string to_string(QueryKind k);

enum class EngineKind { Concrete, Symbolic, Folded };
std::string to_string(EngineKind e);
EngineKind parse_engine(const std::string& text);

class QueryError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct Query {
  QueryKind kind = QueryKind::SearchEf;
  std::string init = "true";
  std::string goal;
  std::string safe;
  std::string ltl;
  bool ltl_exists = false;
  std::string window_lo;
  std::string window_hi;  // empty: infinity
  std::string trigger;
  std::string response;
  std::string bound;
  std::optional<EngineKind> engine;
  std::vector<std::pair<std::string, std::string>> params;
  /// Empty: r0 for simulate and mc-ltl, r1 otherwise.
  std::string mode;
  std::string step = "1";
  std::size_t steps = 20;
  unsigned seed = 0;
  std::optional<std::size_t> max_depth;
  std::optional<std::size_t> max_states;
  std::optional<std::size_t> max_solutions;
  std::optional<std::size_t> max_iterations;
  std::optional<double> timeout;
  std::vector<std::pair<std::string, std::string>> strategies;
  std::string use_strategy;
};

/// Rejects timed A-eventually, E-globally and until modalities, which only
/// the concrete LTL checker handles.
Query parse_query(const std::string& text);
Query load_query(const std::string& path);

struct RunOptions {
  smt::SolverConfig solver = smt::z3_config();
  /// Overrides the query's engine.
  std::optional<EngineKind> engine;
  /// Overrides the query's timeout, in seconds.
  std::optional<double> timeout;
  std::string model_name;
};

/// Throws QueryError for inputs the query cannot run on (wrong engine,
/// missing parameter values, unknown identifiers).
Report run_query(const Net& net, const Query& query, const RunOptions& options = {});

}  // namespace pitpn::io
