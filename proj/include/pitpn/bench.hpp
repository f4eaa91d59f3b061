#pragma once

// Benchmark harness: for every place p of every model, EF(p > n) for each
// threshold n, plus AG 1-safe per model, on the unfolded and folded engines.

#include "pitpn/net.hpp"
#include "pitpn/smt.hpp"

#include <chrono>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pitpn::bench {

enum class Outcome { Found, Exhausted, Timeout, Error };
/// "solution", "no solution", "TO" (inconclusive) and "error".
std::string to_string(Outcome o);

struct Cell {
  std::string model;
  /// Place name, or empty for the 1-safety row.
  std::string place;
  /// -1 for the 1-safety row.
  int threshold = 0;
  bool folded = false;
  Outcome outcome = Outcome::Error;
  double seconds = 0;
  std::size_t states = 0;
  std::string detail;

  std::string property() const;
};

struct Suite {
  std::vector<std::pair<std::string, Net>> models;
  std::vector<int> thresholds{0, 1, 2};
  bool safety = true;
  std::vector<bool> engines{false, true};  // folded?
  std::chrono::milliseconds timeout{600'000};
  smt::SolverConfig solver = smt::z3_config();
  unsigned jobs = 1;
};

/// producer_consumer, scheduling and tutorial from `models_dir` (native
/// format), each under its own initial constraint.
Suite default_suite(const std::string& models_dir);

using Progress = std::function<void(const Cell&)>;
Cell run_cell(const Net& net, const std::string& model, const std::string& place, int threshold, bool folded,
              const Suite& suite);
/// Cells in table order. Independent cells run on `suite.jobs` threads, each
/// with its own solver process.
std::vector<Cell> run(const Suite& suite, const Progress& progress = {});

/// One row per (model, property), one column per engine: outcome and time.
std::string table(const std::vector<Cell>& cells);
std::string to_json(const std::vector<Cell>& cells);

}  // namespace pitpn::bench
