#include "pitpn/bench.hpp"
#include "pitpn/query.hpp"
#include "pitpn/romeo.hpp"
#include "pitpn/symbolic.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <set>
#include <thread>

namespace {

using namespace pitpn;

constexpr int kVerdict = 0;
constexpr int kInconclusive = 2;
constexpr int kInputError = 3;

struct Common {
  std::string model;
  std::string format = "native";
  std::string query;
  std::string engine;
  double timeout = 0;
  std::string solver;
  std::string adapter = "z3";
  std::string report = "text";
};

smt::SolverConfig solver_config(const Common& c) {
  std::string path = c.solver.empty() ? smt::default_solver_path() : c.solver;
  if (c.adapter == "generic") return smt::generic_config(path, {"-in"});
  return smt::z3_config(path);
}

Net load_model(const Common& c) {
  if (c.format == "romeo") {
    auto imported = io::load_romeo(c.model);
    for (const auto& d : imported.diagnostics) std::cerr << "warning: " << d << "\n";
    return imported.net;
  }
  Net net = io::load_native(c.model);
  auto issues = validate(net);
  if (!issues.empty()) {
    std::string msg = "model is not well-formed:";
    for (const auto& i : issues) msg += "\n  " + i;
    throw io::ParseError(msg);
  }
  return net;
}

void add_common(CLI::App* cmd, Common& c, bool needs_query) {
  cmd->add_option("--model", c.model, "model file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", c.format, "model format")->check(CLI::IsMember({"native", "romeo"}));
  auto q = cmd->add_option("--query", c.query, "query file")->check(CLI::ExistingFile);
  if (needs_query) q->required();
  cmd->add_option("--engine", c.engine, "engine override")->check(CLI::IsMember({"concrete", "symbolic", "folded"}));
  cmd->add_option("--timeout", c.timeout, "time limit in seconds");
  cmd->add_option("--solver", c.solver, "solver executable");
  cmd->add_option("--solver-adapter", c.adapter, "z3 (with quantifier elimination) or generic (quantifier-free)")
      ->check(CLI::IsMember({"z3", "generic"}));
  cmd->add_option("--report", c.report, "output format")->check(CLI::IsMember({"json", "text"}));
}

int run_query_command(const Common& c, const std::set<io::QueryKind>& accepted, const std::string& command) {
  Net net = load_model(c);
  io::Query q = io::load_query(c.query);
  if (!accepted.count(q.kind)) {
    std::cerr << "error: '" << command << "' does not run " << io::to_string(q.kind) << " queries\n";
    return kInputError;
  }
  io::RunOptions opts;
  opts.solver = solver_config(c);
  if (!c.engine.empty()) opts.engine = io::parse_engine(c.engine);
  if (c.timeout > 0) opts.timeout = c.timeout;
  io::Report r = io::run_query(net, q, opts);
  std::cout << (c.report == "json" ? io::to_json(r, &net) : io::to_text(r, &net));
  return r.conclusive ? kVerdict : kInconclusive;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analysis of parametric time Petri nets with inhibitor arcs"};
  app.require_subcommand(1);

  Common check, synth, sim, mc;
  add_common(app.add_subcommand("check", "reachability, invariants and bounded response"), check, true);
  add_common(app.add_subcommand("synth", "parameter synthesis"), synth, true);
  auto* sim_cmd = app.add_subcommand("simulate", "random run of the time-sampled semantics");
  add_common(sim_cmd, sim, false);
  add_common(app.add_subcommand("mc", "LTL model checking on the time-sampled state graph"), mc, true);

  auto* bench_cmd = app.add_subcommand("bench", "EF(p > n) and 1-safety over the benchmark models");
  std::string models_dir = "models";
  std::vector<std::string> bench_models;
  std::vector<int> thresholds{0, 1, 2};
  double bench_timeout = 600;
  unsigned jobs = 1;
  std::string bench_report = "text";
  std::string bench_solver;
  bool no_safety = false;
  std::string bench_engine;
  bench_cmd->add_option("--models-dir", models_dir, "directory with the native benchmark models");
  bench_cmd->add_option("--model", bench_models, "restrict to these model files");
  bench_cmd->add_option("--thresholds", thresholds, "values of n in EF(p > n)");
  bench_cmd->add_option("--timeout", bench_timeout, "per-cell time limit in seconds");
  bench_cmd->add_option("--jobs", jobs, "parallel cells")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--engine", bench_engine, "only this engine")->check(CLI::IsMember({"symbolic", "folded"}));
  bench_cmd->add_option("--solver", bench_solver, "solver executable");
  bench_cmd->add_option("--report", bench_report, "output format")->check(CLI::IsMember({"json", "text"}));
  bench_cmd->add_flag("--no-safety", no_safety, "skip the 1-safety rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (app.got_subcommand("check"))
      return run_query_command(check, {io::QueryKind::SearchEf, io::QueryKind::CheckAg, io::QueryKind::BoundedResponse},
                               "check");
    if (app.got_subcommand("synth"))
      return run_query_command(synth, {io::QueryKind::EfSynth, io::QueryKind::AgSynth, io::QueryKind::EfTimed}, "synth");
    if (app.got_subcommand("mc")) return run_query_command(mc, {io::QueryKind::McLtl}, "mc");
    if (app.got_subcommand("simulate")) {
      if (sim.query.empty()) {
        Net net = load_model(sim);
        io::Query q = io::parse_query("query simulate\n");
        io::RunOptions opts;
        io::Report r = io::run_query(net, q, opts);
        std::cout << (sim.report == "json" ? io::to_json(r, &net) : io::to_text(r, &net));
        return kVerdict;
      }
      return run_query_command(sim, {io::QueryKind::Simulate}, "simulate");
    }

    bench::Suite suite;
    if (bench_models.empty()) {
      suite = bench::default_suite(models_dir);
    } else {
      for (const auto& path : bench_models) {
        Net net = io::load_native(path);
        suite.models.emplace_back(net.name, net);
      }
    }
    suite.thresholds = thresholds;
    suite.safety = !no_safety;
    if (!bench_engine.empty()) suite.engines = {bench_engine == "folded"};
    suite.timeout = std::chrono::milliseconds(static_cast<long long>(bench_timeout * 1000));
    if (!bench_solver.empty()) suite.solver = smt::z3_config(bench_solver);
    suite.jobs = jobs;
    auto cells = bench::run(suite, [](const bench::Cell& c) {
      std::cerr << c.model << " " << c.property() << " [" << (c.folded ? "folded" : "unfolded")
                << "]: " << bench::to_string(c.outcome) << "\n";
    });
    std::cout << (bench_report == "json" ? bench::to_json(cells) : bench::table(cells));
    for (const auto& c : cells)
      if (c.outcome == bench::Outcome::Error) return kInconclusive;
    return kVerdict;
  } catch (const io::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const StructuralError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const strategy::StrategyError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const smt::UnsupportedOperation& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInconclusive;
  }
}
