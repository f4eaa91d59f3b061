#include "pitpn/bench.hpp"

#include "pitpn/folding.hpp"
#include "pitpn/native_format.hpp"

#include <json.hpp>

#include <atomic>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace pitpn::bench {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Found: return "solution";
    case Outcome::Exhausted: return "no solution";
    case Outcome::Timeout: return "TO";
    case Outcome::Error: return "error";
  }
  return "?";
}

std::string Cell::property() const {
  if (threshold < 0) return "AG 1-safe";
  return "EF(" + place + " > " + std::to_string(threshold) + ")";
}

Suite default_suite(const std::string& models_dir) {
  Suite s;
  for (const char* name : {"producer_consumer", "scheduling", "tutorial"})
    s.models.emplace_back(name, io::load_native(models_dir + "/" + name + ".pn"));
  return s;
}

Cell run_cell(const Net& net, const std::string& model, const std::string& place, int threshold, bool folded,
              const Suite& suite) {
  Cell c;
  c.model = model;
  c.place = place;
  c.threshold = threshold;
  c.folded = folded;
  auto start = std::chrono::steady_clock::now();
  try {
    Formula goal;
    if (threshold < 0) {
      Marking m;
      for (const auto& p : net.places) m.push_back(LinExpr::variable(place_hole_var(p)));
      goal = !k_safe(1, m);
    } else {
      goal = Term::variable(place_hole_var(place)) > Term(LinExpr(threshold));
    }
    smt::SolverSession solver(suite.solver);
    symbolic::Engine engine(net, solver);
    symbolic::Budget budget;
    budget.max_solutions = 1;
    budget.time_limit = suite.timeout;
    budget.max_states = 10'000'000;
    auto init = engine.initial_states(Formula::truth());
    symbolic::SearchResult r = folded ? folding::folded_search(engine, init, goal, budget)
                                      : symbolic::smt_search(engine, init, goal, budget);
    c.states = r.nodes.size();
    if (!r.solutions.empty())
      c.outcome = Outcome::Found;
    else if (r.complete)
      c.outcome = Outcome::Exhausted;
    else {
      c.outcome = Outcome::Timeout;
      c.detail = r.stop_reason;
    }
  } catch (const std::exception& e) {
    c.outcome = Outcome::Error;
    c.detail = e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

std::vector<Cell> run(const Suite& suite, const Progress& progress) {
  struct Job {
    const Net* net;
    std::string model, place;
    int threshold;
    bool folded;
  };
  std::vector<Job> jobs;
  for (const auto& [name, net] : suite.models) {
    for (int n : suite.thresholds)
      for (const auto& p : net.places)
        for (bool f : suite.engines) jobs.push_back({&net, name, p, n, f});
    if (suite.safety)
      for (bool f : suite.engines) jobs.push_back({&net, name, "", -1, f});
  }
  std::vector<Cell> cells(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      const Job& j = jobs[i];
      cells[i] = run_cell(*j.net, j.model, j.place, j.threshold, j.folded, suite);
      if (progress) {
        std::lock_guard lock(report);
        progress(cells[i]);
      }
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(suite.jobs, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return cells;
}

namespace {

std::string entry(const Cell& c) {
  if (c.outcome == Outcome::Timeout) return "TO";
  std::ostringstream out;
  out << to_string(c.outcome);
  if (c.outcome != Outcome::Error) out << " " << std::fixed << std::setprecision(1) << c.seconds * 1000 << " ms";
  return out.str();
}

}  // namespace

std::string table(const std::vector<Cell>& cells) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::map<std::pair<std::string, std::string>, std::map<bool, const Cell*>> grid;
  for (const auto& c : cells) {
    auto key = std::make_pair(c.model, c.property());
    if (!grid.count(key)) rows.push_back(key);
    grid[key][c.folded] = &c;
  }
  std::size_t w_model = 5, w_prop = 8;
  for (const auto& [m, p] : rows) {
    w_model = std::max(w_model, m.size());
    w_prop = std::max(w_prop, p.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(w_model)) << "Model" << " | " << std::setw(static_cast<int>(w_prop))
      << "Property" << " | " << std::setw(22) << "unfolded" << " | " << "folded\n";
  out << std::string(w_model + w_prop + 22 + 20, '-') << "\n";
  for (const auto& key : rows) {
    const auto& row = grid[key];
    auto show = [&](bool f) { return row.count(f) ? entry(*row.at(f)) : std::string("-"); };
    out << std::setw(static_cast<int>(w_model)) << key.first << " | " << std::setw(static_cast<int>(w_prop))
        << key.second << " | " << std::setw(22) << show(false) << " | " << show(true) << "\n";
  }
  out << "TO: timeout, inconclusive.\n";
  return out.str();
}

std::string to_json(const std::vector<Cell>& cells) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    nlohmann::ordered_json e;
    e["model"] = c.model;
    e["property"] = c.property();
    e["engine"] = c.folded ? "folded" : "unfolded";
    e["outcome"] = to_string(c.outcome);
    e["conclusive"] = c.outcome == Outcome::Found || c.outcome == Outcome::Exhausted;
    e["seconds"] = c.seconds;
    e["states"] = c.states;
    if (!c.detail.empty()) e["detail"] = c.detail;
    j.push_back(e);
  }
  return j.dump(2) + "\n";
}

}  // namespace pitpn::bench
