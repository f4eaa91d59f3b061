#include "pitpn/report.hpp"

#include "pitpn/native_format.hpp"
#include "pitpn/smtlib.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace pitpn::io {

std::string constraint_smtlib(const Report& r) { return r.constraint ? smtlib::print(*r.constraint) : std::string{}; }

std::string to_json(const Report& r, const Net* net) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["query"] = r.query;
  j["engine"] = r.engine;
  j["verdict"] = r.verdict;
  j["conclusive"] = r.conclusive;
  if (r.constraint) {
    j["constraint"] = constraint_smtlib(r);
    j["constraint_infix"] = print_formula(*r.constraint, net);
  } else {
    j["constraint"] = nullptr;
  }
  j["sampled"] = r.sampled;
  j["witness"] = r.witness;
  j["notes"] = r.notes;
  j["stats"] = {{"states", r.states}, {"solver_calls", r.solver_calls}, {"seconds", r.seconds}};
  j["solver"] = r.solver;
  if (!r.qe_tactic.empty()) j["qe_tactic"] = r.qe_tactic;
  return j.dump(2) + "\n";
}

std::string to_text(const Report& r, const Net* net) {
  std::ostringstream out;
  out << r.query << " on " << r.model << " [" << r.engine << (r.sampled ? ", sampled" : "") << "]\n";
  out << "verdict: " << r.verdict << (r.conclusive ? "" : " (inconclusive)") << "\n";
  if (r.constraint) out << "constraint: " << print_formula(*r.constraint, net) << "\n";
  if (!r.witness.empty()) {
    out << "witness:\n";
    for (const auto& w : r.witness) out << "  " << w << "\n";
  }
  for (const auto& n : r.notes) out << "note: " << n << "\n";
  out << "states: " << r.states << ", solver calls: " << r.solver_calls << ", time: " << std::fixed
      << std::setprecision(3) << r.seconds << " s\n";
  if (!r.qe_tactic.empty()) out << "quantifier elimination: " << r.qe_tactic << "\n";
  return out.str();
}

}  // namespace pitpn::io
