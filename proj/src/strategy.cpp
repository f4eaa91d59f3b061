#include "pitpn/strategy.hpp"

#include <algorithm>
#include <cctype>

namespace pitpn::strategy {

bool Tier::contains(const Option& o) const {
  if (o.is_tick) return includes_tick;
  return std::find(transitions.begin(), transitions.end(), o.transition) != transitions.end();
}

namespace {

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_or_else(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') ++depth;
    if (text[i] == ')') --depth;
    if (depth == 0 && text.compare(i, 7, "or-else") == 0) {
      out.push_back(trim(text.substr(start, i - start)));
      start = i + 7;
      i += 6;
    }
  }
  out.push_back(trim(text.substr(start)));
  return out;
}

}  // namespace

Strategy parse(const std::string& text, const Net& net, std::string name) {
  Strategy s;
  s.name = name.empty() ? trim(text) : std::move(name);
  auto parts = split_or_else(text);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::string part = parts[i];
    // A trailing `!` (normalize) is implied: strategies apply at every step.
    while (!part.empty() && part.back() == '!') part = trim(part.substr(0, part.size() - 1));
    if (part.size() >= 2 && part.front() == '(' && part.back() == ')') part = trim(part.substr(1, part.size() - 2));
    if (part == "all") {
      if (i + 1 != parts.size()) throw StrategyError("`all` must be the last alternative");
      break;
    }
    if (part.rfind("prefer", 0) != 0) throw StrategyError("expected prefer(...) or all, got '" + part + "'");
    auto open = part.find('(');
    auto close = part.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw StrategyError("malformed prefer in '" + part + "'");
    Tier tier;
    std::string ids = part.substr(open + 1, close - open - 1);
    std::size_t pos = 0;
    while (pos <= ids.size()) {
      auto comma = ids.find(',', pos);
      std::string id = trim(ids.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (!id.empty()) {
        if (id == "tick") {
          tier.includes_tick = true;
        } else {
          auto t = net.transition_index(id);
          if (!t) throw StrategyError("strategy mentions unknown transition '" + id + "'");
          tier.transitions.push_back(*t);
        }
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (tier.transitions.empty() && !tier.includes_tick) throw StrategyError("empty prefer tier");
    s.tiers.push_back(std::move(tier));
  }
  return s;
}

std::vector<Option> filter_successors(const std::vector<Option>& candidates, const Strategy& strat,
                                      const Applicability& applicable) {
  for (const auto& tier : strat.tiers) {
    std::vector<Option> chosen;
    bool fire_applies = false;
    for (const auto& o : candidates) {
      if (!tier.contains(o)) continue;
      if (!applicable(o)) continue;
      chosen.push_back(o);
      if (!o.is_tick) fire_applies = true;
    }
    if (fire_applies) return chosen;
  }
  return candidates;
}

std::string to_string(const Strategy& s, const Net& net) {
  std::string out;
  for (const auto& tier : s.tiers) {
    out += "prefer(";
    bool first = true;
    for (auto t : tier.transitions) {
      out += (first ? "" : ", ") + net.transitions[t].name;
      first = false;
    }
    if (tier.includes_tick) out += first ? "tick" : ", tick";
    out += ") or-else ";
  }
  return out + "all";
}

}  // namespace pitpn::strategy
