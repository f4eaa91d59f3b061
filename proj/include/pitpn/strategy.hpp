#pragma once

#include "pitpn/net.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pitpn::strategy {

/// A successor option: the tick rule or firing one transition.
struct Option {
  bool is_tick = false;
  std::size_t transition = 0;

  static Option tick() { return {true, 0}; }
  static Option fire(std::size_t t) { return {false, t}; }
  friend bool operator==(const Option&, const Option&) = default;
};

struct Tier {
  std::vector<std::size_t> transitions;
  bool includes_tick = false;

  bool contains(const Option& o) const;
};

/// prefer(tier1) or-else prefer(tier2) ... or-else all
struct Strategy {
  std::string name = "all";
  std::vector<Tier> tiers;

  bool is_all() const { return tiers.empty(); }
  static Strategy all() { return {}; }
};

class StrategyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grammar: `all` | `prefer(id, ...) [or-else prefer(...)]* [or-else all]`.
/// The identifier `tick` names the tick rule. Unknown transitions throw.
Strategy parse(const std::string& text, const Net& net, std::string name = {});

using Applicability = std::function<bool(const Option&)>;

/// Options of the first tier holding an applicable fire option, or every
/// candidate when no tier applies.
std::vector<Option> filter_successors(const std::vector<Option>& candidates, const Strategy& strat,
                                      const Applicability& applicable);

std::string to_string(const Strategy& s, const Net& net);

}  // namespace pitpn::strategy
