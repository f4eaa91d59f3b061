#include "pitpn/oracle.hpp"

#include <algorithm>
#include <set>

namespace pitpn::oracle {

IntervalSemantics::IntervalSemantics(const Net& net) : net_(net) {
  concrete::Engine probe(net);  // validates that the net is instantiated
  for (std::size_t t = 0; t < net.transitions.size(); ++t) static_.push_back({probe.lower(t), probe.upper(t)});
}

IntervalState IntervalSemantics::initial_state() const {
  IntervalState s;
  s.marking = *net_.ground_initial();
  s.intervals.resize(net_.transitions.size());
  for (std::size_t t = 0; t < net_.transitions.size(); ++t)
    if (enabled(net_, s.marking, t)) s.intervals[t] = static_[t];
  return s;
}

std::optional<IntervalState> IntervalSemantics::delay(const IntervalState& s, const Rational& delta) const {
  if (delta < 0) return std::nullopt;
  IntervalState out = s;
  for (std::size_t t = 0; t < net_.transitions.size(); ++t) {
    if (!s.intervals[t] || !active(net_, s.marking, t)) continue;
    const auto& iv = *s.intervals[t];
    if (iv.hi && delta > *iv.hi) return std::nullopt;
    RationalInterval next;
    next.lo = std::max(Rational(0), Rational(iv.lo - delta));
    if (iv.hi) next.hi = *iv.hi - delta;
    out.intervals[t] = next;
  }
  return out;
}

std::optional<IntervalState> IntervalSemantics::fire(const IntervalState& s, std::size_t tf) const {
  if (!active(net_, s.marking, tf) || !s.intervals[tf] || s.intervals[tf]->lo != 0) return std::nullopt;
  IntervalState out;
  out.marking = fire_marking(net_, s.marking, tf);
  out.intervals.resize(net_.transitions.size());
  for (std::size_t t = 0; t < net_.transitions.size(); ++t) {
    if (!enabled(net_, out.marking, t)) continue;
    if (newly_enabled(net_, t, s.marking, tf)) {
      out.intervals[t] = static_[t];
    } else {
      out.intervals[t] = s.intervals[t];
    }
  }
  return out;
}

std::vector<std::pair<concrete::Event, IntervalState>> IntervalSemantics::step(const IntervalState& s,
                                                                               const Rational& d) const {
  std::vector<std::pair<concrete::Event, IntervalState>> out;
  for (std::size_t t = 0; t < net_.transitions.size(); ++t)
    if (auto next = fire(s, t)) out.emplace_back(concrete::Event::fire(t), std::move(*next));
  if (auto next = delay(s, d)) out.emplace_back(concrete::Event::tick(d), std::move(*next));
  return out;
}

bool corresponds(const Net& net, const concrete::State& c, const IntervalState& i,
                 const std::vector<RationalInterval>& J, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (c.marking != i.marking) return fail("markings differ");
  for (std::size_t t = 0; t < net.transitions.size(); ++t) {
    const std::string& name = net.transitions[t].name;
    bool en = enabled(net, c.marking, t);
    if (!en) {
      if (i.intervals[t]) return fail("disabled " + name + " still has an interval");
      if (c.clocks[t] != 0) return fail("disabled " + name + " has clock " + pitpn::to_string(c.clocks[t]));
      continue;
    }
    if (!i.intervals[t]) return fail("enabled " + name + " has no interval");
    const auto& I = *i.intervals[t];
    if (J[t].hi) {
      if (!I.hi) return fail(name + ": finite static bound but infinite dynamic one");
      if (c.clocks[t] != *J[t].hi - *I.hi)
        return fail(name + ": clock " + pitpn::to_string(c.clocks[t]) + " but J.hi - I.hi = " +
                    pitpn::to_string(*J[t].hi - *I.hi));
    } else if (I.lo > 0) {
      if (c.clocks[t] != J[t].lo - I.lo) return fail(name + ": clock differs from J.lo - I.lo");
    } else if (c.clocks[t] < J[t].lo) {
      return fail(name + ": lower bound reached but clock below J.lo");
    }
  }
  return true;
}

BisimReport bisim_check(const Net& net, std::size_t depth, const Rational& step) {
  BisimReport report;
  concrete::Engine engine(net, concrete::Mode::r0(), step);
  IntervalSemantics oracle(net);
  std::vector<RationalInterval> J;
  for (std::size_t t = 0; t < net.transitions.size(); ++t) J.push_back({engine.lower(t), engine.upper(t)});

  struct Pair {
    concrete::State c;
    IntervalState i;
  };
  auto key = [](const Pair& p) {
    std::string k;
    for (auto v : p.c.marking) k += std::to_string(v) + ",";
    k += "|";
    for (const auto& v : p.c.clocks) k += pitpn::to_string(v) + ",";
    k += "|";
    for (const auto& iv : p.i.intervals) {
      if (!iv) {
        k += "-;";
      } else {
        k += pitpn::to_string(iv->lo) + ":" + (iv->hi ? pitpn::to_string(*iv->hi) : "inf") + ";";
      }
    }
    return k;
  };

  std::vector<Pair> frontier{{engine.initial_state(), oracle.initial_state()}};
  std::set<std::string> seen{key(frontier.front())};
  for (std::size_t level = 0; level <= depth && !frontier.empty(); ++level) {
    report.max_depth_reached = level;
    std::vector<Pair> next;
    for (const auto& p : frontier) {
      ++report.pairs;
      std::string why;
      if (!corresponds(net, p.c, p.i, J, &why)) {
        report.ok = false;
        report.mismatches.push_back("depth " + std::to_string(level) + ": " + engine.describe(p.c) + ": " + why);
        continue;
      }
      if (level == depth) continue;
      auto clock_moves = engine.successors(p.c);
      auto interval_moves = oracle.step(p.i, step);
      if (clock_moves.size() != interval_moves.size()) {
        report.ok = false;
        report.mismatches.push_back("depth " + std::to_string(level) + ": " + engine.describe(p.c) + ": " +
                                    std::to_string(clock_moves.size()) + " clock moves vs " +
                                    std::to_string(interval_moves.size()) + " interval moves");
        continue;
      }
      for (std::size_t k = 0; k < clock_moves.size(); ++k) {
        if (!(clock_moves[k].first == interval_moves[k].first)) {
          report.ok = false;
          report.mismatches.push_back("depth " + std::to_string(level) + ": move " + engine.describe(clock_moves[k].first) +
                                      " has no counterpart");
          continue;
        }
        Pair q{clock_moves[k].second, interval_moves[k].second};
        if (seen.insert(key(q)).second) next.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
  }
  return report;
}

}  // namespace pitpn::oracle
