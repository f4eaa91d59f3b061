#include "pitpn/concrete.hpp"

#include <boost/container_hash/hash.hpp>

#include <deque>
#include <sstream>
#include <unordered_map>

namespace pitpn::concrete {

std::size_t StateHash::operator()(const State& s) const {
  std::size_t seed = static_cast<std::size_t>(s.flag);
  for (auto v : s.marking) boost::hash_combine(seed, v);
  for (const auto& c : s.clocks) boost::hash_combine(seed, c);
  if (s.global_time) boost::hash_combine(seed, *s.global_time);
  return seed;
}

namespace {

Rational constant_of(const LinExpr& e, const std::string& what) {
  if (!e.is_constant()) throw StructuralError(what + " is not instantiated: " + e.to_string());
  return e.constant();
}

}  // namespace

Engine::Engine(const Net& net, Mode mode, Rational step) : net_(net), mode_(mode), step_(std::move(step)) {
  if (step_ <= 0) throw std::invalid_argument("sampling step must be positive");
  if (!net_.params.empty()) throw StructuralError("concrete execution needs an instantiated net");
  if (!net_.ground_initial()) throw StructuralError("initial marking is not ground");
  for (const auto& t : net_.transitions) {
    lo_.push_back(constant_of(t.interval.lo, "lower bound of " + t.name));
    if (t.interval.hi.value) {
      hi_.emplace_back(constant_of(*t.interval.hi.value, "upper bound of " + t.name));
    } else {
      hi_.emplace_back(std::nullopt);
    }
  }
}

State Engine::initial_state() const {
  State s;
  s.flag = mode_.tick_alternation ? TickFlag::Ok : TickFlag::None;
  s.marking = *net_.ground_initial();
  s.clocks.assign(net_.transitions.size(), Rational(0));
  if (mode_.global_clock) s.global_time = Rational(0);
  return s;
}

std::optional<Rational> Engine::mte(const State& s) const {
  std::optional<Rational> best;
  for (std::size_t t = 0; t < net_.transitions.size(); ++t) {
    if (!hi_[t] || !active(net_, s.marking, t)) continue;
    Rational slack = *hi_[t] - s.clocks[t];
    if (!best || slack < *best) best = slack;
  }
  return best;
}

State Engine::tick(const State& s, const Rational& delta) const {
  if (s.flag == TickFlag::NotOk) throw RuleNotApplicable("tick after tick");
  if (delta < 0) throw RuleNotApplicable("negative delay");
  if (auto bound = mte(s); bound && delta > *bound)
    throw RuleNotApplicable("delay " + pitpn::to_string(delta) + " exceeds mte " + pitpn::to_string(*bound));
  State out = s;
  for (std::size_t t = 0; t < net_.transitions.size(); ++t)
    if (active(net_, s.marking, t)) out.clocks[t] += delta;
  if (mode_.tick_alternation) out.flag = TickFlag::NotOk;
  if (out.global_time) *out.global_time += delta;
  return out;
}

bool Engine::can_fire(const State& s, std::size_t t) const {
  if (!active(net_, s.marking, t)) return false;
  if (s.clocks[t] < lo_[t]) return false;
  return !hi_[t] || s.clocks[t] <= *hi_[t];
}

State Engine::fire(const State& s, std::size_t t) const {
  if (!can_fire(s, t)) throw RuleNotApplicable("transition " + net_.transitions[t].name + " cannot fire");
  State out = s;
  out.marking = fire_marking(net_, s.marking, t);
  for (std::size_t u = 0; u < net_.transitions.size(); ++u)
    if (u == t || !enabled_in_intermediate(net_, u, s.marking, t)) out.clocks[u] = 0;
  if (mode_.tick_alternation) out.flag = TickFlag::Ok;
  return out;
}

State Engine::apply(const State& s, const Event& e) const {
  return e.kind == Event::Kind::Tick ? tick(s, e.delta) : fire(s, e.transition);
}

std::vector<std::pair<Event, State>> Engine::successors(const State& s, const strategy::Strategy* strat) const {
  std::vector<strategy::Option> options;
  for (std::size_t t = 0; t < net_.transitions.size(); ++t)
    if (can_fire(s, t)) options.push_back(strategy::Option::fire(t));
  if (s.flag != TickFlag::NotOk) {
    auto bound = mte(s);
    if (!bound || step_ <= *bound) options.push_back(strategy::Option::tick());
  }
  if (strat && !strat->is_all())
    options = strategy::filter_successors(options, *strat, [](const strategy::Option&) { return true; });
  std::vector<std::pair<Event, State>> out;
  out.reserve(options.size());
  for (const auto& o : options) {
    if (o.is_tick) {
      out.emplace_back(Event::tick(step_), tick(s, step_));
      // Without consecutive ticks, every multiple of the step must be
      // offered at once or most of the time grid becomes unreachable.
      if (mode_.tick_alternation) {
        if (auto bound = mte(s))
          for (Rational d = step_ + step_; d <= *bound; d += step_) out.emplace_back(Event::tick(d), tick(s, d));
      }
    } else {
      out.emplace_back(Event::fire(o.transition), fire(s, o.transition));
    }
  }
  return out;
}

void Engine::check_invariants(const State& s) const {
  for (std::size_t t = 0; t < net_.transitions.size(); ++t) {
    if (s.clocks[t] < 0) throw std::logic_error("negative clock for " + net_.transitions[t].name);
    if (!enabled(net_, s.marking, t) && s.clocks[t] != 0)
      throw std::logic_error("disabled transition " + net_.transitions[t].name + " has a running clock");
    if (active(net_, s.marking, t) && hi_[t] && s.clocks[t] > *hi_[t])
      throw std::logic_error("clock of " + net_.transitions[t].name + " overshoots its upper bound");
  }
  for (auto v : s.marking)
    if (v < 0) throw std::logic_error("negative marking");
}

bool Engine::replay(const Trace& trace, std::string* error) const {
  if (trace.events.size() != trace.states.size()) {
    if (error) *error = "trace has mismatched event and state counts";
    return false;
  }
  State cur = trace.initial;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    try {
      cur = apply(cur, trace.events[i]);
    } catch (const RuleNotApplicable& e) {
      if (error) *error = "step " + std::to_string(i) + ": " + e.what();
      return false;
    }
    if (!(cur == trace.states[i])) {
      if (error) *error = "step " + std::to_string(i) + " reproduces a different state";
      return false;
    }
  }
  return true;
}

std::string Engine::describe(const State& s) const {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (std::size_t p = 0; p < s.marking.size(); ++p) {
    if (s.marking[p] == 0) continue;
    out << (first ? "" : ", ") << net_.places[p] << ":" << s.marking[p];
    first = false;
  }
  out << "} clocks{";
  first = true;
  for (std::size_t t = 0; t < s.clocks.size(); ++t) {
    if (s.clocks[t] == 0) continue;
    out << (first ? "" : ", ") << net_.transitions[t].name << ":" << pitpn::to_string(s.clocks[t]);
    first = false;
  }
  out << "}";
  if (s.global_time) out << " GT=" << pitpn::to_string(*s.global_time);
  if (s.flag == TickFlag::Ok) out << " tickOk";
  if (s.flag == TickFlag::NotOk) out << " tickNotOk";
  return out.str();
}

std::string Engine::describe(const Event& e) const {
  if (e.kind == Event::Kind::Tick) return "tick(" + pitpn::to_string(e.delta) + ")";
  return "fire(" + net_.transitions[e.transition].name + ")";
}

Assignment holes(const Net& net, const State& s) {
  Assignment a;
  for (std::size_t p = 0; p < net.places.size(); ++p) a[place_hole(net.places[p])] = Rational(s.marking[p]);
  for (std::size_t t = 0; t < net.transitions.size(); ++t) a[clock_hole(net.transitions[t].name)] = s.clocks[t];
  if (s.global_time) a[global_time_hole()] = *s.global_time;
  return a;
}

StatePredicate compile(const Net& net, const Formula& f) {
  struct Slot {
    std::string name;
    int kind;  // 0 place, 1 clock, 2 global time
    std::size_t index;
  };
  std::vector<Slot> slots;
  for (const auto& v : free_vars(f)) {
    if (v.name == global_time_hole()) {
      slots.push_back({v.name, 2, 0});
    } else if (v.name.rfind("$m.", 0) == 0) {
      slots.push_back({v.name, 0, net.require_place(v.name.substr(3))});
    } else if (v.name.rfind("$c.", 0) == 0) {
      slots.push_back({v.name, 1, net.require_transition(v.name.substr(3))});
    } else {
      throw StructuralError("predicate mentions '" + v.name + "', which is not a state hole of an instantiated net");
    }
  }
  return [f, slots](const State& s) {
    Assignment a;
    for (const auto& slot : slots) {
      switch (slot.kind) {
        case 0: a[slot.name] = Rational(s.marking[slot.index]); break;
        case 1: a[slot.name] = s.clocks[slot.index]; break;
        default:
          if (!s.global_time) throw StructuralError("predicate mentions GT but the state has no global clock");
          a[slot.name] = *s.global_time;
      }
    }
    return evaluate(f, a);
  };
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Found: return "found";
    case Verdict::NotFound: return "not-found";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

struct Node {
  State state;
  std::size_t parent;
  Event via;
  std::size_t depth;
};

Trace build_trace(const std::vector<Node>& nodes, std::size_t index) {
  std::vector<std::size_t> path;
  for (std::size_t i = index; i != 0; i = nodes[i].parent) path.push_back(i);
  Trace tr;
  tr.initial = nodes[0].state;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    tr.events.push_back(nodes[*it].via);
    tr.states.push_back(nodes[*it].state);
  }
  return tr;
}

bool in_window(const State& s, const SearchOptions& o) {
  if (!o.window) return true;
  if (!s.global_time) throw StructuralError("a time window needs a global clock");
  const auto& [lo, hi] = *o.window;
  return *s.global_time >= lo && (!hi || *s.global_time <= *hi);
}

}  // namespace

SearchResult search_ef(const Engine& engine, const State& init, const StatePredicate& goal,
                       const SearchOptions& options) {
  if (options.time_bound && !init.global_time) throw StructuralError("a time bound needs a global clock");
  SearchResult result;
  std::vector<Node> nodes;
  std::unordered_map<State, std::size_t, StateHash> index;
  nodes.push_back({init, 0, Event{}, 0});
  index.emplace(init, 0);
  bool truncated = false;
  for (std::size_t cur = 0; cur < nodes.size(); ++cur) {
    const State s = nodes[cur].state;
    engine.check_invariants(s);
    if (goal(s) && in_window(s, options)) {
      result.verdict = Verdict::Found;
      result.witness = build_trace(nodes, cur);
      result.states = nodes.size();
      return result;
    }
    if (options.max_depth && nodes[cur].depth >= *options.max_depth) {
      truncated = true;
      continue;
    }
    for (auto& [event, next] : engine.successors(s, options.strategy)) {
      ++result.edges;
      if (options.time_bound && next.global_time && *next.global_time > *options.time_bound) continue;
      if (index.count(next)) continue;
      if (nodes.size() >= options.max_states) {
        result.verdict = Verdict::Inconclusive;
        result.reason = "state budget of " + std::to_string(options.max_states) + " exhausted";
        result.states = nodes.size();
        return result;
      }
      index.emplace(next, nodes.size());
      nodes.push_back({std::move(next), cur, event, nodes[cur].depth + 1});
    }
  }
  result.states = nodes.size();
  if (truncated) {
    result.verdict = Verdict::Inconclusive;
    result.reason = "depth bound reached";
  } else {
    result.verdict = Verdict::NotFound;
  }
  return result;
}

SearchResult check_ag(const Engine& engine, const State& init, const StatePredicate& invariant,
                      const SearchOptions& options) {
  return search_ef(engine, init, [&](const State& s) { return !invariant(s); }, options);
}

StateGraph explore(const Engine& engine, const State& init, std::size_t max_states, const strategy::Strategy* strat) {
  StateGraph g;
  std::unordered_map<State, std::size_t, StateHash> index;
  g.states.push_back(init);
  g.edges.emplace_back();
  index.emplace(init, 0);
  for (std::size_t cur = 0; cur < g.states.size(); ++cur) {
    const State s = g.states[cur];
    engine.check_invariants(s);
    for (auto& [event, next] : engine.successors(s, strat)) {
      auto it = index.find(next);
      std::size_t target;
      if (it == index.end()) {
        if (g.states.size() >= max_states) return g;
        target = g.states.size();
        index.emplace(next, target);
        g.states.push_back(std::move(next));
        g.edges.emplace_back();
      } else {
        target = it->second;
      }
      g.edges[cur].emplace_back(event, target);
    }
  }
  g.complete = true;
  return g;
}

}  // namespace pitpn::concrete
