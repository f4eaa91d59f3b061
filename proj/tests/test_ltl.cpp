#include "pitpn/ltl.hpp"
#include "pitpn/native_format.hpp"

#include <doctest.h>

#include <functional>
#include <random>

using namespace pitpn;
using ltl::Ltl;

namespace {

// Truth of f at every position of the lasso word stem.cycle^omega, computed
// by fixpoint iteration over the finitely many positions.
std::vector<bool> eval(const Ltl& f, const std::vector<std::vector<bool>>& word, std::size_t loop_start) {
  const std::size_t n = word.size();
  auto next = [&](std::size_t i) { return i + 1 < n ? i + 1 : loop_start; };
  std::vector<bool> out(n);
  switch (f.kind()) {
    case Ltl::Kind::True: out.assign(n, true); break;
    case Ltl::Kind::False: out.assign(n, false); break;
    case Ltl::Kind::Prop:
      for (std::size_t i = 0; i < n; ++i) out[i] = word[i][f.prop_index()];
      break;
    case Ltl::Kind::Not: {
      auto a = eval(f.left(), word, loop_start);
      for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
      break;
    }
    case Ltl::Kind::And:
    case Ltl::Kind::Or: {
      auto a = eval(f.left(), word, loop_start), b = eval(f.right(), word, loop_start);
      for (std::size_t i = 0; i < n; ++i) out[i] = f.kind() == Ltl::Kind::And ? (a[i] && b[i]) : (a[i] || b[i]);
      break;
    }
    case Ltl::Kind::Next: {
      auto a = eval(f.left(), word, loop_start);
      for (std::size_t i = 0; i < n; ++i) out[i] = a[next(i)];
      break;
    }
    case Ltl::Kind::Until:
    case Ltl::Kind::Release: {
      auto a = eval(f.left(), word, loop_start), b = eval(f.right(), word, loop_start);
      const bool until = f.kind() == Ltl::Kind::Until;
      out.assign(n, !until);
      for (std::size_t round = 0; round <= n; ++round)
        for (std::size_t k = n; k-- > 0;)
          out[k] = until ? (b[k] || (a[k] && out[next(k)])) : (b[k] && (a[k] || out[next(k)]));
      break;
    }
  }
  return out;
}

bool lasso_satisfies(const Ltl& f, const ltl::Kripke& k, const std::vector<std::size_t>& stem,
                     const std::vector<std::size_t>& cycle) {
  std::vector<std::vector<bool>> word;
  for (auto s : stem) word.push_back(k.labels[s]);
  for (auto s : cycle) word.push_back(k.labels[s]);
  return eval(f, word, stem.size())[0];
}

std::vector<std::size_t> successors(const ltl::Kripke& k, std::size_t s) {
  return k.succ[s].empty() ? std::vector<std::size_t>{s} : k.succ[s];
}

bool is_lasso(const ltl::Kripke& k, const std::vector<std::size_t>& stem, const std::vector<std::size_t>& cycle) {
  if (cycle.empty()) return false;
  std::vector<std::size_t> path = stem;
  path.insert(path.end(), cycle.begin(), cycle.end());
  if (std::find(k.initial.begin(), k.initial.end(), path[0]) == k.initial.end()) return false;
  auto edge = [&](std::size_t a, std::size_t b) {
    auto s = successors(k, a);
    return std::find(s.begin(), s.end(), b) != s.end();
  };
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (!edge(path[i], path[i + 1])) return false;
  return edge(path.back(), cycle.front());
}

// Does some lasso with at most `max_len` positions satisfy f?
bool brute_exists(const ltl::Kripke& k, const Ltl& f, std::size_t max_len) {
  std::vector<std::size_t> path;
  std::function<bool()> dfs = [&]() -> bool {
    for (std::size_t j = 0; j < path.size(); ++j) {
      auto s = successors(k, path.back());
      if (std::find(s.begin(), s.end(), path[j]) == s.end()) continue;
      std::vector<std::size_t> stem(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(j));
      std::vector<std::size_t> cycle(path.begin() + static_cast<std::ptrdiff_t>(j), path.end());
      if (lasso_satisfies(f, k, stem, cycle)) return true;
    }
    if (path.size() == max_len) return false;
    for (auto s : successors(k, path.back())) {
      path.push_back(s);
      if (dfs()) return true;
      path.pop_back();
    }
    return false;
  };
  for (auto i : k.initial) {
    path = {i};
    if (dfs()) return true;
  }
  return false;
}

ltl::Kripke random_kripke(std::mt19937& rng, std::size_t states, std::size_t props) {
  std::uniform_int_distribution<std::size_t> pick(0, states - 1);
  std::uniform_int_distribution<int> coin(0, 2);
  ltl::Kripke k;
  k.initial = {0};
  k.succ.resize(states);
  k.labels.resize(states);
  for (std::size_t s = 0; s < states; ++s) {
    int out = coin(rng);  // 0 makes a deadlock
    for (int e = 0; e < out; ++e) k.succ[s].push_back(pick(rng));
    for (std::size_t p = 0; p < props; ++p) k.labels[s].push_back(coin(rng) != 0);
  }
  return k;
}

Ltl random_ltl(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> op(0, 8), prop(0, 1);
  if (depth == 0) return Ltl::prop(static_cast<std::size_t>(prop(rng)));
  switch (op(rng)) {
    case 0: return Ltl::negation(random_ltl(rng, depth - 1));
    case 1: return Ltl::conj(random_ltl(rng, depth - 1), random_ltl(rng, depth - 1));
    case 2: return Ltl::disj(random_ltl(rng, depth - 1), random_ltl(rng, depth - 1));
    case 3: return Ltl::next(random_ltl(rng, depth - 1));
    case 4: return Ltl::until(random_ltl(rng, depth - 1), random_ltl(rng, depth - 1));
    case 5: return Ltl::release(random_ltl(rng, depth - 1), random_ltl(rng, depth - 1));
    case 6: return Ltl::eventually(random_ltl(rng, depth - 1));
    case 7: return Ltl::always(random_ltl(rng, depth - 1));
    default: return Ltl::prop(static_cast<std::size_t>(prop(rng)));
  }
}

Net net3() {
  return instantiate(io::load_native(std::string(PITPN_MODELS_DIR) + "/net3.pn"), {{"lower", 3}, {"upper", 4}});
}

}  // namespace

TEST_CASE("nested DFS agrees with brute-force lasso enumeration") {
  std::mt19937 rng(2024);
  int holds = 0, fails = 0;
  for (int round = 0; round < 400; ++round) {
    auto k = random_kripke(rng, 4, 2);
    Ltl f = random_ltl(rng, 3);
    CAPTURE(f.to_string());
    auto r = ltl::check(k, f);
    bool short_violation = brute_exists(k, Ltl::negation(f), 9);
    if (short_violation) CHECK_FALSE(r.holds);
    if (!r.holds) {
      ++fails;
      CHECK(is_lasso(k, r.stem, r.cycle));
      CHECK_FALSE(lasso_satisfies(f, k, r.stem, r.cycle));
    } else {
      ++holds;
    }

    auto e = ltl::exists_path(k, f);
    if (brute_exists(k, f, 9)) CHECK(e.holds);
    if (e.holds) {
      CHECK(is_lasso(k, e.stem, e.cycle));
      CHECK(lasso_satisfies(f, k, e.stem, e.cycle));
    }
  }
  CHECK(holds > 40);
  CHECK(fails > 40);
}

TEST_CASE("negation normal form preserves meaning") {
  std::mt19937 rng(9);
  for (int round = 0; round < 200; ++round) {
    auto k = random_kripke(rng, 3, 2);
    Ltl f = random_ltl(rng, 3);
    Ltl g = f.nnf();
    std::vector<std::vector<bool>> word{k.labels[0], k.labels[1], k.labels[2]};
    CHECK(eval(f, word, 1) == eval(g, word, 1));
  }
}

TEST_CASE("the sampled net3(3,4) graph: recurrence holds, reaching p2 = 2 is not inevitable") {
  Net n = net3();
  concrete::Engine e(n, concrete::Mode::r0());
  auto both = ltl::model_check(e, ltl::parse("([]<> p3 = 0) /\\ ([]<> p3 = 1)", n));
  CHECK(both.verdict != concrete::Verdict::Inconclusive);
  CHECK(both.holds);

  auto reach = ltl::model_check(e, ltl::parse("<> (p2 = 2)", n));
  CHECK_FALSE(reach.holds);
  CHECK_FALSE(reach.cycle.empty());
  for (const auto& s : reach.stem) CHECK(s.marking[n.require_place("p2")] != 2);
  for (const auto& s : reach.cycle) CHECK(s.marking[n.require_place("p2")] != 2);

  auto some = ltl::model_check(e, ltl::parse("<> (p2 = 2)", n), false);
  CHECK(some.holds);
  CHECK(ltl::model_check(e, ltl::parse("[] ksafe(2)", n)).holds);
  CHECK_FALSE(ltl::model_check(e, ltl::parse("[] ksafe(1)", n)).holds);
}

TEST_CASE("parser operators and errors") {
  Net n = net3();
  auto p = ltl::parse("G (p1 = 1 -> F p2 >= 1) && X true", n);
  CHECK(p.props.size() == 2);
  auto q = ltl::parse("(p1 = 1 U p2 = 1) R ~(p3 = 0) W p4 = 1", n);
  CHECK(q.props.size() == 4);
  auto dup = ltl::parse("[] p1 = 0 \\/ <> p1 = 0", n);
  CHECK(dup.props.size() == 1);
  CHECK_THROWS_AS(ltl::parse("[] (p1 = ", n), ltl::LtlParseError);
  CHECK_THROWS(ltl::parse("<> nowhere = 1", n));
}
