#include "pitpn/ltl.hpp"

#include "pitpn/native_format.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>

namespace pitpn::ltl {

struct Node {
  Ltl::Kind kind;
  std::size_t prop = 0;
  std::optional<Ltl> a;
  std::optional<Ltl> b;

  static Ltl make(Ltl::Kind k, std::size_t p = 0, std::optional<Ltl> x = {}, std::optional<Ltl> y = {}) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->prop = p;
    n->a = std::move(x);
    n->b = std::move(y);
    return Ltl(std::move(n));
  }
};

using K = Ltl::Kind;

Ltl Ltl::truth() { return Node::make(K::True); }
Ltl Ltl::falsity() { return Node::make(K::False); }
Ltl Ltl::prop(std::size_t index) { return Node::make(K::Prop, index); }

Ltl Ltl::negation(const Ltl& f) {
  if (f.kind() == K::True) return falsity();
  if (f.kind() == K::False) return truth();
  if (f.kind() == K::Not) return f.left();
  return Node::make(K::Not, 0, f);
}

Ltl Ltl::conj(const Ltl& a, const Ltl& b) {
  if (a.kind() == K::False || b.kind() == K::False) return falsity();
  if (a.kind() == K::True) return b;
  if (b.kind() == K::True) return a;
  return Node::make(K::And, 0, a, b);
}

Ltl Ltl::disj(const Ltl& a, const Ltl& b) {
  if (a.kind() == K::True || b.kind() == K::True) return truth();
  if (a.kind() == K::False) return b;
  if (b.kind() == K::False) return a;
  return Node::make(K::Or, 0, a, b);
}

Ltl Ltl::next(const Ltl& f) { return Node::make(K::Next, 0, f); }
Ltl Ltl::until(const Ltl& a, const Ltl& b) { return Node::make(K::Until, 0, a, b); }
Ltl Ltl::release(const Ltl& a, const Ltl& b) { return Node::make(K::Release, 0, a, b); }

Ltl::Kind Ltl::kind() const { return node_->kind; }
std::size_t Ltl::prop_index() const { return node_->prop; }
const Ltl& Ltl::left() const { return *node_->a; }
const Ltl& Ltl::right() const { return *node_->b; }

Ltl Ltl::nnf() const {
  switch (kind()) {
    case K::True:
    case K::False:
    case K::Prop:
      return *this;
    case K::And:
      return conj(left().nnf(), right().nnf());
    case K::Or:
      return disj(left().nnf(), right().nnf());
    case K::Next:
      return next(left().nnf());
    case K::Until:
      return until(left().nnf(), right().nnf());
    case K::Release:
      return release(left().nnf(), right().nnf());
    case K::Not:
      break;
  }
  const Ltl& g = left();
  switch (g.kind()) {
    case K::True:
      return falsity();
    case K::False:
      return truth();
    case K::Prop:
      return *this;
    case K::Not:
      return g.left().nnf();
    case K::And:
      return disj(negation(g.left()).nnf(), negation(g.right()).nnf());
    case K::Or:
      return conj(negation(g.left()).nnf(), negation(g.right()).nnf());
    case K::Next:
      return next(negation(g.left()).nnf());
    case K::Until:
      return release(negation(g.left()).nnf(), negation(g.right()).nnf());
    case K::Release:
      return until(negation(g.left()).nnf(), negation(g.right()).nnf());
  }
  return *this;
}

std::string Ltl::to_string(const std::vector<std::string>& names) const {
  auto sub = [&](const Ltl& f) { return f.to_string(names); };
  switch (kind()) {
    case K::True:
      return "true";
    case K::False:
      return "false";
    case K::Prop:
      return prop_index() < names.size() ? "(" + names[prop_index()] + ")" : "p" + std::to_string(prop_index());
    case K::Not:
      return "~" + sub(left());
    case K::And:
      return "(" + sub(left()) + " /\\ " + sub(right()) + ")";
    case K::Or:
      return "(" + sub(left()) + " \\/ " + sub(right()) + ")";
    case K::Next:
      return "X " + sub(left());
    case K::Until:
      if (left().kind() == K::True) return "<> " + sub(right());
      return "(" + sub(left()) + " U " + sub(right()) + ")";
    case K::Release:
      if (left().kind() == K::False) return "[] " + sub(right());
      return "(" + sub(left()) + " R " + sub(right()) + ")";
  }
  return "?";
}

namespace {

int compare(const Ltl& x, const Ltl& y) {
  if (x.kind() != y.kind()) return x.kind() < y.kind() ? -1 : 1;
  switch (x.kind()) {
    case K::True:
    case K::False:
      return 0;
    case K::Prop:
      return x.prop_index() == y.prop_index() ? 0 : (x.prop_index() < y.prop_index() ? -1 : 1);
    case K::Not:
    case K::Next:
      return compare(x.left(), y.left());
    default:
      if (int c = compare(x.left(), y.left())) return c;
      return compare(x.right(), y.right());
  }
}

}  // namespace

bool operator==(const Ltl& a, const Ltl& b) { return compare(a, b) == 0; }
bool operator<(const Ltl& a, const Ltl& b) { return compare(a, b) < 0; }

// ---------------------------------------------------------------- parsing

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\''; }

class Parser {
 public:
  Parser(std::string text, const Net& net, Property& out) : s_(std::move(text)), net_(net), out_(out) {}

  Ltl parse() {
    Ltl f = equivalence();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + s_.substr(i_, 12) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw LtlParseError("LTL parse error at offset " + std::to_string(i_) + ": " + msg);
  }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool at(const std::string& tok) const { return s_.compare(i_, tok.size(), tok) == 0; }

  bool eat(const std::string& tok) {
    skip();
    if (!at(tok)) return false;
    i_ += tok.size();
    return true;
  }

  /// A one-letter operator word such as U or G, standing alone.
  bool word_at(std::size_t pos, const std::string& w) const {
    if (s_.compare(pos, w.size(), w) != 0) return false;
    if (pos > 0 && ident_char(s_[pos - 1])) return false;
    std::size_t end = pos + w.size();
    if (end < s_.size() && (ident_char(s_[end]) || (s_[end] == '(' && w.size() > 1))) return false;
    // `G >= 1` compares a place named G.
    std::size_t k = end;
    while (k < s_.size() && std::isspace(static_cast<unsigned char>(s_[k]))) ++k;
    if (k < s_.size() && std::string("<>=!+-*").find(s_[k]) != std::string::npos) {
      if (s_.compare(k, 2, "<>") == 0 || s_.compare(k, 2, "!(") == 0) return true;
      if (s_[k] == '!' && k + 1 < s_.size() && s_[k + 1] != '=') return true;
      if (s_[k] == '<' && s_.compare(k, 3, "<->") != 0) return false;
      if (s_[k] == '-' && s_.compare(k, 2, "->") == 0) return true;
      return false;
    }
    return true;
  }

  bool eat_word(const std::string& w) {
    skip();
    if (!word_at(i_, w)) return false;
    i_ += w.size();
    return true;
  }

  Ltl equivalence() {
    Ltl f = implication();
    while (eat("<->")) {
      Ltl g = implication();
      f = Ltl::conj(Ltl::implies(f, g), Ltl::implies(g, f));
    }
    return f;
  }

  Ltl implication() {
    Ltl f = disjunction();
    skip();
    if (eat("->") || eat("=>")) return Ltl::implies(f, implication());
    return f;
  }

  Ltl disjunction() {
    Ltl f = conjunction();
    while (eat("\\/") || eat("||")) f = Ltl::disj(f, conjunction());
    return f;
  }

  Ltl conjunction() {
    Ltl f = binary_temporal();
    while (eat("/\\") || eat("&&")) f = Ltl::conj(f, binary_temporal());
    return f;
  }

  Ltl binary_temporal() {
    Ltl f = unary();
    if (eat_word("U")) return Ltl::until(f, binary_temporal());
    if (eat_word("R")) return Ltl::release(f, binary_temporal());
    if (eat_word("W")) {
      Ltl g = binary_temporal();
      return Ltl::disj(Ltl::until(f, g), Ltl::always(f));
    }
    return f;
  }

  Ltl unary() {
    skip();
    if (eat("[]") || eat_word("G")) return Ltl::always(unary());
    if (eat("<>") || eat_word("F")) return Ltl::eventually(unary());
    if (eat_word("X")) return Ltl::next(unary());
    if (at("~") || (at("!") && !at("!="))) {
      ++i_;
      return Ltl::negation(unary());
    }
    return primary();
  }

  Ltl primary() {
    skip();
    if (at("(")) {
      std::size_t save = i_;
      try {
        ++i_;
        Ltl f = equivalence();
        if (!eat(")")) fail("expected ')'");
        skip();
        bool arithmetic_follows =
            i_ < s_.size() && std::string("<>=+-*").find(s_[i_]) != std::string::npos && !at("->") && !at("<->") &&
            !at("<>");
        if (!arithmetic_follows) return f;
      } catch (const LtlParseError&) {
      }
      i_ = save;
    }
    return atom();
  }

  std::size_t atom_end() const {
    int depth = 0;
    std::size_t k = i_;
    for (; k < s_.size(); ++k) {
      char c = s_[k];
      if (c == '(' || c == '[') {
        ++depth;
        continue;
      }
      if (c == ')' || c == ']') {
        if (depth == 0) break;
        --depth;
        continue;
      }
      if (depth > 0) continue;
      if (s_.compare(k, 2, "/\\") == 0 || s_.compare(k, 2, "\\/") == 0 || s_.compare(k, 2, "&&") == 0 ||
          s_.compare(k, 2, "||") == 0 || s_.compare(k, 2, "->") == 0 || s_.compare(k, 2, "=>") == 0 ||
          s_.compare(k, 3, "<->") == 0)
        break;
      if ((s_[k] == 'U' || s_[k] == 'R' || s_[k] == 'W') && word_at(k, std::string(1, s_[k]))) break;
    }
    return k;
  }

  Ltl atom() {
    skip();
    std::size_t end = atom_end();
    std::string text = s_.substr(i_, end - i_);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    if (text.empty()) fail("expected a proposition");
    i_ = end;
    if (text == "true") return Ltl::truth();
    if (text == "false") return Ltl::falsity();
    for (std::size_t k = 0; k < out_.prop_text.size(); ++k)
      if (out_.prop_text[k] == text) return Ltl::prop(k);
    out_.props.push_back(state_formula(text));
    out_.prop_text.push_back(text);
    return Ltl::prop(out_.props.size() - 1);
  }

  Formula state_formula(const std::string& text) const {
    static const std::regex in_time(R"(^\s*in-time\s*\[\s*([^,\]]+?)\s*,\s*([^\]]+?)\s*\]\s*$)");
    std::smatch m;
    io::Symbols symbols = io::predicate_symbols(net_);
    try {
      if (std::regex_match(text, m, in_time)) {
        Term gt = Term::variable(real_var(global_time_hole()));
        Formula f = parse_bound(m[1].str(), symbols) <= gt;
        if (m[2].str() != "inf") f = f && gt <= parse_bound(m[2].str(), symbols);
        return f;
      }
      return io::parse_formula(text, symbols);
    } catch (const io::ParseError& e) {
      throw LtlParseError("bad proposition '" + text + "': " + e.what());
    }
  }

  static Term parse_bound(const std::string& text, const io::Symbols& symbols) {
    return Term(io::parse_linear(text, symbols));
  }

  std::string s_;
  std::size_t i_ = 0;
  const Net& net_;
  Property& out_;
};

}  // namespace

Property parse(const std::string& text, const Net& net) {
  Property p;
  Parser parser(text, net, p);
  p.formula = parser.parse();
  return p;
}

// ------------------------------------------------------ tableau translation

namespace {

bool is_literal(const Ltl& f) {
  return f.kind() == K::True || f.kind() == K::False || f.kind() == K::Prop ||
         (f.kind() == K::Not && f.left().kind() == K::Prop);
}

struct TableauNode {
  std::set<std::size_t> incoming;
  std::set<Ltl> fresh;  // still to be processed
  std::set<Ltl> old;
  std::set<Ltl> next;
};

constexpr std::size_t kInit = 0;

}  // namespace

Buchi translate(const Ltl& formula) {
  Ltl root = formula.nnf();
  // Completed nodes; ids start at 1 (0 is the virtual initial node).
  std::vector<TableauNode> done;
  std::vector<TableauNode> work;
  TableauNode start;
  start.incoming.insert(kInit);
  start.fresh.insert(root);
  work.push_back(std::move(start));

  std::set<Ltl> untils;
  std::function<void(const Ltl&)> collect = [&](const Ltl& f) {
    if (f.kind() == K::Until) untils.insert(f);
    if (f.kind() == K::Not || f.kind() == K::Next) collect(f.left());
    if (f.kind() == K::And || f.kind() == K::Or || f.kind() == K::Until || f.kind() == K::Release) {
      collect(f.left());
      collect(f.right());
    }
  };
  collect(root);

  while (!work.empty()) {
    TableauNode n = std::move(work.back());
    work.pop_back();
    if (n.fresh.empty()) {
      auto same = std::find_if(done.begin(), done.end(),
                               [&](const TableauNode& d) { return d.old == n.old && d.next == n.next; });
      if (same != done.end()) {
        same->incoming.insert(n.incoming.begin(), n.incoming.end());
        continue;
      }
      done.push_back(n);
      TableauNode succ;
      succ.incoming.insert(done.size());  // id of the node just completed
      succ.fresh = n.next;
      work.push_back(std::move(succ));
      continue;
    }
    Ltl eta = *n.fresh.begin();
    n.fresh.erase(n.fresh.begin());
    if (n.old.count(eta)) {
      work.push_back(std::move(n));
      continue;
    }
    if (is_literal(eta)) {
      if (eta.kind() == K::False || n.old.count(Ltl::negation(eta).nnf())) continue;
      if (eta.kind() != K::True) n.old.insert(eta);
      work.push_back(std::move(n));
      continue;
    }
    switch (eta.kind()) {
      case K::And: {
        n.old.insert(eta);
        for (const Ltl& g : {eta.left(), eta.right()})
          if (!n.old.count(g)) n.fresh.insert(g);
        work.push_back(std::move(n));
        break;
      }
      case K::Next: {
        n.old.insert(eta);
        n.next.insert(eta.left());
        work.push_back(std::move(n));
        break;
      }
      case K::Or:
      case K::Until:
      case K::Release: {
        TableauNode n1 = n;
        TableauNode n2 = std::move(n);
        n1.old.insert(eta);
        n2.old.insert(eta);
        auto add = [](TableauNode& t, const Ltl& g) {
          if (!t.old.count(g)) t.fresh.insert(g);
        };
        if (eta.kind() == K::Or) {
          add(n1, eta.left());
          add(n2, eta.right());
        } else if (eta.kind() == K::Until) {
          add(n1, eta.left());
          n1.next.insert(eta);
          add(n2, eta.right());
        } else {
          add(n1, eta.right());
          n1.next.insert(eta);
          add(n2, eta.left());
          add(n2, eta.right());
        }
        work.push_back(std::move(n1));
        work.push_back(std::move(n2));
        break;
      }
      default:
        break;
    }
  }

  Buchi b;
  b.states.resize(done.size());
  for (std::size_t q = 0; q < done.size(); ++q) {
    auto& st = b.states[q];
    for (const Ltl& f : done[q].old) {
      if (f.kind() == K::Prop) st.pos.push_back(f.prop_index());
      if (f.kind() == K::Not && f.left().kind() == K::Prop) st.neg.push_back(f.left().prop_index());
    }
    for (std::size_t p : st.pos)
      if (std::find(st.neg.begin(), st.neg.end(), p) != st.neg.end()) st.contradictory = true;
    for (std::size_t from : done[q].incoming) {
      if (from == kInit) {
        st.initial = true;
      } else {
        b.states[from - 1].succ.push_back(q);
      }
    }
  }
  for (const Ltl& u : untils) {
    std::vector<bool> acc(done.size());
    for (std::size_t q = 0; q < done.size(); ++q) acc[q] = !done[q].old.count(u) || done[q].old.count(u.right());
    b.accepting.push_back(std::move(acc));
  }
  return b;
}

// ----------------------------------------------------------- emptiness check

namespace {

struct ProductKey {
  std::size_t k;
  std::size_t b;
  std::size_t i;
  friend bool operator==(const ProductKey&, const ProductKey&) = default;
};

struct ProductKeyHash {
  std::size_t operator()(const ProductKey& p) const {
    return (p.k * 1'000'003u) ^ (p.b * 7919u) ^ p.i;
  }
};

class Product {
 public:
  Product(const Kripke& k, const Buchi& b) : k_(k), b_(b), sets_(std::max<std::size_t>(1, b.accepting.size())) {}

  std::vector<std::size_t> initial() {
    std::vector<std::size_t> out;
    for (std::size_t s : k_.initial)
      for (std::size_t q = 0; q < b_.states.size(); ++q)
        if (b_.states[q].initial && matches(s, q)) out.push_back(id({s, q, 0}));
    return out;
  }

  std::vector<std::size_t> successors(std::size_t pid) {
    ProductKey p = keys_[pid];
    std::size_t j = in_set(p.b, p.i) ? (p.i + 1) % sets_ : p.i;
    std::vector<std::size_t> ks = k_.succ[p.k];
    if (ks.empty()) ks.push_back(p.k);
    std::vector<std::size_t> out;
    for (std::size_t s : ks)
      for (std::size_t q : b_.states[p.b].succ)
        if (matches(s, q)) out.push_back(id({s, q, j}));
    return out;
  }

  bool accepting(std::size_t pid) const {
    const ProductKey& p = keys_[pid];
    return p.i == 0 && in_set(p.b, 0);
  }

  std::size_t kripke_state(std::size_t pid) const { return keys_[pid].k; }
  std::size_t size() const { return keys_.size(); }

 private:
  bool matches(std::size_t s, std::size_t q) const {
    const auto& st = b_.states[q];
    if (st.contradictory) return false;
    for (std::size_t p : st.pos)
      if (!k_.labels[s][p]) return false;
    for (std::size_t p : st.neg)
      if (k_.labels[s][p]) return false;
    return true;
  }

  bool in_set(std::size_t q, std::size_t i) const { return b_.accepting.empty() || b_.accepting[i][q]; }

  std::size_t id(const ProductKey& key) {
    auto [it, fresh] = index_.emplace(key, keys_.size());
    if (fresh) keys_.push_back(key);
    return it->second;
  }

  const Kripke& k_;
  const Buchi& b_;
  std::size_t sets_;
  std::unordered_map<ProductKey, std::size_t, ProductKeyHash> index_;
  std::vector<ProductKey> keys_;
};

/// Nested DFS; returns product-state lasso (stem, cycle) when an accepting
/// run exists.
std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> find_accepting_lasso(Product& prod) {
  std::vector<char> blue;
  std::vector<char> red;
  auto grow = [&](std::size_t n) {
    if (blue.size() <= n) {
      blue.resize(n + 1, 0);
      red.resize(n + 1, 0);
    }
  };
  struct Frame {
    std::size_t state;
    std::vector<std::size_t> succ;
    std::size_t next = 0;
  };

  auto red_search = [&](std::size_t seed) -> std::optional<std::vector<std::size_t>> {
    std::vector<Frame> stack;
    stack.push_back({seed, prod.successors(seed)});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next == f.succ.size()) {
        stack.pop_back();
        continue;
      }
      std::size_t t = f.succ[f.next++];
      grow(t);
      if (t == seed) {
        std::vector<std::size_t> path;
        for (const auto& fr : stack) path.push_back(fr.state);
        return path;
      }
      if (red[t]) continue;
      red[t] = 1;
      stack.push_back({t, prod.successors(t)});
    }
    return std::nullopt;
  };

  for (std::size_t root : prod.initial()) {
    grow(root);
    if (blue[root]) continue;
    blue[root] = 1;
    std::vector<Frame> stack;
    stack.push_back({root, prod.successors(root)});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < f.succ.size()) {
        std::size_t t = f.succ[f.next++];
        grow(t);
        if (!blue[t]) {
          blue[t] = 1;
          stack.push_back({t, prod.successors(t)});
        }
        continue;
      }
      std::size_t s = f.state;
      if (prod.accepting(s)) {
        if (auto cycle = red_search(s)) {
          std::vector<std::size_t> stem;
          for (std::size_t k = 0; k + 1 < stack.size(); ++k) stem.push_back(stack[k].state);
          return std::make_pair(stem, *cycle);
        }
      }
      stack.pop_back();
    }
  }
  return std::nullopt;
}

CheckResult search(const Kripke& k, const Ltl& f, bool found_means_holds) {
  Buchi b = translate(f);
  Product prod(k, b);
  auto lasso = find_accepting_lasso(prod);
  CheckResult r;
  r.product_states = prod.size();
  r.holds = lasso.has_value() == found_means_holds;
  if (lasso) {
    for (std::size_t p : lasso->first) r.stem.push_back(prod.kripke_state(p));
    for (std::size_t p : lasso->second) r.cycle.push_back(prod.kripke_state(p));
  }
  return r;
}

}  // namespace

CheckResult check(const Kripke& k, const Ltl& f) { return search(k, Ltl::negation(f), false); }

CheckResult exists_path(const Kripke& k, const Ltl& f) { return search(k, f, true); }

ConcreteResult model_check(const concrete::Engine& engine, const Property& property, bool universal,
                           std::size_t max_states) {
  ConcreteResult out;
  concrete::StateGraph g = concrete::explore(engine, engine.initial_state(), max_states);
  out.graph_states = g.states.size();
  if (!g.complete) {
    out.reason = "state graph exceeds " + std::to_string(max_states) + " states";
    return out;
  }
  Kripke k;
  k.initial.push_back(0);
  k.succ.resize(g.states.size());
  k.labels.resize(g.states.size());
  std::vector<concrete::StatePredicate> preds;
  for (const auto& p : property.props) preds.push_back(concrete::compile(engine.net(), p));
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    for (const auto& [event, target] : g.edges[s]) k.succ[s].push_back(target);
    for (const auto& pred : preds) k.labels[s].push_back(pred(g.states[s]));
  }
  CheckResult r = universal ? check(k, property.formula) : exists_path(k, property.formula);
  out.holds = r.holds;
  out.verdict = r.holds ? concrete::Verdict::Found : concrete::Verdict::NotFound;
  for (std::size_t s : r.stem) out.stem.push_back(g.states[s]);
  for (std::size_t s : r.cycle) out.cycle.push_back(g.states[s]);
  return out;
}

}  // namespace pitpn::ltl
