#include "pitpn/smt.hpp"

#include "pitpn/smtlib.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace pitpn::smt {

std::string to_string(SatResult r) {
  switch (r) {
    case SatResult::Sat: return "sat";
    case SatResult::Unsat: return "unsat";
    case SatResult::Unknown: return "unknown";
  }
  return "unknown";
}

std::string default_solver_path() {
  if (const char* env = std::getenv("PITPN_SOLVER"); env && *env) return env;
#ifdef PITPN_DEFAULT_SOLVER
  return PITPN_DEFAULT_SOLVER;
#else
  return "z3";
#endif
}

SolverConfig z3_config(const std::string& executable) {
  SolverConfig c;
  c.name = "z3";
  c.executable = executable;
  c.arguments = {"-in", "-smt2"};
  c.quantifier_elimination = true;
  return c;
}

SolverConfig generic_config(const std::string& executable, std::vector<std::string> arguments, std::string logic) {
  SolverConfig c;
  c.name = "smtlib";
  c.executable = executable;
  c.arguments = std::move(arguments);
  c.quantifier_elimination = false;
  c.logic = std::move(logic);
  c.timeout_option = false;
  return c;
}

namespace {

const char* const kMarker = "@@pitpn-done";

struct Timeout : std::runtime_error {
  Timeout() : std::runtime_error("solver timed out") {}
};

}  // namespace

class SolverProcess {
 public:
  explicit SolverProcess(const SolverConfig& config) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw SolverError(std::string("pipe: ") + std::strerror(errno));
    pid_ = fork();
    if (pid_ < 0) throw SolverError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      dup2(from_child[1], STDERR_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      std::vector<char*> argv;
      argv.push_back(const_cast<char*>(config.executable.c_str()));
      for (const auto& a : config.arguments) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execvp(argv[0], argv.data());
      std::fprintf(stdout, "(error \"cannot execute %s\")\n%s\n", config.executable.c_str(), kMarker);
      std::fflush(stdout);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
  }

  ~SolverProcess() {
    if (in_ >= 0) close(in_);
    if (out_ >= 0) close(out_);
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  SolverProcess(const SolverProcess&) = delete;
  SolverProcess& operator=(const SolverProcess&) = delete;

  void send(const std::string& text) {
    std::size_t written = 0;
    while (written < text.size()) {
      ssize_t n = write(in_, text.data() + written, text.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SolverError("solver process closed its input");
      }
      written += static_cast<std::size_t>(n);
    }
  }

  /// Everything printed before the marker line.
  std::string read_until_marker(std::chrono::milliseconds limit) {
    auto deadline = std::chrono::steady_clock::now() + limit;
    const std::string marker = std::string(kMarker) + "\n";
    for (;;) {
      if (auto pos = buffer_.find(marker); pos != std::string::npos && (pos == 0 || buffer_[pos - 1] == '\n')) {
        std::string reply = buffer_.substr(0, pos);
        buffer_.erase(0, pos + marker.size());
        return reply;
      }
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) throw Timeout();
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      pollfd pfd{out_, POLLIN, 0};
      int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining, 1'000'000)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw SolverError("poll failed");
      }
      if (rc == 0) continue;
      char chunk[65536];
      ssize_t n = read(out_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SolverError("read from solver failed");
      }
      if (n == 0) throw SolverError("solver process exited unexpectedly: " + buffer_);
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string buffer_;
};

SolverSession::SolverSession(SolverConfig config) : config_(std::move(config)) {}
SolverSession::~SolverSession() = default;

void SolverSession::restart() {
  process_.reset();
  declared_.clear();
  ++stats_.restarts;
}

void SolverSession::ensure_started() {
  if (process_) return;
  process_ = std::make_unique<SolverProcess>(config_);
  std::string preamble = "(set-option :print-success false)\n";
  if (config_.timeout_option) preamble += "(set-option :timeout " + std::to_string(config_.timeout.count()) + ")\n";
  if (!config_.logic.empty()) preamble += "(set-logic " + config_.logic + ")\n";
  std::string reply = exchange(preamble);
  if (reply.find("(error") != std::string::npos) {
    process_.reset();
    throw SolverError("solver rejected preamble: " + reply);
  }
}

std::string SolverSession::exchange(const std::string& commands) {
  auto start = std::chrono::steady_clock::now();
  try {
    process_->send(commands + "(echo \"" + kMarker + "\")\n");
    // The solver enforces its own timeout; the grace period covers
    // operations it does not bound (quantifier elimination, hangs).
    std::string reply = process_->read_until_marker(config_.timeout + std::chrono::seconds(10));
    stats_.solver_time += std::chrono::steady_clock::now() - start;
    return reply;
  } catch (...) {
    stats_.solver_time += std::chrono::steady_clock::now() - start;
    restart();
    throw;
  }
}

void SolverSession::declare(const std::set<Var>& vars) {
  std::string decls;
  for (const auto& v : vars) {
    auto it = declared_.find(v.name);
    if (it != declared_.end()) {
      if (it->second != v.sort) throw SolverError("variable " + v.name + " used with two sorts");
      continue;
    }
    decls += smtlib::declaration(v) + "\n";
    declared_.emplace(v.name, v.sort);
  }
  if (decls.empty()) return;
  std::string reply = exchange(decls);
  if (reply.find("(error") != std::string::npos) throw SolverError("declaration failed: " + reply);
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

CheckOutcome SolverSession::check_sat(const Formula& f, bool want_model) {
  ++stats_.checks;
  CheckOutcome outcome;
  if (f.is_false()) {
    outcome.result = SatResult::Unsat;
    return outcome;
  }
  auto vars = free_vars(f);
  if (f.is_true() && vars.empty()) {
    outcome.result = SatResult::Sat;
    return outcome;
  }
  try {
    ensure_started();
    declare(vars);
    std::string reply = trim(exchange("(push 1)\n(assert " + smtlib::print(f) + ")\n(check-sat)\n"));
    if (reply == "sat") {
      outcome.result = SatResult::Sat;
    } else if (reply == "unsat") {
      outcome.result = SatResult::Unsat;
    } else if (reply == "unknown") {
      outcome.result = SatResult::Unknown;
      outcome.reason = "solver returned unknown";
    } else {
      exchange("(pop 1)\n");
      throw SolverError("unexpected check-sat reply: " + reply);
    }
    if (outcome.result == SatResult::Sat && want_model && !vars.empty()) {
      std::string names;
      for (const auto& v : vars) names += " " + smtlib::symbol(v.name);
      std::string values = exchange("(get-value (" + names + "))\n");
      auto e = smtlib::parse_one(values);
      if (e.is_atom) throw SolverError("unexpected get-value reply: " + values);
      for (const auto& pair : e.items) {
        if (pair.is_atom || pair.items.size() != 2 || !pair.items[0].is_atom)
          throw SolverError("unexpected get-value entry: " + pair.to_string());
        outcome.model[smtlib::unquote(pair.items[0].atom)] = smtlib::to_rational(pair.items[1]);
      }
    }
    exchange("(pop 1)\n");
  } catch (const Timeout&) {
    outcome.result = SatResult::Unknown;
    outcome.reason = "timeout";
    outcome.model.clear();
  }
  return outcome;
}

std::optional<bool> SolverSession::check_valid(const Formula& f) {
  auto r = check_sat(Formula::negation(f), false).result;
  if (r == SatResult::Unknown) return std::nullopt;
  return r == SatResult::Unsat;
}

std::optional<bool> SolverSession::entails(const Formula& premise, const Formula& conclusion) {
  auto r = check_sat(premise && !conclusion, false).result;
  if (r == SatResult::Unknown) return std::nullopt;
  return r == SatResult::Unsat;
}

std::optional<bool> SolverSession::equivalent(const Formula& a, const Formula& b) {
  return check_valid(Formula::iff(a, b));
}

namespace {

bool has_quantifier(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Exists: return true;
    case Formula::Kind::Not: return has_quantifier(f.body());
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& p : f.parts())
        if (has_quantifier(p)) return true;
      return false;
    default: return false;
  }
}

Formula decode_goals(const smtlib::SExpr& e, const std::map<std::string, Var>& vars) {
  if (!e.head_is("goals")) throw SolverError("unexpected apply reply: " + e.to_string());
  std::vector<Formula> alternatives;
  for (std::size_t g = 1; g < e.items.size(); ++g) {
    const auto& goal = e.items[g];
    if (!goal.head_is("goal")) throw SolverError("unexpected goal: " + goal.to_string());
    std::vector<Formula> parts;
    for (std::size_t i = 1; i < goal.items.size(); ++i) {
      const auto& item = goal.items[i];
      if (item.is_atom && !item.atom.empty() && item.atom[0] == ':') break;
      parts.push_back(smtlib::to_formula(item, vars));
    }
    alternatives.push_back(Formula::conj(std::move(parts)));
  }
  return Formula::disj(std::move(alternatives));
}

}  // namespace

Formula SolverSession::eliminate(const Formula& f) {
  if (!supports_qe()) throw UnsupportedOperation("solver adapter '" + config_.name + "' cannot eliminate quantifiers");
  if (!has_quantifier(f)) return f;
  ++stats_.eliminations;
  auto vars = free_vars(f);
  std::map<std::string, Var> by_name;
  for (const auto& v : vars) by_name.emplace(v.name, v);
  ensure_started();
  declare(vars);
  const std::string body = smtlib::print(f);
  for (const char* tactic : {"(then qe2 simplify)", "(then qe simplify)"}) {
    std::string reply;
    try {
      reply = exchange("(push 1)\n(assert " + body + ")\n(apply " + tactic + ")\n(pop 1)\n");
    } catch (const Timeout&) {
      throw SolverError("quantifier elimination timed out");
    }
    if (reply.find("(error") != std::string::npos) continue;
    Formula result;
    try {
      result = decode_goals(smtlib::parse_one(reply), by_name);
    } catch (const smtlib::ParseError&) {
      continue;  // e.g. divisibility constraints from integer elimination
    }
    if (!has_quantifier(result)) {
      stats_.qe_tactic = tactic;
      return result;
    }
  }
  throw SolverError("quantifier elimination failed for: " + body);
}

Formula SolverSession::simplify(const Formula& f) {
  if (!supports_qe() || f.is_constant()) return f;
  auto vars = free_vars(f);
  std::map<std::string, Var> by_name;
  for (const auto& v : vars) by_name.emplace(v.name, v);
  ensure_started();
  declare(vars);
  std::string reply;
  try {
    reply = exchange("(push 1)\n(assert " + smtlib::print(f) + ")\n(apply (then simplify ctx-solver-simplify propagate-ineqs simplify))\n(pop 1)\n");
  } catch (const Timeout&) {
    return f;
  }
  if (reply.find("(error") != std::string::npos) return f;
  return decode_goals(smtlib::parse_one(reply), by_name);
}

Formula SolverSession::project_out(const std::vector<Var>& vars, const Formula& f) {
  return eliminate(Formula::exists(vars, f));
}

}  // namespace pitpn::smt
