#include "asymlock/checker.hpp"

#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "state_space.hpp"

namespace asymlock {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool enqueued(Label l) {
  switch (l) {
    case Label::cwait: case Label::c2: case Label::c3: case Label::c4:
    case Label::c5: case Label::c6: case Label::c7: case Label::c8:
    case Label::c9: case Label::c10: case Label::p2: case Label::g1:
    case Label::gwait: case Label::g2: case Label::g3: case Label::g4:
    case Label::cs: case Label::exit: case Label::rnext: case Label::cas:
    case Label::r1: case Label::r2:
      return true;
    default:
      return false;
  }
}

bool same_access(const AccessRecord& a, const AccessRecord& b) {
  return a.proc == b.proc && a.op == b.op && a.remote == b.remote &&
         a.reg == b.reg && a.before == b.before && a.after == b.after;
}

// The register a step modified, if any.
const AccessRecord* modification(const TraceStep& s) {
  for (const auto& a : s.accesses) {
    if (a.op == OpKind::write || a.op == OpKind::cas_store) return &a;
    if (a.op == OpKind::cas && a.before != a.after) return &a;
  }
  return nullptr;
}

PropertyReport finish(std::string name, const detail::StateGraph& g,
                      Clock::time_point t0) {
  PropertyReport r;
  r.property = std::move(name);
  r.states = g.size();
  r.transitions = g.transitions;
  r.seconds = since(t0);
  if (g.cap_hit) {
    r.verdict = Verdict::inconclusive;
    r.detail = "state cap hit";
  }
  return r;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Checker::Checker(CheckConfig cfg) : cfg_(cfg), scratch_(cfg_) {}

std::vector<LabeledState> Checker::initial_states() const {
  return scratch_.initial_states();
}

std::vector<std::pair<std::uint32_t, LabeledState>> Checker::successors(
    const LabeledState& s) {
  std::vector<std::pair<std::uint32_t, LabeledState>> out;
  for (std::uint32_t p = 0; p < scratch_.num_processes(); ++p) {
    scratch_.restore(s);
    if (scratch_.step(p) == StepResult::taken)
      out.emplace_back(p, scratch_.snapshot());
  }
  return out;
}

ExploreStats Checker::explore(SearchOrder order) {
  const auto t0 = Clock::now();
  auto g = detail::search(cfg_, order, false, {});
  return ExploreStats{g.size(), g.transitions, g.cap_hit, since(t0)};
}

PropertyReport Checker::check_safety(SearchOrder order) {
  const auto t0 = Clock::now();
  std::uint32_t bad = detail::kNoState;
  detail::SearchHooks hooks;
  hooks.on_state = [&](std::uint32_t idx, const System& sys) {
    if (invariants::processes_in_cs(sys) < 2) return true;
    bad = idx;
    return false;
  };
  auto g = detail::search(cfg_, order, false, hooks);
  auto r = finish("MutualExclusion", g, t0);
  if (bad != detail::kNoState) {
    std::uint32_t root = 0;
    auto procs = detail::path_to(g, bad, &root);
    r.verdict = Verdict::violated;
    r.counterexample = detail::build_trace(cfg_, g, root, procs);
    r.detail = "two processes at cs";
  }
  return r;
}

std::vector<PropertyReport> Checker::check_invariants(SearchOrder order) {
  const auto t0 = Clock::now();
  const bool alock = cfg_.lock == LockKind::alock;
  const bool has_victim = scratch_.victim_register().has_value();

  struct Finding {
    Finding(std::string n, bool a) : name(std::move(n)), applies(a) {}
    std::string name;
    bool applies;
    std::uint32_t state = detail::kNoState;  // violating state
    std::uint32_t src = detail::kNoState;    // or violating transition
    std::uint32_t proc = 0;
    std::string detail;
    bool found() const {
      return state != detail::kNoState || src != detail::kNoState;
    }
  };
  std::vector<Finding> f = {
      {"MutualExclusion", true},     {"BudgetBound", alock},
      {"QueueIntegrity", alock},     {"HandOffExclusivity", alock},
      {"LocalPurity", cfg_.lock != LockKind::naive_rcas},        {"LocalWaitLocality", alock},
      {"VictimDiscipline", has_victim},
  };
  enum { kMutex, kBudget, kQueue, kHandOff, kPurity, kWait, kVictim };
  std::size_t open = 0;
  for (const auto& x : f) open += x.applies ? 1 : 0;

  auto flag_state = [&](int k, std::uint32_t idx, std::string why) {
    if (!f[k].applies || f[k].found()) return;
    f[k].state = idx;
    f[k].detail = std::move(why);
    --open;
  };
  auto flag_step = [&](int k, std::uint32_t src, std::uint32_t proc,
                       std::string why) {
    if (!f[k].applies || f[k].found()) return;
    f[k].src = src;
    f[k].proc = proc;
    f[k].detail = std::move(why);
    --open;
  };

  detail::SearchHooks hooks;
  hooks.on_state = [&](std::uint32_t idx, const System& sys) {
    if (invariants::processes_in_cs(sys) > 1)
      flag_state(kMutex, idx, "two processes at cs");
    if (alock) {
      if (!invariants::budgets_in_bounds(sys))
        flag_state(kBudget, idx, "budget register outside [-1, B]");
      if (auto e = invariants::queue_integrity_error(sys); !e.empty())
        flag_state(kQueue, idx, e);
      if (!invariants::handoff_exclusive(sys))
        flag_state(kHandOff, idx, "two queued processes hold a budget");
    }
    return open > 0;
  };
  hooks.on_transition = [&](std::uint32_t src, std::uint32_t, std::uint32_t p,
                            Label label,
                            const std::vector<AccessRecord>& acc) {
    if (invariants::breaks_local_purity(scratch_, p, acc))
      flag_step(kPurity, src, p, "class-0 process issued a remote access");
    if (alock && invariants::breaks_wait_locality(scratch_, p, label, acc))
      flag_step(kWait, src, p, "spin read outside own partition");
    if (has_victim && invariants::breaks_victim_discipline(scratch_, label, acc))
      flag_step(kVictim, src, p, "victim accessed outside g1/g3");
    return open > 0;
  };
  auto g = detail::search(cfg_, order, false, hooks);

  std::vector<PropertyReport> out;
  for (const auto& x : f) {
    if (!x.applies) continue;
    auto r = finish(x.name, g, t0);
    if (x.found()) {
      std::uint32_t root = 0;
      const bool on_state = x.state != detail::kNoState;
      auto procs = detail::path_to(g, on_state ? x.state : x.src, &root);
      if (!on_state) procs.push_back(x.proc);
      r.verdict = Verdict::violated;
      r.counterexample = detail::build_trace(cfg_, g, root, procs);
      r.detail = x.detail;
    } else if (g.stopped) {
      // Every applicable property was violated before the search finished.
      r.verdict = Verdict::inconclusive;
      r.detail = "search stopped early";
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PropertyReport> Checker::check_liveness() {
  return detail::check_liveness(cfg_);
}

std::optional<Trace> Checker::find(
    const std::function<bool(const System&)>& pred) {
  std::uint32_t hit = detail::kNoState;
  detail::SearchHooks hooks;
  hooks.on_state = [&](std::uint32_t idx, const System& sys) {
    if (!pred(sys)) return true;
    hit = idx;
    return false;
  };
  auto g = detail::search(cfg_, SearchOrder::bfs, false, hooks);
  if (hit == detail::kNoState) return std::nullopt;
  std::uint32_t root = 0;
  auto procs = detail::path_to(g, hit, &root);
  return detail::build_trace(cfg_, g, root, procs);
}

LabeledState replay(const CheckConfig& cfg, const Trace& trace) {
  System sys(cfg);
  sys.restore(trace.initial);
  std::optional<LabeledState> loop_head;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (trace.cycle_start == i) loop_head = sys.snapshot();
    const auto& s = trace.steps[i];
    const std::string where = "step " + std::to_string(i) + ": ";
    if (s.proc >= sys.num_processes())
      throw std::runtime_error(where + "no such process");
    if (sys.pc(s.proc) != s.label)
      throw std::runtime_error(where + "process is at " +
                               std::string(to_string(sys.pc(s.proc))));
    if (sys.step(s.proc) != StepResult::taken)
      throw std::runtime_error(where + "step not enabled");
    const auto& got = sys.last_accesses();
    bool same = got.size() == s.accesses.size();
    for (std::size_t k = 0; same && k < got.size(); ++k)
      same = same_access(got[k], s.accesses[k]);
    if (!same) throw std::runtime_error(where + "accesses differ");
  }
  if (trace.cycle_start == trace.steps.size()) loop_head = sys.snapshot();
  if (trace.cycle_start && !loop_head)
    throw std::runtime_error("cycle start out of range");
  if (loop_head && !(*loop_head == sys.snapshot()))
    throw std::runtime_error("cycle does not return to its first state");
  return sys.snapshot();
}

void write_trace(std::ostream& os, const CheckConfig& cfg, const Trace& t) {
  System sys(cfg);
  os << "# config: " << describe(cfg) << "\n";
  if (auto v = sys.victim_register())
    os << "# initial_victim="
       << to_string(t.initial.registers[sys.memory().flat_index(*v)]) << "\n";
  os << "# step_index,proc,label,changed_register,old,new\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (t.cycle_start == i) os << "# cycle\n";
    const auto& s = t.steps[i];
    os << i << ',' << s.proc << ',' << to_string(s.label) << ',';
    if (const auto* m = modification(s))
      os << to_string(m->reg) << ',' << to_string(m->before) << ','
         << to_string(m->after) << '\n';
    else
      os << "-,-,-\n";
  }
  if (t.cycle_start == t.steps.size()) os << "# cycle\n";
}

Trace read_trace(std::istream& is, const CheckConfig& cfg) {
  System sys(cfg);
  std::optional<std::int64_t> victim;
  std::optional<std::size_t> cycle_start;
  std::vector<std::pair<std::uint32_t, Label>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line == "# cycle") cycle_start = rows.size();
      const std::string key = "# initial_victim=";
      if (line.rfind(key, 0) == 0) victim = std::stoll(line.substr(key.size()));
      continue;
    }
    std::istringstream fields(line);
    std::string idx, proc, label;
    if (!std::getline(fields, idx, ',') || !std::getline(fields, proc, ',') ||
        !std::getline(fields, label, ','))
      throw std::runtime_error("malformed trace line: " + line);
    auto l = label_from_string(label);
    if (!l) throw std::runtime_error("unknown label: " + label);
    if (std::stoull(idx) != rows.size())
      throw std::runtime_error("step index out of sequence: " + line);
    rows.emplace_back(static_cast<std::uint32_t>(std::stoul(proc)), *l);
  }

  Trace t;
  auto inits = sys.initial_states();
  t.initial = inits.front();
  if (auto v = sys.victim_register(); v && victim) {
    const std::size_t f = sys.memory().flat_index(*v);
    bool matched = false;
    for (const auto& s : inits)
      if (s.registers[f] == Word::integer(*victim)) {
        t.initial = s;
        matched = true;
      }
    if (!matched) throw std::runtime_error("initial victim not allowed by config");
  }
  t.cycle_start = cycle_start;
  sys.restore(t.initial);
  for (auto [proc, label] : rows) {
    if (proc >= sys.num_processes() || sys.pc(proc) != label ||
        sys.step(proc) != StepResult::taken)
      throw std::runtime_error("trace does not replay at step " +
                               std::to_string(t.steps.size()));
    t.steps.push_back(TraceStep{proc, label, sys.last_accesses()});
  }
  return t;
}

namespace invariants {

int processes_in_cs(const System& sys) {
  int n = 0;
  for (std::size_t i = 0; i < sys.num_processes(); ++i)
    n += sys.pc(i) == Label::cs ? 1 : 0;
  return n;
}

bool budgets_in_bounds(const System& sys) {
  if (sys.config().lock != LockKind::alock) return true;
  for (std::size_t i = 0; i < sys.num_processes(); ++i) {
    const Word w = sys.memory().peek(sys.participant(i).desc.budget);
    if (!w.is_int() || w.as_int() < -1 ||
        w.as_int() > sys.config().k_init_budget)
      return false;
  }
  return true;
}

std::string queue_integrity_error(const System& sys) {
  if (sys.config().lock != LockKind::alock) return {};
  const auto tails = sys.cohort_tails();
  const Memory& mem = sys.memory();
  const std::size_t n = sys.num_processes();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  auto member_of = [&](Word w, const std::vector<std::size_t>& members) {
    if (!w.is_ref()) return kNone;
    for (std::size_t m : members)
      if (sys.participant(m).desc.budget == w.as_ref()) return m;
    return kNone;
  };

  for (std::uint8_t c = 0; c < 2; ++c) {
    const std::string cls = "cohort " + std::to_string(c) + ": ";
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (sys.class_of(i).id == c && enqueued(sys.pc(i))) members.push_back(i);
    const Word tail = mem.peek(tails[c]);
    if (members.empty()) {
      if (!tail.is_null()) return cls + "tail set but no process enqueued";
      continue;
    }
    const std::size_t last = member_of(tail, members);
    if (last == kNone) return cls + "tail does not name an enqueued process";

    std::vector<std::size_t> succ(n, kNone), incoming(n, 0);
    auto link = [&](std::size_t from, std::size_t to) -> std::string {
      if (from == kNone || to == kNone) return cls + "link to a non-member";
      if (succ[from] != kNone) return cls + "two successors";
      succ[from] = to;
      if (++incoming[to] > 1) return cls + "two predecessors";
      return {};
    };
    for (std::size_t m : members) {
      const Word next = mem.peek(sys.participant(m).desc.next);
      if (next.is_null()) continue;
      if (auto e = link(m, member_of(next, members)); !e.empty()) return e;
    }
    // A process that swapped in but has not yet linked itself.
    for (std::size_t m : members) {
      const auto& st = sys.state(m);
      if ((st.pc == Label::cwait || st.pc == Label::c2) && !st.pred.is_null())
        if (auto e = link(member_of(st.pred, members), m); !e.empty()) return e;
    }
    std::size_t head = kNone;
    for (std::size_t m : members) {
      if (incoming[m] != 0) continue;
      if (head != kNone) return cls + "more than one head";
      head = m;
    }
    if (head == kNone) return cls + "queue is a cycle";
    std::size_t seen = 1, at = head;
    while (succ[at] != kNone && seen <= members.size()) {
      at = succ[at];
      ++seen;
    }
    if (seen != members.size()) return cls + "queue is not a single chain";
    if (at != last) return cls + "chain does not end at the tail";
  }
  return {};
}

bool handoff_exclusive(const System& sys) {
  if (sys.config().lock != LockKind::alock) return true;
  int holders[2] = {0, 0};
  for (std::size_t i = 0; i < sys.num_processes(); ++i) {
    if (!enqueued(sys.pc(i))) continue;
    const Word w = sys.memory().peek(sys.participant(i).desc.budget);
    if (w.is_int() && w.as_int() >= 0) ++holders[sys.class_of(i).id];
  }
  return holders[0] <= 1 && holders[1] <= 1;
}

bool breaks_local_purity(const System& sys, std::uint32_t proc,
                         const std::vector<AccessRecord>& acc) {
  if (sys.class_of(proc).id != 0) return false;
  for (const auto& a : acc)
    if (a.remote) return true;
  return false;
}

bool breaks_wait_locality(const System& sys, std::uint32_t proc, Label label,
                          const std::vector<AccessRecord>& acc) {
  if (label != Label::c3 && label != Label::r1) return false;
  const NodeId home = sys.participant(proc).proc.node;
  for (const auto& a : acc)
    if (a.remote || a.op != OpKind::read || a.reg.node != home) return true;
  return false;
}

bool breaks_victim_discipline(const System& sys, Label label,
                              const std::vector<AccessRecord>& acc) {
  const auto victim = sys.victim_register();
  if (!victim || label == Label::g1 || label == Label::g3) return false;
  for (const auto& a : acc)
    if (a.reg == *victim) return true;
  return false;
}

}  // namespace invariants

}  // namespace asymlock
