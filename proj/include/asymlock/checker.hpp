#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asymlock/system.hpp"

namespace asymlock {

enum class Verdict : std::uint8_t { holds, violated, inconclusive };

std::string to_string(Verdict v);

struct TraceStep {
  std::uint32_t proc = 0;
  Label label = Label::ncs;  // label the step executed
  std::vector<AccessRecord> accesses;
};

// A counterexample, replayable from `initial`. For a lasso, steps from
// `cycle_start` on repeat forever; an empty cycle means the last state
// stutters forever (every process idle or blocked).
struct Trace {
  LabeledState initial;
  std::vector<TraceStep> steps;
  std::optional<std::size_t> cycle_start;
};

struct PropertyReport {
  std::string property;
  Verdict verdict = Verdict::holds;
  std::optional<Trace> counterexample;
  std::size_t states = 0;
  std::size_t transitions = 0;
  double seconds = 0;
  std::string detail;
};

enum class SearchOrder : std::uint8_t { bfs, dfs, parallel_bfs };

struct ExploreStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  bool cap_hit = false;
  double seconds = 0;
};

// Explicit-state explorer over every interleaving of a CheckConfig's
// processes. Each transition is one process step; awaits whose condition is
// false and accesses the backend refuses are not transitions.
class Checker {
 public:
  explicit Checker(CheckConfig cfg);

  const CheckConfig& config() const { return cfg_; }
  std::vector<LabeledState> initial_states() const;

  // One entry per enabled process step: (process serial, next state).
  std::vector<std::pair<std::uint32_t, LabeledState>> successors(
      const LabeledState& s);

  // Reachable-state count; bfs, dfs and parallel_bfs must agree.
  ExploreStats explore(SearchOrder order);

  // MutualExclusion: no two processes at cs. Stops at the first violation;
  // under bfs/parallel_bfs the trace has minimal length.
  PropertyReport check_safety(SearchOrder order = SearchOrder::bfs);

  // MutualExclusion plus the structural invariants that apply to the lock:
  // BudgetBound, QueueIntegrity, HandOffExclusivity (alock), LocalPurity,
  // LocalWaitLocality, VictimDiscipline.
  std::vector<PropertyReport> check_invariants(
      SearchOrder order = SearchOrder::bfs);

  // StarvationFree, DeadAndLivelockFree, ExecsCriticalSectionInfinitelyOften,
  // CohortFairness, GlobalFairness under weak fairness (ncs optionally
  // exempt), by fair-lasso search over the whole state graph.
  std::vector<PropertyReport> check_liveness();

  // Shortest trace to a state satisfying `pred`, if one is reachable.
  std::optional<Trace> find(const std::function<bool(const System&)>& pred);

 private:
  CheckConfig cfg_;
  System scratch_;
};

// Replays a trace step by step, checking that every step is enabled and
// performs the recorded accesses. Returns the state reached (for a lasso:
// after one pass over the cycle). Throws std::runtime_error on divergence.
LabeledState replay(const CheckConfig& cfg, const Trace& trace);

// Trace files: '#' header lines, then
//   step_index,proc,label,changed_register,old,new
// with a "# cycle" line where a lasso's cycle begins.
void write_trace(std::ostream& os, const CheckConfig& cfg, const Trace& t);
// Rebuilds a trace (initial state, process order and labels) from a file
// written by write_trace; accesses are re-derived by replay.
Trace read_trace(std::istream& is, const CheckConfig& cfg);

// Per-state / per-transition predicates shared by the checker and the
// random runner.
namespace invariants {

int processes_in_cs(const System& sys);
bool budgets_in_bounds(const System& sys);
// Empty when every cohort queue is a single well-formed chain ending at its
// tail; otherwise a description of the defect.
std::string queue_integrity_error(const System& sys);
bool handoff_exclusive(const System& sys);

// A class-0 process used the RNIC.
bool breaks_local_purity(const System& sys, std::uint32_t proc,
                         const std::vector<AccessRecord>& acc);
// A budget/next spin (c3, r1) read something other than a local register in
// the spinner's own partition.
bool breaks_wait_locality(const System& sys, std::uint32_t proc, Label label,
                          const std::vector<AccessRecord>& acc);
// The victim register was accessed outside g1/g3.
bool breaks_victim_discipline(const System& sys, Label label,
                              const std::vector<AccessRecord>& acc);

}  // namespace invariants

}  // namespace asymlock
