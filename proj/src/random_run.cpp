#include "asymlock/random_run.hpp"

#include <algorithm>
#include <random>

namespace asymlock {

namespace {

struct Streak {
  int cls = -1;
  std::uint64_t len = 0;

  void entry(int c, bool counts, std::uint64_t& best) {
    if (!counts) {
      cls = -1;
      len = 0;
      return;
    }
    len = cls == c ? len + 1 : 1;
    cls = c;
    best = std::max(best, len);
  }
};

bool announced(Label l) {
  return l == Label::gwait || l == Label::g2 || l == Label::g3 ||
         l == Label::g4;
}

}  // namespace

RandomRun random_fair_run(const CheckConfig& cfg, std::uint64_t seed,
                          std::uint64_t max_steps, bool keep_trace) {
  System sys(cfg);
  std::mt19937_64 rng(seed);
  const auto inits = sys.initial_states();
  std::size_t pick = 0;
  if (inits.size() > 1)
    pick = std::uniform_int_distribution<std::size_t>(0, inits.size() - 1)(rng);
  sys.restore(inits[pick]);
  sys.memory().reset_counts();

  const std::size_t n = sys.num_processes();
  RandomRun out;
  out.trace.initial = inits[pick];
  out.acquisitions.assign(n, 0);
  std::vector<std::uint64_t> waited(n, 0);
  std::vector<std::uint8_t> buf(sys.encoded_size());
  std::vector<std::uint32_t> enabled;
  Streak past, ann;
  const bool alock = cfg.lock == LockKind::alock;
  // The naive baseline uses loopback on purpose.
  const bool purity = cfg.lock != LockKind::naive_rcas;

  for (std::uint64_t t = 0; t < max_steps; ++t) {
    // Probe every process from the same state, uncounted.
    sys.encode(buf.data());
    sys.memory().set_counting(false);
    enabled.clear();
    for (std::uint32_t p = 0; p < n; ++p)
      if (sys.step(p) == StepResult::taken) {
        enabled.push_back(p);
        sys.decode(buf.data());
      }
    sys.memory().set_counting(true);
    if (enabled.empty()) {
      out.stuck = true;
      break;
    }

    std::uint32_t chosen = static_cast<std::uint32_t>(n);
    std::uint64_t longest = kFairnessWindow;
    for (auto p : enabled)
      if (waited[p] > longest) {
        longest = waited[p];
        chosen = p;
      }
    if (chosen == n)
      chosen = enabled[std::uniform_int_distribution<std::size_t>(
          0, enabled.size() - 1)(rng)];
    else
      ++out.forced;
    for (std::uint32_t p = 0; p < n; ++p) waited[p] = 0;
    for (auto p : enabled)
      if (p != chosen) waited[p] = waited[p] + 1;

    const Label label = sys.pc(chosen);
    sys.step(chosen);
    ++out.steps;
    const auto& acc = sys.last_accesses();
    bool bad = false;
    if (purity && invariants::breaks_local_purity(sys, chosen, acc)) {
      ++out.purity_violations;
      bad = true;
    }
    if (invariants::breaks_wait_locality(sys, chosen, label, acc)) {
      ++out.wait_locality_violations;
      bad = true;
    }
    if (invariants::processes_in_cs(sys) > 1) {
      ++out.mutex_violations;
      bad = true;
    }

    if (sys.pc(chosen) == Label::cs) {
      ++out.acquisitions[chosen];
      const int c = sys.class_of(chosen).id;
      bool any_past = false, any_announced = false;
      for (std::uint32_t q = 0; q < n; ++q) {
        if (sys.class_of(q).id == c) continue;
        any_past |= sys.pc(q) != Label::ncs;
        any_announced |= announced(sys.pc(q));
      }
      past.entry(c, any_past, out.max_streak_past_enter);
      ann.entry(c, any_announced, out.max_streak_announced);
      bad |= alock && ann.len > static_cast<std::uint64_t>(cfg.k_init_budget);
    }
    if (bad && !out.first_violation) out.first_violation = t;
    if (keep_trace) out.trace.steps.push_back(TraceStep{chosen, label, acc});
  }

  for (std::uint32_t p = 0; p < n; ++p)
    out.metrics.push_back(sys.memory().op_counts(sys.participant(p).proc));
  return out;
}

}  // namespace asymlock
