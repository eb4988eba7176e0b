#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "asymlock/checker.hpp"

namespace asymlock {

// A process left unscheduled for this many consecutive ticks while enabled
// is forced on the next tick.
inline constexpr std::uint64_t kFairnessWindow = 64;

struct RandomRun {
  Trace trace;  // steps are only kept when requested
  std::uint64_t steps = 0;
  std::vector<OpMetrics> metrics;          // per process
  std::vector<std::uint64_t> acquisitions;  // cs entries per process
  std::uint64_t mutex_violations = 0;       // states with two at cs
  std::uint64_t purity_violations = 0;      // remote accesses by class 0
                                            // (not tracked for naive-rcas)
  std::uint64_t wait_locality_violations = 0;
  std::uint64_t forced = 0;                 // ticks decided by the guard
  bool stuck = false;                       // no process could move
  // Step index of the first mutual-exclusion, purity or wait-locality
  // breach, or (alock) of the first announced streak above the budget.
  std::optional<std::uint64_t> first_violation;
  // Longest run of same-class cs entries, each made while some process of
  // the other class was
  //   past_enter: anywhere but ncs;
  //   announced:  in the global wait loop after writing the victim.
  std::uint64_t max_streak_past_enter = 0;
  std::uint64_t max_streak_announced = 0;
};

// Random scheduler: each tick runs a uniformly chosen enabled process step,
// except that the fairness guard forces the longest-waiting enabled process
// once it has waited more than kFairnessWindow ticks. With initial victim
// "both" the seed also picks the initial state. Deterministic in the seed.
RandomRun random_fair_run(const CheckConfig& cfg, std::uint64_t seed,
                          std::uint64_t max_steps, bool keep_trace = true);

}  // namespace asymlock
