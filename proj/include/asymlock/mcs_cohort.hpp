#pragma once

#include <cstdint>
#include <string>

#include "asymlock/peterson_global.hpp"

namespace asymlock {

// Granularity of the enqueue CAS loop in stepwise mode. `atomic` runs the
// whole loop as one step, like an atomic swap; `per_attempt` makes every CAS
// attempt its own step, so other processes can slip in between attempts.
// Threads execute the same accesses either way.
enum class SwapStep : std::uint8_t { atomic, per_attempt };

std::string to_string(SwapStep s);

// Allocates a process's MCS descriptor {budget = -1, next = null} in its own
// partition, so that waiting for the lock spins on local memory.
Descriptor alloc_descriptor(Memory& mem, ProcId owner);

// Budgeted MCS queue lock used as a cohort lock. The remote flavor reaches
// the tail and other processes' descriptors through the RNIC; the local
// flavor is the same algorithm with every remote access made local. A process
// always touches its own descriptor with local accesses.
//
// Each process reuses one descriptor; c1 re-arms it and r3 clears its link.
//
// Acquire labels:
//   c1    desc.budget := -1; pred := null
//   swap  CAS(tail, pred -> &desc); on failure pred := observed, retry
//         (all attempts in one step under SwapStep::atomic)
//   cwait if pred == null goto c8
//   c2    pred.next := &desc
//   c3    await desc.budget >= 0                     (local spin)
//   c4    if budget != 0 goto c7
//   c5    call global acquire, returning to c6       (pReacquire)
//   c6    desc.budget := kInitBudget
//   c7    passed := true; goto c10
//   c8    desc.budget := kInitBudget
//   c9    passed := false
//   c10   return (to p2)
// Release labels:
//   rnext read desc.next; if non-null goto r2
//   cas   CAS(tail, &desc -> null); success goto r3
//   r1    await desc.next != null                    (local spin)
//   r2    desc.next.budget := budget - 1             (pass the lock)
//   r3    desc.next := null; return (to ncs)
class CohortLock {
 public:
  CohortLock(ClassId cls, Flavor flavor, int k_init_budget, GlobalLock glock,
             SwapStep swap = SwapStep::atomic);

  ClassId cls() const { return cls_; }
  Flavor flavor() const { return flavor_; }
  int k_init_budget() const { return k_init_budget_; }
  SwapStep swap_step() const { return swap_; }
  RegisterId tail() const { return glock_.cohort_tail(cls_); }
  const GlobalLock& glock() const { return glock_; }

  // One step at a cohort label; global-acquire labels (entered from c5) are
  // forwarded to the global lock.
  StepResult step(Memory& mem, const Participant& who,
                  ProcessState& st) const;

  // Blocking qLock. Returns true iff the queue was empty (the caller leads
  // its cohort and must still win the global lock); false iff the lock was
  // handed over. A handed-over budget of 0 runs pReacquire before returning.
  bool q_lock(Memory& mem, const Participant& who, ProcessState& st) const;
  // Blocking qUnlock; the caller must hold the cohort lock.
  void q_unlock(Memory& mem, const Participant& who, ProcessState& st) const;
  // True iff the tail is non-null, read with the caller's flavor.
  bool q_is_locked(Memory& mem, ProcId caller) const;

 private:
  ClassId cls_;
  Flavor flavor_;
  int k_init_budget_;
  GlobalLock glock_;
  SwapStep swap_;
};

}  // namespace asymlock
