#pragma once

#include <array>
#include <cstdint>

#include "asymlock/mcs_cohort.hpp"

namespace asymlock {

class ALock;

// One process's handle on a lock: who it is plus its program state. Drive a
// context from one thread at a time.
struct ProcessContext {
  Participant who;
  ProcessState state;
};

// Proof of possession returned by ALock::acquire and consumed by release.
class [[nodiscard]] LockToken {
 public:
  LockToken(LockToken&& o) noexcept : lock_(o.lock_), proc_(o.proc_) {
    o.lock_ = nullptr;
  }
  LockToken& operator=(LockToken&&) = delete;
  LockToken(const LockToken&) = delete;
  ~LockToken() = default;

  bool valid() const { return lock_ != nullptr; }

 private:
  friend class ALock;
  LockToken(const ALock* lock, std::uint32_t proc) : lock_(lock), proc_(proc) {}

  const ALock* lock_;
  std::uint32_t proc_;
};

// The asymmetric lock: a local-flavor and a remote-flavor budgeted MCS cohort
// lock embedded in a two-party Peterson lock, all homed on one node.
// Processes on the home node only ever issue local accesses; others go
// through the RNIC and spin only on their own descriptor while queued.
//
// Process body, as a step machine:
//   ncs   (may idle forever)
//   enter call cohort acquire (c1..c10)
//   p2    if not passed: call global acquire (g1..g4)
//   cs
//   exit  call cohort release (rnext..r3), back to ncs
class ALock final : public Protocol {
 public:
  ALock(Memory& mem, NodeId home, int k_init_budget, int initial_victim = 0,
        SwapStep swap = SwapStep::atomic);

  std::string_view name() const override { return "alock"; }
  Participant attach(Memory& mem, ProcId p) const override;
  StepResult step(Memory& mem, const Participant& who,
                  ProcessState& st) const override;

  NodeId home() const { return glock_.home(); }
  int k_init_budget() const { return cohorts_[0].k_init_budget(); }
  const GlobalLock& glock() const { return glock_; }
  const CohortLock& cohort(ClassId c) const { return cohorts_[c.id]; }

  ProcessContext make_context(Memory& mem, ProcId p) const {
    return ProcessContext{attach(mem, p), ProcessState{}};
  }

  // pLock / pUnlock / pReacquire, blocking.
  void p_lock(Memory& mem, ProcessContext& ctx) const;
  void p_unlock(Memory& mem, ProcessContext& ctx) const;
  void p_reacquire(Memory& mem, ProcessContext& ctx) const;

  // Same as p_lock/p_unlock, with misuse detection: acquire requires the
  // context to be idle, release requires the token this lock issued to the
  // same process. Both throw std::logic_error otherwise.
  LockToken acquire(Memory& mem, ProcessContext& ctx) const;
  void release(Memory& mem, ProcessContext& ctx, LockToken&& token) const;

 private:
  GlobalLock glock_;
  std::array<CohortLock, 2> cohorts_;
};

}  // namespace asymlock
