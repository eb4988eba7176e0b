#pragma once

#include <array>

#include "asymlock/protocol.hpp"

namespace asymlock {

// 0 iff `p` runs on the lock's home node.
ClassId get_cid(ProcId p, NodeId home);

// Class 0 reaches the lock's registers with local accesses, class 1 through
// the RNIC.
inline Flavor flavor_of(ClassId c) {
  return c.id == 0 ? Flavor::local : Flavor::remote;
}

// Two-party Peterson lock between the local-class and remote-class leaders.
// A class "wants in" exactly when its cohort tail is non-null, so the cohort
// tails double as Peterson's interest flags. All three registers live on the
// home node. This is a value type: the state itself lives in Memory.
class GlobalLock {
 public:
  GlobalLock(NodeId home, std::array<RegisterId, 2> cohort_tails,
             RegisterId victim);

  // Allocates both (null) cohort tails and the victim register on `home`.
  static GlobalLock create(Memory& mem, NodeId home, int initial_victim);

  NodeId home() const { return home_; }
  RegisterId cohort_tail(ClassId c) const { return tails_[c.id]; }
  RegisterId victim() const { return victim_; }
  ClassId get_cid(ProcId p) const { return asymlock::get_cid(p, home_); }

  // One step of the global-acquire procedure (labels g1..g4). On g4 the
  // process jumps to `st.ret`.
  //   g1:    victim := id
  //   gwait: loop head
  //   g2:    if cohort[other] is empty, goto g4
  //   g3:    if victim != id, goto g4; else goto gwait
  StepResult step(Memory& mem, const Participant& who,
                  ProcessState& st) const;

  // qIsLocked for cohort `c`, read with the caller's own flavor.
  bool q_is_locked(Memory& mem, ProcId caller, ClassId c) const;

  // Blocking pReacquire: the caller's class must hold the lock. Sets the
  // caller as victim (yielding to a waiting leader of the other class) and
  // returns once the lock is held again, at the caller's current label.
  void p_reacquire(Memory& mem, const Participant& who,
                   ProcessState& st) const;

 private:
  NodeId home_;
  std::array<RegisterId, 2> tails_;
  RegisterId victim_;
};

}  // namespace asymlock
