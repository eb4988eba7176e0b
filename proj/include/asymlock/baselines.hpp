#pragma once

#include "asymlock/peterson_global.hpp"

namespace asymlock {

// Test-and-set spinlock on one flag register at the home node:
//   enter -> tas: CAS(flag, 0 -> 1) until it succeeds -> cs -> exit
//   -> rel: flag := 0
// naive_rcas: every process, local ones included, goes through the RNIC
// (loopback). mixed_cas: home-node processes use local CAS, others rCAS;
// unsafe once local and remote RMWs stop being mutually atomic.
class FlagLock final : public Protocol {
 public:
  enum class Mode { naive_rcas, mixed_cas };

  FlagLock(Memory& mem, NodeId home, Mode mode);

  std::string_view name() const override {
    return mode_ == Mode::naive_rcas ? "naive-rcas" : "mixed-cas";
  }
  Participant attach(Memory& mem, ProcId p) const override;
  StepResult step(Memory& mem, const Participant& who,
                  ProcessState& st) const override;

  RegisterId flag() const { return flag_; }

 private:
  NodeId home_;
  Mode mode_;
  RegisterId flag_;
};

// Plain two-process Peterson lock through the modified global lock: each
// class has a single member whose cohort slot is just an interest flag.
//   enter -> pset: cohort[id] := 1 -> g1..g4 -> cs -> exit
//   -> pclr: cohort[id] := null
class Peterson2Lock final : public Protocol {
 public:
  Peterson2Lock(Memory& mem, NodeId home, int initial_victim = 0);

  std::string_view name() const override { return "peterson2"; }
  Participant attach(Memory& mem, ProcId p) const override;
  StepResult step(Memory& mem, const Participant& who,
                  ProcessState& st) const override;

  const GlobalLock& glock() const { return glock_; }

 private:
  GlobalLock glock_;
};

}  // namespace asymlock
