#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "asymlock/memory.hpp"

namespace asymlock {

// Program labels. Each step of a process executes the code at its current
// label and performs at most one memory access.
//
// Process body:    ncs -> enter -> (cohort acquire) -> p2 -> cs -> exit
// Cohort acquire:  c1 swap cwait c2 c3 c4 c5 c6 c7 c8 c9 c10
// Cohort release:  rnext cas r1 r2 r3
// Global (Peterson) acquire: g1 gwait g2 g3 g4
// Baselines:       tas rel (flag spinlocks), pset pclr (two-party Peterson)
enum class Label : std::uint8_t {
  ncs, enter, p2, cs, exit,
  g1, gwait, g2, g3, g4,
  c1, swap, cwait, c2, c3, c4, c5, c6, c7, c8, c9, c10,
  rnext, cas, r1, r2, r3,
  tas, rel, pset, pclr,
};

inline constexpr int kNumLabels = static_cast<int>(Label::pclr) + 1;

std::string_view to_string(Label l);
std::optional<Label> label_from_string(std::string_view s);

// Process class: 0 for processes on the lock's home node, 1 otherwise.
struct ClassId {
  std::uint8_t id = 0;
  ClassId other() const { return ClassId{static_cast<std::uint8_t>(1 - id)}; }
  friend constexpr bool operator==(ClassId, ClassId) = default;
};

// Per-acquisition MCS record, resident in the owner's partition. The
// descriptor is referenced by Word::ref(budget); `next` is the following slot.
struct Descriptor {
  RegisterId budget;
  RegisterId next;
};

// What a lock needs to know about one process.
struct Participant {
  ProcId proc;
  ClassId cls;
  Descriptor desc;
};

// Program counter plus process-local variables.
struct ProcessState {
  Label pc = Label::ncs;
  Label ret = Label::ncs;  // return label of the global-acquire procedure
  bool passed = false;     // cohort lock was handed over by a predecessor
  std::int8_t budget = 0;  // own budget as last read or written
  Word pred;               // expected tail value in the swap loop
  Word next;               // successor's descriptor, once known

  friend bool operator==(const ProcessState&, const ProcessState&) = default;
};

enum class StepResult : std::uint8_t { taken, blocked };

// A lock expressed as a per-process step machine. The same machine is driven
// by the checker (one step at a time) and by threads (run to a target label).
class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual std::string_view name() const = 0;
  // Allocates whatever per-process registers the lock needs.
  virtual Participant attach(Memory& mem, ProcId p) const = 0;
  virtual StepResult step(Memory& mem, const Participant& who,
                          ProcessState& st) const = 0;
};

// Backoff for spin loops: busy for a few rounds, then yields the CPU.
class SpinWait {
 public:
  void pause();

 private:
  std::uint32_t rounds_ = 0;
};

// Steps `st` (at least once) until its pc equals `target`. Blocked steps,
// retries that stay at their label, and Peterson wait-loop iterations back
// off through SpinWait.
template <class StepFn>
void run_until(StepFn&& step, ProcessState& st, Label target) {
  SpinWait spin;
  do {
    const Label before = st.pc;
    if (step(st) == StepResult::blocked || st.pc == before ||
        st.pc == Label::gwait)
      spin.pause();
  } while (st.pc != target);
}

inline void run_until(const Protocol& proto, Memory& mem,
                      const Participant& who, ProcessState& st, Label target) {
  run_until([&](ProcessState& s) { return proto.step(mem, who, s); }, st,
            target);
}

enum class Flavor : std::uint8_t { local, remote };

// The view of memory one process has through one flavor of access: local
// loads/stores/CAS, or their RNIC counterparts.
class Port {
 public:
  Port(Memory& mem, Flavor flavor, ProcId p)
      : mem_(mem), flavor_(flavor), p_(p) {}

  Access read(RegisterId r) const {
    return flavor_ == Flavor::local ? mem_.read(p_, r) : mem_.r_read(p_, r);
  }
  Access write(RegisterId r, Word v) const {
    return flavor_ == Flavor::local ? mem_.write(p_, r, v)
                                    : mem_.r_write(p_, r, v);
  }
  Access cas(RegisterId r, Word expected, Word swap) const {
    return flavor_ == Flavor::local ? mem_.cas(p_, r, expected, swap)
                                    : mem_.r_cas(p_, r, expected, swap);
  }

 private:
  Memory& mem_;
  Flavor flavor_;
  ProcId p_;
};

}  // namespace asymlock
