#include "asymlock/mcs_cohort.hpp"

#include <stdexcept>
#include <string>

namespace asymlock {

namespace {

Descriptor descriptor_at(Word ref) {
  RegisterId b = ref.as_ref();
  return Descriptor{b, RegisterId{b.node, b.slot + 1}};
}

}  // namespace

std::string to_string(SwapStep s) {
  return s == SwapStep::atomic ? "atomic" : "per-attempt";
}

Descriptor alloc_descriptor(Memory& mem, ProcId owner) {
  Descriptor d;
  d.budget = mem.alloc_register(owner.node, Word::integer(-1));
  d.next = mem.alloc_register(owner.node, Word::null());
  if (d.next.slot != d.budget.slot + 1)
    throw std::logic_error("descriptor registers must be adjacent");
  return d;
}

CohortLock::CohortLock(ClassId cls, Flavor flavor, int k_init_budget,
                       GlobalLock glock, SwapStep swap)
    : cls_(cls), flavor_(flavor), k_init_budget_(k_init_budget),
      glock_(glock), swap_(swap) {
  if (k_init_budget < 1 || k_init_budget > 100)
    throw std::invalid_argument("budget must be in [1, 100]");
}

StepResult CohortLock::step(Memory& mem, const Participant& who,
                            ProcessState& st) const {
  const Port shared(mem, flavor_, who.proc);
  const Port own(mem, Flavor::local, who.proc);
  const Word me = Word::ref(who.desc.budget);
  const RegisterId tail = glock_.cohort_tail(cls_);

  switch (st.pc) {
    case Label::c1:
      own.write(who.desc.budget, Word::integer(-1));
      st.pred = Word::null();
      st.pc = Label::swap;
      return StepResult::taken;

    case Label::swap: {
      // RDMA has no swap; emulate it with a CAS loop, refreshing pred from
      // each failed attempt.
      bool started = false;
      for (;;) {
        Access a = shared.cas(tail, st.pred, me);
        if (a.blocked()) {
          if (!started) return StepResult::blocked;
          throw std::logic_error("enqueue CAS blocked mid-step");
        }
        started = true;
        if (a.status == AccessStatus::done) {
          if (a.value == st.pred) {
            st.pc = Label::cwait;
            return StepResult::taken;
          }
          st.pred = a.value;
        }
        if (swap_ == SwapStep::per_attempt) return StepResult::taken;
      }
    }

    case Label::cwait:
      st.pc = st.pred.is_null() ? Label::c8 : Label::c2;
      return StepResult::taken;

    case Label::c2:
      if (shared.write(descriptor_at(st.pred).next, me).blocked())
        return StepResult::blocked;
      st.pc = Label::c3;
      return StepResult::taken;

    case Label::c3: {
      Access a = own.read(who.desc.budget);
      if (a.blocked() || a.value.as_int() < 0) return StepResult::blocked;
      st.budget = static_cast<std::int8_t>(a.value.as_int());
      st.pc = Label::c4;
      return StepResult::taken;
    }

    case Label::c4:
      st.pc = st.budget == 0 ? Label::c5 : Label::c7;
      return StepResult::taken;

    case Label::c5:
      st.ret = Label::c6;
      st.pc = Label::g1;
      return StepResult::taken;

    case Label::c6:
    case Label::c8:
      own.write(who.desc.budget, Word::integer(k_init_budget_));
      st.budget = static_cast<std::int8_t>(k_init_budget_);
      st.pc = st.pc == Label::c6 ? Label::c7 : Label::c9;
      return StepResult::taken;

    case Label::c7:
      st.passed = true;
      st.pc = Label::c10;
      return StepResult::taken;

    case Label::c9:
      st.passed = false;
      st.pc = Label::c10;
      return StepResult::taken;

    case Label::c10:
      st.ret = Label::ncs;
      st.pred = Word::null();
      st.pc = Label::p2;
      return StepResult::taken;

    case Label::rnext: {
      Access a = own.read(who.desc.next);
      if (a.blocked()) return StepResult::blocked;
      st.next = a.value;
      st.pc = a.value.is_null() ? Label::cas : Label::r2;
      return StepResult::taken;
    }

    case Label::cas: {
      Access a = shared.cas(tail, me, Word::null());
      if (a.blocked()) return StepResult::blocked;
      if (a.status == AccessStatus::in_flight) return StepResult::taken;
      st.pc = a.value == me ? Label::r3 : Label::r1;
      return StepResult::taken;
    }

    case Label::r1: {
      Access a = own.read(who.desc.next);
      if (a.blocked() || a.value.is_null()) return StepResult::blocked;
      st.next = a.value;
      st.pc = Label::r2;
      return StepResult::taken;
    }

    case Label::r2:
      if (shared
              .write(descriptor_at(st.next).budget,
                     Word::integer(st.budget - 1))
              .blocked())
        return StepResult::blocked;
      st.pc = Label::r3;
      return StepResult::taken;

    case Label::r3:
      if (!st.next.is_null()) own.write(who.desc.next, Word::null());
      st = ProcessState{};
      return StepResult::taken;

    case Label::g1:
    case Label::gwait:
    case Label::g2:
    case Label::g3:
    case Label::g4:
      return glock_.step(mem, who, st);

    default:
      throw std::logic_error("cohort lock cannot step label " +
                             std::string(to_string(st.pc)));
  }
}

bool CohortLock::q_lock(Memory& mem, const Participant& who,
                        ProcessState& st) const {
  st.pc = Label::c1;
  run_until([&](ProcessState& s) { return step(mem, who, s); }, st,
            Label::p2);
  return !st.passed;
}

void CohortLock::q_unlock(Memory& mem, const Participant& who,
                          ProcessState& st) const {
  st.pc = Label::rnext;
  run_until([&](ProcessState& s) { return step(mem, who, s); }, st,
            Label::ncs);
}

bool CohortLock::q_is_locked(Memory& mem, ProcId caller) const {
  return glock_.q_is_locked(mem, caller, cls_);
}

}  // namespace asymlock
