#include "asymlock/peterson_global.hpp"

#include <stdexcept>

namespace asymlock {

ClassId get_cid(ProcId p, NodeId home) {
  return ClassId{static_cast<std::uint8_t>(p.node == home ? 0 : 1)};
}

GlobalLock::GlobalLock(NodeId home, std::array<RegisterId, 2> cohort_tails,
                       RegisterId victim)
    : home_(home), tails_(cohort_tails), victim_(victim) {
  for (auto r : tails_)
    if (r.node != home_) throw std::invalid_argument("tail off home node");
  if (victim_.node != home_) throw std::invalid_argument("victim off home node");
}

GlobalLock GlobalLock::create(Memory& mem, NodeId home, int initial_victim) {
  if (initial_victim != 0 && initial_victim != 1)
    throw std::invalid_argument("victim must be 0 or 1");
  auto t0 = mem.alloc_register(home, Word::null());
  auto t1 = mem.alloc_register(home, Word::null());
  auto v = mem.alloc_register(home, Word::integer(initial_victim));
  return GlobalLock(home, {t0, t1}, v);
}

StepResult GlobalLock::step(Memory& mem, const Participant& who,
                            ProcessState& st) const {
  const Port port(mem, flavor_of(who.cls), who.proc);
  const Word me = Word::integer(who.cls.id);
  switch (st.pc) {
    case Label::g1: {
      if (port.write(victim_, me).blocked()) return StepResult::blocked;
      st.pc = Label::gwait;
      return StepResult::taken;
    }
    case Label::gwait:
      st.pc = Label::g2;
      return StepResult::taken;
    case Label::g2: {
      Access a = port.read(tails_[who.cls.other().id]);
      if (a.blocked()) return StepResult::blocked;
      st.pc = a.value.is_null() ? Label::g4 : Label::g3;
      return StepResult::taken;
    }
    case Label::g3: {
      Access a = port.read(victim_);
      if (a.blocked()) return StepResult::blocked;
      st.pc = a.value != me ? Label::g4 : Label::gwait;
      return StepResult::taken;
    }
    case Label::g4:
      st.pc = st.ret;
      return StepResult::taken;
    default:
      throw std::logic_error("global lock cannot step label " +
                             std::string(to_string(st.pc)));
  }
}

bool GlobalLock::q_is_locked(Memory& mem, ProcId caller, ClassId c) const {
  const Port port(mem, flavor_of(get_cid(caller)), caller);
  SpinWait spin;
  for (;;) {
    Access a = port.read(tails_[c.id]);
    if (!a.blocked()) return !a.value.is_null();
    spin.pause();
  }
}

void GlobalLock::p_reacquire(Memory& mem, const Participant& who,
                             ProcessState& st) const {
  const Label resume = st.pc;
  st.ret = resume;
  st.pc = Label::g1;
  run_until([&](ProcessState& s) { return step(mem, who, s); }, st, resume);
}

}  // namespace asymlock
