#include "asymlock/baselines.hpp"

#include <stdexcept>
#include <string>

namespace asymlock {

namespace {

[[noreturn]] void bad_label(std::string_view lock, Label l) {
  throw std::logic_error(std::string(lock) + " cannot step label " +
                         std::string(to_string(l)));
}

}  // namespace

FlagLock::FlagLock(Memory& mem, NodeId home, Mode mode)
    : home_(home), mode_(mode),
      flag_(mem.alloc_register(home, Word::integer(0))) {}

Participant FlagLock::attach(Memory&, ProcId p) const {
  return Participant{p, get_cid(p, home_), Descriptor{}};
}

StepResult FlagLock::step(Memory& mem, const Participant& who,
                          ProcessState& st) const {
  const Port port(mem,
                  mode_ == Mode::naive_rcas ? Flavor::remote
                                            : flavor_of(who.cls),
                  who.proc);
  switch (st.pc) {
    case Label::ncs:
      st.pc = Label::enter;
      return StepResult::taken;
    case Label::enter:
      st.pc = Label::tas;
      return StepResult::taken;
    case Label::tas: {
      Access a = port.cas(flag_, Word::integer(0), Word::integer(1));
      if (a.blocked()) return StepResult::blocked;
      if (a.done() && a.value == Word::integer(0)) st.pc = Label::cs;
      return StepResult::taken;
    }
    case Label::cs:
      st.pc = Label::exit;
      return StepResult::taken;
    case Label::exit:
      st.pc = Label::rel;
      return StepResult::taken;
    case Label::rel:
      if (port.write(flag_, Word::integer(0)).blocked())
        return StepResult::blocked;
      st.pc = Label::ncs;
      return StepResult::taken;
    default:
      bad_label(name(), st.pc);
  }
}

Peterson2Lock::Peterson2Lock(Memory& mem, NodeId home, int initial_victim)
    : glock_(GlobalLock::create(mem, home, initial_victim)) {}

Participant Peterson2Lock::attach(Memory&, ProcId p) const {
  return Participant{p, glock_.get_cid(p), Descriptor{}};
}

StepResult Peterson2Lock::step(Memory& mem, const Participant& who,
                               ProcessState& st) const {
  const Port port(mem, flavor_of(who.cls), who.proc);
  const RegisterId mine = glock_.cohort_tail(who.cls);
  switch (st.pc) {
    case Label::ncs:
      st.pc = Label::enter;
      return StepResult::taken;
    case Label::enter:
      st.pc = Label::pset;
      return StepResult::taken;
    case Label::pset:
      if (port.write(mine, Word::integer(1)).blocked())
        return StepResult::blocked;
      st.ret = Label::cs;
      st.pc = Label::g1;
      return StepResult::taken;
    case Label::g1:
    case Label::gwait:
    case Label::g2:
    case Label::g3:
    case Label::g4:
      return glock_.step(mem, who, st);
    case Label::cs:
      st.pc = Label::exit;
      return StepResult::taken;
    case Label::exit:
      st.pc = Label::pclr;
      return StepResult::taken;
    case Label::pclr:
      if (port.write(mine, Word::null()).blocked()) return StepResult::blocked;
      st = ProcessState{};
      return StepResult::taken;
    default:
      bad_label(name(), st.pc);
  }
}

}  // namespace asymlock
