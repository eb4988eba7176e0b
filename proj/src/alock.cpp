#include "asymlock/alock.hpp"

#include <stdexcept>

namespace asymlock {

namespace {

NodeId checked_home(const Memory& mem, NodeId home, int k_init_budget) {
  if (k_init_budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (home.index >= mem.num_nodes()) throw std::out_of_range("unknown node");
  return home;
}

}  // namespace

ALock::ALock(Memory& mem, NodeId home, int k_init_budget, int initial_victim,
             SwapStep swap)
    : glock_(GlobalLock::create(mem, checked_home(mem, home, k_init_budget),
                                initial_victim)),
      cohorts_{CohortLock(ClassId{0}, Flavor::local, k_init_budget, glock_,
                          swap),
               CohortLock(ClassId{1}, Flavor::remote, k_init_budget, glock_,
                          swap)} {}

Participant ALock::attach(Memory& mem, ProcId p) const {
  return Participant{p, glock_.get_cid(p), alloc_descriptor(mem, p)};
}

StepResult ALock::step(Memory& mem, const Participant& who,
                       ProcessState& st) const {
  switch (st.pc) {
    case Label::ncs:
      st.pc = Label::enter;
      return StepResult::taken;
    case Label::enter:
      st.pc = Label::c1;
      return StepResult::taken;
    case Label::p2:
      if (st.passed) {
        st.pc = Label::cs;
      } else {
        st.ret = Label::cs;
        st.pc = Label::g1;
      }
      return StepResult::taken;
    case Label::cs:
      st.pc = Label::exit;
      return StepResult::taken;
    case Label::exit:
      st.pc = Label::rnext;
      return StepResult::taken;
    default:
      return cohorts_[who.cls.id].step(mem, who, st);
  }
}

void ALock::p_lock(Memory& mem, ProcessContext& ctx) const {
  ctx.state.pc = Label::enter;
  run_until(*this, mem, ctx.who, ctx.state, Label::cs);
}

void ALock::p_unlock(Memory& mem, ProcessContext& ctx) const {
  ctx.state.pc = Label::exit;
  run_until(*this, mem, ctx.who, ctx.state, Label::ncs);
}

void ALock::p_reacquire(Memory& mem, ProcessContext& ctx) const {
  glock_.p_reacquire(mem, ctx.who, ctx.state);
}

LockToken ALock::acquire(Memory& mem, ProcessContext& ctx) const {
  if (ctx.state.pc != Label::ncs)
    throw std::logic_error("acquire: process already inside the lock");
  p_lock(mem, ctx);
  return LockToken(this, ctx.who.proc.serial);
}

void ALock::release(Memory& mem, ProcessContext& ctx,
                    LockToken&& token) const {
  if (token.lock_ != this || token.proc_ != ctx.who.proc.serial ||
      ctx.state.pc != Label::cs)
    throw std::logic_error("release: token does not match a held lock");
  token.lock_ = nullptr;
  p_unlock(mem, ctx);
}

}  // namespace asymlock
