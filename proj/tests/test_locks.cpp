#include <gtest/gtest.h>

#include <thread>
#include <vector>

#include "asymlock/alock.hpp"

using namespace asymlock;

namespace {

// Home node 0 hosts L; A and B are remote, on nodes 1 and 2.
struct Rig {
  Memory mem;
  ALock lock;
  ProcessContext L, A, B;

  explicit Rig(int budget, Backend backend = Backend::seq_cst)
      : mem(3, backend),
        lock(mem, NodeId{0}, budget),
        L(lock.make_context(mem, mem.add_process(NodeId{0}))),
        A(lock.make_context(mem, mem.add_process(NodeId{1}))),
        B(lock.make_context(mem, mem.add_process(NodeId{2}))) {}

  OpMetrics ops(const ProcessContext& c) const {
    return mem.op_counts(c.who.proc);
  }
  const CohortLock& remote_cohort() const { return lock.cohort(ClassId{1}); }

  // Steps `c` until it reaches `target`; false if that takes too long.
  bool step_to(ProcessContext& c, Label target, int limit = 200) {
    for (int i = 0; i < limit; ++i) {
      lock.step(mem, c.who, c.state);
      if (c.state.pc == target) return true;
    }
    return false;
  }
  // One step; true iff it was taken.
  bool step(ProcessContext& c) {
    return lock.step(mem, c.who, c.state) == StepResult::taken;
  }
};

}  // namespace

TEST(GetCid, ByNode) {
  Memory mem(3);
  auto a = mem.add_process(NodeId{0});
  auto b = mem.add_process(NodeId{1});
  auto c = mem.add_process(NodeId{1});
  EXPECT_EQ(get_cid(a, NodeId{0}).id, 0);
  EXPECT_EQ(get_cid(b, NodeId{0}).id, 1);
  EXPECT_EQ(get_cid(b, NodeId{0}), get_cid(c, NodeId{0}));
  EXPECT_EQ(get_cid(b, NodeId{1}).id, 0);
}

TEST(ALockConstruct, Budget) {
  Memory mem(2);
  ALock lock(mem, NodeId{0}, 5);
  EXPECT_EQ(lock.cohort(ClassId{0}).k_init_budget(), 5);
  EXPECT_EQ(lock.cohort(ClassId{1}).k_init_budget(), 5);
  EXPECT_EQ(lock.cohort(ClassId{0}).flavor(), Flavor::local);
  EXPECT_EQ(lock.cohort(ClassId{1}).flavor(), Flavor::remote);
  auto p = mem.add_process(NodeId{0});
  EXPECT_FALSE(lock.cohort(ClassId{0}).q_is_locked(mem, p));
  EXPECT_FALSE(lock.cohort(ClassId{1}).q_is_locked(mem, p));
  EXPECT_EQ(lock.glock().victim().node, NodeId{0});
  EXPECT_EQ(lock.glock().cohort_tail(ClassId{1}).node, NodeId{0});

  EXPECT_THROW(ALock(mem, NodeId{0}, 0), std::invalid_argument);
  EXPECT_THROW(ALock(mem, NodeId{0}, -3), std::invalid_argument);
  EXPECT_THROW(ALock(mem, NodeId{7}, 1), std::out_of_range);
}

TEST(Descriptor, LivesWithOwner) {
  Rig r(1);
  EXPECT_EQ(r.A.who.desc.budget.node, NodeId{1});
  EXPECT_EQ(r.A.who.desc.next.node, NodeId{1});
  EXPECT_EQ(r.mem.peek(r.A.who.desc.budget), Word::integer(-1));
  EXPECT_TRUE(r.mem.peek(r.A.who.desc.next).is_null());
}

TEST(QLock, UncontendedSingleRemoteCas) {
  Rig r(2);
  EXPECT_TRUE(r.remote_cohort().q_lock(r.mem, r.A.who, r.A.state));
  const OpMetrics m = r.ops(r.A);
  EXPECT_EQ(m.remote_cas, 1u);
  EXPECT_EQ(m.remote_cas_successes, 1u);
  EXPECT_EQ(m.remote_writes, 0u);
  EXPECT_EQ(m.remote_reads, 0u);
  EXPECT_EQ(r.mem.peek(r.remote_cohort().tail()),
            Word::ref(r.A.who.desc.budget));
  EXPECT_TRUE(r.remote_cohort().q_is_locked(r.mem, r.B.who.proc));
}

TEST(QLock, EnqueueBehindHolderOneRemoteWrite) {
  Rig r(2);
  ASSERT_TRUE(r.remote_cohort().q_lock(r.mem, r.A.who, r.A.state));
  r.B.state.pc = Label::c1;
  ASSERT_TRUE(r.step_to(r.B, Label::c3));
  EXPECT_FALSE(r.step(r.B));  // spins on its own budget
  const OpMetrics m = r.ops(r.B);
  EXPECT_EQ(m.remote_writes, 1u);
  // The loop starts by expecting an empty tail; that first attempt is stale.
  EXPECT_EQ(m.remote_cas, 2u);
  EXPECT_EQ(m.remote_cas_successes, 1u);
  EXPECT_EQ(m.remote_reads, 0u);
  EXPECT_EQ(r.mem.peek(r.A.who.desc.next), Word::ref(r.B.who.desc.budget));
}

TEST(QUnlock, SoleHolderSingleRemoteCas) {
  Rig r(1);
  ASSERT_TRUE(r.remote_cohort().q_lock(r.mem, r.A.who, r.A.state));
  r.mem.reset_counts();
  r.remote_cohort().q_unlock(r.mem, r.A.who, r.A.state);
  const OpMetrics m = r.ops(r.A);
  EXPECT_EQ(m.remote_cas, 1u);
  EXPECT_EQ(m.remote_writes, 0u);
  EXPECT_TRUE(r.mem.peek(r.remote_cohort().tail()).is_null());
  EXPECT_FALSE(r.remote_cohort().q_is_locked(r.mem, r.A.who.proc));
}

TEST(QUnlock, WorstCaseCasThenWrite) {
  Rig r(3);
  ASSERT_TRUE(r.remote_cohort().q_lock(r.mem, r.A.who, r.A.state));
  // B swaps itself into the tail but has not linked yet.
  r.B.state.pc = Label::c1;
  ASSERT_TRUE(r.step_to(r.B, Label::c2));
  r.mem.reset_counts();

  r.A.state.pc = Label::rnext;
  ASSERT_TRUE(r.step_to(r.A, Label::r1));
  EXPECT_FALSE(r.step(r.A));  // waits for the link
  ASSERT_TRUE(r.step(r.B));   // c2: link
  ASSERT_TRUE(r.step_to(r.A, Label::ncs));
  const OpMetrics m = r.ops(r.A);
  EXPECT_EQ(m.remote_cas, 1u);
  EXPECT_EQ(m.remote_cas_successes, 0u);
  EXPECT_EQ(m.remote_writes, 1u);
  EXPECT_EQ(r.mem.peek(r.B.who.desc.budget), Word::integer(2));
  EXPECT_TRUE(r.mem.peek(r.A.who.desc.next).is_null());
}

TEST(QUnlock, LinkedWaiterSingleRemoteWrite) {
  Rig r(3);
  ASSERT_TRUE(r.remote_cohort().q_lock(r.mem, r.A.who, r.A.state));
  r.B.state.pc = Label::c1;
  ASSERT_TRUE(r.step_to(r.B, Label::c3));
  r.mem.reset_counts();
  r.remote_cohort().q_unlock(r.mem, r.A.who, r.A.state);
  const OpMetrics m = r.ops(r.A);
  EXPECT_EQ(m.remote_cas, 0u);
  EXPECT_EQ(m.remote_writes, 1u);
}

TEST(QLock, PassedBudgetCountsDown) {
  Rig r(3);
  ASSERT_TRUE(r.remote_cohort().q_lock(r.mem, r.A.who, r.A.state));
  r.B.state.pc = Label::c1;
  ASSERT_TRUE(r.step_to(r.B, Label::c3));
  r.remote_cohort().q_unlock(r.mem, r.A.who, r.A.state);
  ASSERT_TRUE(r.step_to(r.B, Label::p2));
  EXPECT_TRUE(r.B.state.passed);
  EXPECT_EQ(r.B.state.budget, 2);
}

TEST(QLock, BudgetZeroReacquires) {
  Rig r(1);
  std::vector<AccessRecord> journal;
  r.mem.set_journal(&journal);
  r.lock.p_lock(r.mem, r.A);
  r.B.state.pc = Label::enter;
  ASSERT_TRUE(r.step_to(r.B, Label::c3));
  r.lock.p_unlock(r.mem, r.A);
  EXPECT_EQ(r.mem.peek(r.B.who.desc.budget), Word::integer(0));
  journal.clear();
  run_until(r.lock, r.mem, r.B.who, r.B.state, Label::cs);
  EXPECT_EQ(r.B.state.pc, Label::cs);
  EXPECT_TRUE(r.B.state.passed);
  EXPECT_EQ(r.mem.peek(r.B.who.desc.budget), Word::integer(1));
  bool wrote_victim = false;
  for (const auto& a : journal)
    wrote_victim |= a.reg == r.lock.glock().victim() && a.op == OpKind::write;
  EXPECT_TRUE(wrote_victim);
}

TEST(QLock, BudgetZeroYieldsToWaitingLeader) {
  Rig r(1);
  r.lock.p_lock(r.mem, r.A);
  // L leads the local cohort and spins in the global wait loop.
  r.L.state.pc = Label::enter;
  ASSERT_TRUE(r.step_to(r.L, Label::gwait));
  ASSERT_TRUE(r.step_to(r.L, Label::gwait));
  // B queues behind A and is handed budget 0.
  r.B.state.pc = Label::enter;
  ASSERT_TRUE(r.step_to(r.B, Label::c3));
  r.lock.p_unlock(r.mem, r.A);
  ASSERT_TRUE(r.step_to(r.B, Label::gwait));
  EXPECT_EQ(r.mem.peek(r.lock.glock().victim()), Word::integer(1));
  // L now gets through; B keeps looping until L leaves.
  ASSERT_TRUE(r.step_to(r.L, Label::cs));
  for (int i = 0; i < 50; ++i) {
    r.step(r.B);
    ASSERT_NE(r.B.state.pc, Label::cs);
  }
  r.lock.p_unlock(r.mem, r.L);
  ASSERT_TRUE(r.step_to(r.B, Label::cs));
  EXPECT_TRUE(r.B.state.passed);
}

TEST(PLock, UncontendedRemoteCycle) {
  Rig r(2);
  r.lock.p_lock(r.mem, r.A);
  EXPECT_EQ(r.A.state.pc, Label::cs);
  OpMetrics m = r.ops(r.A);
  EXPECT_EQ(m.remote_cas, 1u);
  EXPECT_EQ(m.remote_writes, 1u);  // victim
  EXPECT_EQ(m.remote_reads, 1u);   // other cohort empty: one condition read
  r.mem.reset_counts();
  r.lock.p_unlock(r.mem, r.A);
  m = r.ops(r.A);
  EXPECT_EQ(m.remote_cas, 1u);
  EXPECT_EQ(m.remote_total(), 1u);
  EXPECT_TRUE(r.mem.peek(r.lock.glock().cohort_tail(ClassId{0})).is_null());
  EXPECT_TRUE(r.mem.peek(r.lock.glock().cohort_tail(ClassId{1})).is_null());
}

TEST(PLock, PassedLockSkipsVictim) {
  Rig r(2);
  std::vector<AccessRecord> journal;
  r.mem.set_journal(&journal);
  r.lock.p_lock(r.mem, r.A);
  r.B.state.pc = Label::enter;
  ASSERT_TRUE(r.step_to(r.B, Label::c3));
  r.lock.p_unlock(r.mem, r.A);
  journal.clear();
  run_until(r.lock, r.mem, r.B.who, r.B.state, Label::cs);
  for (const auto& a : journal) EXPECT_NE(a.reg, r.lock.glock().victim());
}

TEST(PLock, OneLeaderPerClassOnlyOneEnters) {
  // Every interleaving of the two leaders' global-acquire steps.
  for (int bits = 0; bits < (1 << 12); ++bits) {
    Rig r(1);
    r.L.state.pc = Label::enter;
    r.A.state.pc = Label::enter;
    ASSERT_TRUE(r.step_to(r.L, Label::g1));
    ASSERT_TRUE(r.step_to(r.A, Label::g1));
    int last_writer = -1;
    for (int i = 0; i < 12; ++i) {
      ProcessContext& c = (bits >> i) & 1 ? r.A : r.L;
      if (c.state.pc == Label::cs) continue;
      const bool writes = c.state.pc == Label::g1;
      if (r.step(c) && writes) last_writer = &c == &r.A ? 1 : 0;
    }
    const bool l_in = r.L.state.pc == Label::cs;
    const bool a_in = r.A.state.pc == Label::cs;
    ASSERT_FALSE(l_in && a_in);
    if (l_in || a_in) {
      // The winner is never the one that wrote the victim last, unless the
      // other had not written it yet.
      const int winner = a_in ? 1 : 0;
      const ProcessContext& loser = winner == 1 ? r.L : r.A;
      if (loser.state.pc != Label::g1) ASSERT_NE(winner, last_writer);
    }
  }
}

TEST(PReacquire, NoOppositeWaiter) {
  Rig r(2);
  r.lock.p_lock(r.mem, r.L);
  r.mem.reset_counts();
  r.lock.p_reacquire(r.mem, r.L);
  EXPECT_EQ(r.L.state.pc, Label::cs);
  const OpMetrics m = r.ops(r.L);
  EXPECT_EQ(m.local_writes, 1u);
  EXPECT_EQ(m.local_reads, 1u);
  EXPECT_EQ(m.remote_total(), 0u);
  EXPECT_EQ(r.mem.peek(r.lock.glock().victim()), Word::integer(0));
}

TEST(ALockApi, LocalCyclesStayLocal) {
  Rig r(2);
  for (int i = 0; i < 1000; ++i) {
    LockToken t = r.lock.acquire(r.mem, r.L);
    r.lock.release(r.mem, r.L, std::move(t));
  }
  const OpMetrics m = r.ops(r.L);
  EXPECT_EQ(m.remote_total(), 0u);
  EXPECT_GT(m.local_total(), 0u);
}

TEST(ALockApi, TokenMisuse) {
  Rig r(2);
  Memory other_mem(1);
  ALock other(other_mem, NodeId{0}, 2);

  LockToken t = r.lock.acquire(r.mem, r.A);
  EXPECT_TRUE(t.valid());
  EXPECT_THROW((void)r.lock.acquire(r.mem, r.A), std::logic_error);
  EXPECT_THROW(r.lock.release(r.mem, r.B, std::move(t)), std::logic_error);
  EXPECT_THROW(other.release(r.mem, r.A, std::move(t)), std::logic_error);
  r.lock.release(r.mem, r.A, std::move(t));
  EXPECT_FALSE(t.valid());
  EXPECT_THROW(r.lock.release(r.mem, r.A, std::move(t)), std::logic_error);
}

TEST(ALockApi, ThreadsSingleOccupancy) {
  Memory mem(3);
  ALock lock(mem, NodeId{0}, 2);
  std::vector<ProcessContext> ctx;
  for (std::uint16_t node : {0, 0, 1, 2})
    ctx.push_back(lock.make_context(mem, mem.add_process(NodeId{node})));
  int inside = 0, overlaps = 0;
  long counter = 0;
  constexpr int kCycles = 2000;
  std::vector<std::thread> ts;
  for (auto& c : ctx)
    ts.emplace_back([&, pc = &c] {
      for (int i = 0; i < kCycles; ++i) {
        LockToken t = lock.acquire(mem, *pc);
        if (++inside != 1) ++overlaps;
        ++counter;
        --inside;
        lock.release(mem, *pc, std::move(t));
      }
    });
  for (auto& t : ts) t.join();
  EXPECT_EQ(overlaps, 0);
  EXPECT_EQ(counter, 4L * kCycles);
  EXPECT_EQ(mem.op_counts(ctx[0].who.proc).remote_total(), 0u);
  EXPECT_EQ(mem.op_counts(ctx[1].who.proc).remote_total(), 0u);
}
