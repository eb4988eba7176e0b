#include <gtest/gtest.h>

#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "asymlock/memory.hpp"

using namespace asymlock;

namespace {

Word I(std::int64_t v) { return Word::integer(v); }

struct Fixture {
  Memory mem;
  ProcId local, remote;
  RegisterId r;

  explicit Fixture(Backend b, Word init = I(0)) : mem(2, b) {
    local = mem.add_process(NodeId{0});
    remote = mem.add_process(NodeId{1});
    r = mem.alloc_register(NodeId{0}, init);
  }
};

}  // namespace

TEST(Memory, AllocRegister) {
  Memory mem(2);
  auto a = mem.alloc_register(NodeId{0}, Word::null());
  auto b = mem.alloc_register(NodeId{1}, I(0));
  auto c = mem.alloc_register(NodeId{0}, Word::null());
  EXPECT_TRUE(mem.peek(a).is_null());
  EXPECT_EQ(b.node, NodeId{1});
  EXPECT_EQ(mem.peek(b), I(0));
  EXPECT_EQ(a.node, c.node);
  EXPECT_NE(a.slot, c.slot);
  EXPECT_THROW(mem.alloc_register(NodeId{2}, I(0)), std::out_of_range);
}

TEST(Memory, WordKindsAreDistinct) {
  Memory mem(1);
  auto r = mem.alloc_register(NodeId{0}, Word::null());
  EXPECT_NE(Word::null(), I(0));
  EXPECT_NE(Word::ref(r), I(static_cast<std::int64_t>(r.slot)));
  EXPECT_EQ(Word::ref(r).as_ref(), r);
  EXPECT_EQ(I(-1).as_int(), -1);
  EXPECT_EQ(to_string(I(-1)), "-1");
  EXPECT_EQ(to_string(Word::null()), "null");
}

TEST(Memory, LocalCas) {
  for (auto b : {Backend::seq_cst, Backend::hazard}) {
    Fixture f(b, I(5));
    auto a = f.mem.cas(f.local, f.r, I(5), I(7));
    ASSERT_TRUE(a.done());
    EXPECT_EQ(a.value, I(5));
    EXPECT_EQ(f.mem.peek(f.r), I(7));

    f.mem.poke(f.r, I(5));
    a = f.mem.cas(f.local, f.r, I(3), I(7));
    EXPECT_EQ(a.value, I(5));
    EXPECT_EQ(f.mem.peek(f.r), I(5));

    f.mem.write(f.local, f.r, I(9));
    EXPECT_EQ(f.mem.read(f.local, f.r).value, I(9));
  }
}

TEST(Memory, LocalAccessOffNodeThrows) {
  Fixture f(Backend::seq_cst);
  EXPECT_THROW(f.mem.read(f.remote, f.r), LocalityViolation);
  EXPECT_THROW(f.mem.write(f.remote, f.r, I(1)), LocalityViolation);
  EXPECT_THROW(f.mem.cas(f.remote, f.r, I(0), I(1)), LocalityViolation);
  EXPECT_EQ(f.mem.peek(f.r), I(0));
  EXPECT_EQ(f.mem.op_counts(f.remote), OpMetrics{});
}

TEST(Memory, RemoteCasOnEmptyTail) {
  for (auto b : {Backend::seq_cst, Backend::hazard}) {
    Memory mem(2, b);
    auto p = mem.add_process(NodeId{1});
    auto tail = mem.alloc_register(NodeId{0}, Word::null());
    auto d = mem.alloc_register(NodeId{1}, I(-1));
    Access a = mem.r_cas(p, tail, Word::null(), Word::ref(d));
    while (a.status == AccessStatus::in_flight)
      a = mem.r_cas(p, tail, Word::null(), Word::ref(d));
    ASSERT_TRUE(a.done());
    EXPECT_TRUE(a.value.is_null());
    EXPECT_EQ(mem.peek(tail), Word::ref(d));
    EXPECT_FALSE(mem.pending(tail).has_value());
  }
}

TEST(Memory, LoopbackIsAllowed) {
  Fixture f(Backend::seq_cst);
  EXPECT_TRUE(f.mem.r_write(f.local, f.r, I(3)).done());
  EXPECT_EQ(f.mem.r_read(f.local, f.r).value, I(3));
  EXPECT_EQ(f.mem.op_counts(f.local).remote_total(), 2u);
  EXPECT_EQ(f.mem.op_counts(f.local).local_total(), 0u);
}

TEST(Memory, Counters) {
  Fixture f(Backend::seq_cst);
  EXPECT_EQ(f.mem.op_counts(f.local), OpMetrics{});
  f.mem.r_cas(f.remote, f.r, I(0), I(1));
  OpMetrics want;
  want.remote_cas = 1;
  want.remote_cas_successes = 1;
  EXPECT_EQ(f.mem.op_counts(f.remote), want);

  f.mem.write(f.local, f.r, I(4));
  EXPECT_EQ(f.mem.op_counts(f.local).local_writes, 1u);
  EXPECT_EQ(f.mem.op_counts(f.local).remote_total(), 0u);

  f.mem.cas(f.local, f.r, I(0), I(1));  // fails
  EXPECT_EQ(f.mem.op_counts(f.local).local_cas, 1u);
  EXPECT_EQ(f.mem.op_counts(f.local).local_cas_successes, 0u);

  f.mem.set_counting(false);
  f.mem.read(f.local, f.r);
  f.mem.set_counting(true);
  EXPECT_EQ(f.mem.op_counts(f.local).local_reads, 0u);

  f.mem.reset_counts();
  EXPECT_EQ(f.mem.op_counts(f.local), OpMetrics{});
  EXPECT_EQ(f.mem.op_counts(f.remote), OpMetrics{});
}

TEST(Memory, HazardCasIsTwoSteps) {
  Fixture f(Backend::hazard);
  Access a = f.mem.r_cas(f.remote, f.r, I(0), I(1));
  EXPECT_EQ(a.status, AccessStatus::in_flight);
  EXPECT_EQ(f.mem.peek(f.r), I(0));
  ASSERT_TRUE(f.mem.pending(f.r).has_value());
  EXPECT_EQ(f.mem.pending(f.r)->owner, f.remote.serial);

  // Local reads and other remote accesses wait for the store step.
  EXPECT_TRUE(f.mem.read(f.local, f.r).blocked());
  EXPECT_TRUE(f.mem.r_read(f.local, f.r).blocked());
  EXPECT_TRUE(f.mem.r_write(f.local, f.r, I(5)).blocked());

  a = f.mem.r_cas(f.remote, f.r, I(0), I(1));
  ASSERT_TRUE(a.done());
  EXPECT_EQ(a.value, I(0));
  EXPECT_EQ(f.mem.peek(f.r), I(1));
  // Observe and store count as one remote CAS attempt.
  EXPECT_EQ(f.mem.op_counts(f.remote).remote_cas, 1u);
}

TEST(Memory, JournalRecordsSplitCas) {
  Fixture f(Backend::hazard);
  std::vector<AccessRecord> j;
  f.mem.set_journal(&j);
  f.mem.r_cas(f.remote, f.r, I(0), I(1));
  f.mem.cas(f.local, f.r, I(0), I(2));
  f.mem.r_cas(f.remote, f.r, I(0), I(1));
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0].op, OpKind::cas_observe);
  EXPECT_EQ(j[1].op, OpKind::cas);
  EXPECT_FALSE(j[1].remote);
  EXPECT_EQ(j[2].op, OpKind::cas_store);
  EXPECT_EQ(j[2].before, I(2));
  EXPECT_EQ(j[2].after, I(1));
}

// Two-process litmus tests on one register: a local process issues one op,
// a remote process issues one op, and every interleaving of their memory
// calls is enumerated. The outcome is checked against both serial orders,
// computed by a reference model that knows nothing about the backend.
namespace litmus {

enum class Kind { read, write, rmw };

struct Op {
  Kind kind;
  std::int64_t arg;  // value written / swapped in; CAS expects 0
};

using Outcome = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
//                         local ret, remote ret, final value

std::pair<std::int64_t, std::int64_t> apply(Op op, std::int64_t v) {
  switch (op.kind) {
    case Kind::read: return {v, v};
    case Kind::write: return {0, op.arg};
    case Kind::rmw: return {v, v == 0 ? op.arg : v};
  }
  return {0, v};
}

std::set<Outcome> serial(Op l, Op r) {
  std::set<Outcome> out;
  auto [lr, v1] = apply(l, 0);
  auto [rr, v2] = apply(r, v1);
  out.emplace(lr, rr, v2);
  auto [rr2, w1] = apply(r, 0);
  auto [lr2, w2] = apply(l, w1);
  out.emplace(lr2, rr2, w2);
  return out;
}

Access issue(Memory& m, ProcId p, RegisterId reg, Op op, bool remote) {
  switch (op.kind) {
    case Kind::read: return remote ? m.r_read(p, reg) : m.read(p, reg);
    case Kind::write:
      return remote ? m.r_write(p, reg, I(op.arg)) : m.write(p, reg, I(op.arg));
    case Kind::rmw:
      return remote ? m.r_cas(p, reg, I(0), I(op.arg))
                    : m.cas(p, reg, I(0), I(op.arg));
  }
  return {};
}

// Replays `schedule` (0 = local, 1 = remote); nullopt if it is not a
// complete execution.
std::optional<Outcome> run(Backend b, Op l, Op r,
                           const std::vector<int>& schedule) {
  Fixture f(b);
  std::optional<std::int64_t> ret[2];
  for (int who : schedule) {
    if (ret[who]) return std::nullopt;
    Access a = who == 0 ? issue(f.mem, f.local, f.r, l, false)
                        : issue(f.mem, f.remote, f.r, r, true);
    if (a.blocked()) return std::nullopt;
    if (a.done()) {
      const Op op = who == 0 ? l : r;
      ret[who] = op.kind == Kind::write ? 0 : a.value.as_int();
    }
  }
  if (!ret[0] || !ret[1]) return std::nullopt;
  return Outcome{*ret[0], *ret[1], f.mem.peek(f.r).as_int()};
}

std::set<Outcome> enumerate(Backend b, Op l, Op r) {
  std::set<Outcome> out;
  for (int len = 2; len <= 4; ++len)
    for (int bits = 0; bits < (1 << len); ++bits) {
      std::vector<int> s;
      for (int i = 0; i < len; ++i) s.push_back((bits >> i) & 1);
      if (auto o = run(b, l, r, s)) out.insert(*o);
    }
  return out;
}

}  // namespace litmus

TEST(Litmus, AtomicityMatrix) {
  using litmus::Kind;
  const litmus::Op local_ops[] = {{Kind::read, 0}, {Kind::write, 2},
                                  {Kind::rmw, 2}};
  const litmus::Op remote_ops[] = {{Kind::read, 0}, {Kind::write, 1},
                                   {Kind::rmw, 1}};
  // Rows: local Read/Write/RMW; columns: remote Read/Write/RMW.
  const bool atomic[3][3] = {{true, true, true},
                             {true, true, false},
                             {true, true, false}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      SCOPED_TRACE(testing::Message() << "local " << i << " remote " << j);
      const auto ref = litmus::serial(local_ops[i], remote_ops[j]);
      const auto sc = litmus::enumerate(Backend::seq_cst, local_ops[i],
                                        remote_ops[j]);
      const auto hz = litmus::enumerate(Backend::hazard, local_ops[i],
                                        remote_ops[j]);
      EXPECT_EQ(sc, ref);
      bool serializable = true;
      for (const auto& o : hz) serializable &= ref.count(o) > 0;
      EXPECT_EQ(serializable, atomic[i][j]);
      // Every serial outcome stays reachable under the hazard backend.
      for (const auto& o : ref) EXPECT_EQ(hz.count(o), 1u);
    }
}

TEST(Litmus, LostUpdate) {
  // rCAS observes 0, local CAS 0->2 lands, rCAS stores 1: both succeed.
  const auto hz = litmus::enumerate(Backend::hazard,
                                    {litmus::Kind::rmw, 2},
                                    {litmus::Kind::rmw, 1});
  EXPECT_EQ(hz.count(litmus::Outcome{0, 0, 1}), 1u);
  const auto sc = litmus::enumerate(Backend::seq_cst,
                                    {litmus::Kind::rmw, 2},
                                    {litmus::Kind::rmw, 1});
  for (const auto& [l, r, v] : sc) EXPECT_NE(l == 0, r == 0);
}
