#include "asymlock/memory.hpp"


namespace asymlock {

std::string to_string(NodeId n) { return "n" + std::to_string(n.index); }

std::string to_string(RegisterId r) {
  return to_string(r.node) + "." + std::to_string(r.slot);
}

std::string to_string(ProcId p) {
  return "p" + std::to_string(p.node.index) + "." +
         std::to_string(p.local_index);
}

std::string to_string(Word w) {
  if (w.is_null()) return "null";
  if (w.is_int()) return std::to_string(w.as_int());
  return "&" + to_string(w.as_ref());
}

std::string to_string(Backend b) {
  return b == Backend::seq_cst ? "seqcst" : "hazard";
}

std::string to_string(OpKind k) {
  switch (k) {
    case OpKind::read: return "read";
    case OpKind::write: return "write";
    case OpKind::cas: return "cas";
    case OpKind::cas_observe: return "cas_observe";
    case OpKind::cas_store: return "cas_store";
  }
  return "?";
}

LocalityViolation::LocalityViolation(ProcId p, RegisterId r)
    : std::logic_error("locality violation: " + to_string(p) +
                       " issued a local access to " + to_string(r)) {}

OpMetrics& OpMetrics::operator+=(const OpMetrics& o) {
  local_reads += o.local_reads;
  local_writes += o.local_writes;
  local_cas += o.local_cas;
  local_cas_successes += o.local_cas_successes;
  remote_reads += o.remote_reads;
  remote_writes += o.remote_writes;
  remote_cas += o.remote_cas;
  remote_cas_successes += o.remote_cas_successes;
  return *this;
}

Memory::Memory(std::size_t num_nodes, Backend backend)
    : backend_(backend),
      node_slots_(num_nodes),
      per_node_procs_(num_nodes, 0) {
  if (num_nodes == 0) throw std::invalid_argument("memory needs a node");
}

ProcId Memory::add_process(NodeId node) {
  if (node.index >= num_nodes()) throw std::out_of_range("unknown node");
  ProcId p{node, per_node_procs_[node.index]++,
           static_cast<std::uint32_t>(procs_.size())};
  procs_.push_back(p);
  metrics_.emplace_back();
  return p;
}

RegisterId Memory::alloc_register(NodeId node, Word init) {
  if (node.index >= num_nodes()) throw std::out_of_range("unknown node");
  auto& slots = node_slots_[node.index];
  RegisterId r{node, static_cast<std::uint32_t>(slots.size())};
  slots.push_back(static_cast<std::uint32_t>(ids_.size()));
  ids_.push_back(r);
  cells_.emplace_back(init.raw());
  pending_.emplace_back();
  return r;
}

std::size_t Memory::flat_index(RegisterId r) const {
  if (r.node.index >= num_nodes()) throw std::out_of_range("unknown node");
  const auto& slots = node_slots_[r.node.index];
  if (r.slot >= slots.size()) throw std::out_of_range("unknown register");
  return slots[r.slot];
}

std::atomic<std::uint64_t>& Memory::cell(RegisterId r) {
  return cells_[flat_index(r)];
}

void Memory::check_proc(ProcId p) const {
  if (p.serial >= procs_.size() || !(procs_[p.serial] == p))
    throw std::out_of_range("unknown process " + to_string(p));
}

void Memory::check_local(ProcId p, RegisterId r) const {
  check_proc(p);
  if (p.node != r.node) throw LocalityViolation(p, r);
}

OpMetrics* Memory::metrics_for(ProcId p) {
  return counting_ ? &metrics_[p.serial].m : nullptr;
}

void Memory::log(ProcId p, OpKind op, bool remote, RegisterId r, Word before,
                 Word after) {
  if (journal_ != nullptr)
    journal_->push_back(AccessRecord{p.serial, op, remote, r, before, after});
}

void Memory::remote_delay() const {
  for (std::uint32_t i = 0; i < remote_tick_cost_; ++i) {
    // keep the loop from being folded away
    std::atomic_signal_fence(std::memory_order_seq_cst);
  }
}

Access Memory::read(ProcId p, RegisterId r) {
  check_local(p, r);
  const std::size_t flat = flat_index(r);
  if (pending_[flat]) return {AccessStatus::blocked, {}};
  Word v = Word::from_raw(cells_[flat].load());
  if (auto* m = metrics_for(p)) ++m->local_reads;
  log(p, OpKind::read, false, r, v, v);
  return {AccessStatus::done, v};
}

Access Memory::write(ProcId p, RegisterId r, Word v) {
  check_local(p, r);
  auto& c = cell(r);
  Word before = journal_ ? Word::from_raw(c.load()) : Word{};
  c.store(v.raw());
  if (auto* m = metrics_for(p)) ++m->local_writes;
  log(p, OpKind::write, false, r, before, v);
  return {AccessStatus::done, v};
}

Access Memory::cas(ProcId p, RegisterId r, Word expected, Word swap) {
  check_local(p, r);
  auto& c = cell(r);
  std::uint64_t seen = expected.raw();
  const bool ok = c.compare_exchange_strong(seen, swap.raw());
  if (auto* m = metrics_for(p)) {
    ++m->local_cas;
    if (ok) ++m->local_cas_successes;
  }
  log(p, OpKind::cas, false, r, Word::from_raw(seen),
      ok ? swap : Word::from_raw(seen));
  return {AccessStatus::done, Word::from_raw(seen)};
}

Access Memory::r_read(ProcId p, RegisterId r) {
  check_proc(p);
  const std::size_t flat = flat_index(r);
  if (pending_[flat]) return {AccessStatus::blocked, {}};
  remote_delay();
  Word v = Word::from_raw(cells_[flat].load());
  if (auto* m = metrics_for(p)) ++m->remote_reads;
  log(p, OpKind::read, true, r, v, v);
  return {AccessStatus::done, v};
}

Access Memory::r_write(ProcId p, RegisterId r, Word v) {
  check_proc(p);
  const std::size_t flat = flat_index(r);
  if (pending_[flat]) return {AccessStatus::blocked, {}};
  remote_delay();
  Word before = journal_ ? Word::from_raw(cells_[flat].load()) : Word{};
  cells_[flat].store(v.raw());
  if (auto* m = metrics_for(p)) ++m->remote_writes;
  log(p, OpKind::write, true, r, before, v);
  return {AccessStatus::done, v};
}

Access Memory::r_cas(ProcId p, RegisterId r, Word expected, Word swap) {
  check_proc(p);
  const std::size_t flat = flat_index(r);
  auto& c = cells_[flat];
  auto& pend = pending_[flat];

  if (backend_ == Backend::seq_cst) {
    remote_delay();
    std::uint64_t seen = expected.raw();
    const bool ok = c.compare_exchange_strong(seen, swap.raw());
    if (auto* m = metrics_for(p)) {
      ++m->remote_cas;
      if (ok) ++m->remote_cas_successes;
    }
    log(p, OpKind::cas, true, r, Word::from_raw(seen),
        ok ? swap : Word::from_raw(seen));
    return {AccessStatus::done, Word::from_raw(seen)};
  }

  if (pend && pend->owner != p.serial) return {AccessStatus::blocked, {}};
  if (!pend) {
    Word seen = Word::from_raw(c.load());
    pend = PendingRmw{p.serial, seen};
    if (auto* m = metrics_for(p)) ++m->remote_cas;
    log(p, OpKind::cas_observe, true, r, seen, seen);
    return {AccessStatus::in_flight, seen};
  }
  // Store step: decided on the value observed earlier, regardless of any
  // local write that landed in between.
  const Word observed = pend->observed;
  pend.reset();
  const Word before = Word::from_raw(c.load());
  const bool ok = observed == expected;
  if (ok) c.store(swap.raw());
  if (ok) {
    if (auto* m = metrics_for(p)) ++m->remote_cas_successes;
  }
  log(p, OpKind::cas_store, true, r, before, ok ? swap : before);
  return {AccessStatus::done, observed};
}

OpMetrics Memory::op_counts(ProcId p) const {
  check_proc(p);
  return metrics_[p.serial].m;
}

void Memory::reset_counts() {
  for (auto& m : metrics_) m.m = OpMetrics{};
}

Word Memory::peek(RegisterId r) const { return peek_flat(flat_index(r)); }

void Memory::poke(RegisterId r, Word v) { poke_flat(flat_index(r), v); }

Word Memory::peek_flat(std::size_t flat) const {
  return Word::from_raw(cells_.at(flat).load());
}

void Memory::poke_flat(std::size_t flat, Word v) {
  cells_.at(flat).store(v.raw());
}

std::optional<PendingRmw> Memory::pending(RegisterId r) const {
  return pending_[flat_index(r)];
}

}  // namespace asymlock
