#include "asymlock/system.hpp"

#include <cstring>
#include <stdexcept>

namespace asymlock {

namespace {

constexpr int kIntBias = 4096;
constexpr std::size_t kProcBytes = 8;

void put16(std::uint8_t*& out, std::uint16_t v) {
  *out++ = static_cast<std::uint8_t>(v);
  *out++ = static_cast<std::uint8_t>(v >> 8);
}

std::uint16_t get16(const std::uint8_t*& in) {
  std::uint16_t v = static_cast<std::uint16_t>(in[0] | (in[1] << 8));
  in += 2;
  return v;
}

}  // namespace

std::string to_string(LockKind k) {
  switch (k) {
    case LockKind::alock: return "alock";
    case LockKind::naive_rcas: return "naive-rcas";
    case LockKind::mixed_cas: return "mixed-cas";
    case LockKind::peterson2: return "peterson2";
  }
  return "?";
}

std::optional<LockKind> lock_kind_from_string(std::string_view s) {
  for (auto k : {LockKind::alock, LockKind::naive_rcas, LockKind::mixed_cas,
                 LockKind::peterson2})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

void CheckConfig::validate() const {
  if (n_local < 0 || n_remote < 0 || n_local > 8 || n_remote > 8)
    throw std::invalid_argument("process counts must be in [0, 8]");
  if (n_local + n_remote < 1)
    throw std::invalid_argument("need at least one process");
  if (k_init_budget < 1 || k_init_budget > 100)
    throw std::invalid_argument("budget must be in [1, 100]");
  if (lock == LockKind::peterson2 && (n_local > 1 || n_remote > 1))
    throw std::invalid_argument("peterson2 takes at most one process per class");
  if (state_cap == 0) throw std::invalid_argument("state cap must be positive");
}

std::string describe(const CheckConfig& cfg) {
  std::string victim = cfg.initial_victim == InitialVictim::both ? "both"
                       : cfg.initial_victim == InitialVictim::zero ? "0"
                                                                   : "1";
  return to_string(cfg.lock) + " local=" + std::to_string(cfg.n_local) +
         " remote=" + std::to_string(cfg.n_remote) +
         " budget=" + std::to_string(cfg.k_init_budget) +
         " backend=" + to_string(cfg.backend) + " victim=" + victim +
         (cfg.lock == LockKind::alock ? " swap=" + to_string(cfg.swap) : "");
}

System::System(const CheckConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const NodeId home{0};
  mem_ = std::make_unique<Memory>(1 + cfg_.n_remote, cfg_.backend);
  const int victim = cfg_.initial_victim == InitialVictim::one ? 1 : 0;
  switch (cfg_.lock) {
    case LockKind::alock:
      proto_ = std::make_unique<ALock>(*mem_, home, cfg_.k_init_budget, victim,
                                       cfg_.swap);
      break;
    case LockKind::naive_rcas:
      proto_ = std::make_unique<FlagLock>(*mem_, home,
                                          FlagLock::Mode::naive_rcas);
      break;
    case LockKind::mixed_cas:
      proto_ = std::make_unique<FlagLock>(*mem_, home,
                                          FlagLock::Mode::mixed_cas);
      break;
    case LockKind::peterson2:
      proto_ = std::make_unique<Peterson2Lock>(*mem_, home, victim);
      break;
  }
  for (int i = 0; i < cfg_.n_local; ++i)
    who_.push_back(proto_->attach(*mem_, mem_->add_process(home)));
  for (int i = 0; i < cfg_.n_remote; ++i) {
    NodeId node{static_cast<std::uint16_t>(1 + i)};
    who_.push_back(proto_->attach(*mem_, mem_->add_process(node)));
  }
  states_.assign(who_.size(), ProcessState{});
  mem_->set_journal(&journal_);

  const std::size_t regs = mem_->num_registers();
  if (regs >= (1u << 14)) throw std::length_error("too many registers");
  encoded_size_ = regs * 2 + who_.size() * kProcBytes;
  if (cfg_.backend == Backend::hazard) encoded_size_ += regs * 3;
  initial_ = snapshot();
}

std::optional<RegisterId> System::victim_register() const {
  if (auto* a = dynamic_cast<const ALock*>(proto_.get()))
    return a->glock().victim();
  if (auto* p = dynamic_cast<const Peterson2Lock*>(proto_.get()))
    return p->glock().victim();
  return std::nullopt;
}

std::vector<RegisterId> System::cohort_tails() const {
  const GlobalLock* g = nullptr;
  if (auto* a = dynamic_cast<const ALock*>(proto_.get())) g = &a->glock();
  if (auto* p = dynamic_cast<const Peterson2Lock*>(proto_.get()))
    g = &p->glock();
  if (g == nullptr) return {};
  return {g->cohort_tail(ClassId{0}), g->cohort_tail(ClassId{1})};
}

StepResult System::step(std::size_t i) {
  journal_.clear();
  return proto_->step(*mem_, who_.at(i), states_[i]);
}

LabeledState System::snapshot() const {
  LabeledState s;
  s.procs = states_;
  const std::size_t n = mem_->num_registers();
  s.registers.reserve(n);
  s.pending.reserve(n);
  for (std::size_t f = 0; f < n; ++f) {
    s.registers.push_back(mem_->peek_flat(f));
    s.pending.push_back(mem_->pending_flat(f));
  }
  return s;
}

void System::restore(const LabeledState& s) {
  const std::size_t n = mem_->num_registers();
  if (s.procs.size() != states_.size() || s.registers.size() != n ||
      s.pending.size() != n)
    throw std::invalid_argument("state does not match this system");
  states_ = s.procs;
  for (std::size_t f = 0; f < n; ++f) {
    mem_->poke_flat(f, s.registers[f]);
    mem_->set_pending_flat(f, s.pending[f]);
  }
}

std::vector<LabeledState> System::initial_states() const {
  auto victim = victim_register();
  if (!victim || cfg_.initial_victim != InitialVictim::both) return {initial_};
  std::vector<LabeledState> out;
  const std::size_t f = mem_->flat_index(*victim);
  for (int v : {0, 1}) {
    LabeledState s = initial_;
    s.registers[f] = Word::integer(v);
    out.push_back(std::move(s));
  }
  return out;
}

std::uint16_t System::pack(Word w) const {
  if (w.is_null()) return 0;
  if (w.is_int()) {
    const std::int64_t v = w.as_int() + kIntBias;
    if (v < 0 || v >= (1 << 14)) throw std::out_of_range("integer too wide");
    return static_cast<std::uint16_t>(1 | (v << 2));
  }
  return static_cast<std::uint16_t>(2 | (mem_->flat_index(w.as_ref()) << 2));
}

Word System::unpack(std::uint16_t v) const {
  switch (v & 3) {
    case 0: return Word::null();
    case 1: return Word::integer(static_cast<std::int64_t>(v >> 2) - kIntBias);
    default: return Word::ref(mem_->register_at(v >> 2));
  }
}

void System::encode(std::uint8_t* out) const {
  const std::size_t n = mem_->num_registers();
  for (std::size_t f = 0; f < n; ++f) put16(out, pack(mem_->peek_flat(f)));
  if (cfg_.backend == Backend::hazard) {
    for (std::size_t f = 0; f < n; ++f) {
      const auto& p = mem_->pending_flat(f);
      *out++ = p ? static_cast<std::uint8_t>(p->owner + 1) : 0;
      put16(out, p ? pack(p->observed) : 0);
    }
  }
  for (const auto& s : states_) {
    *out++ = static_cast<std::uint8_t>(s.pc);
    *out++ = static_cast<std::uint8_t>(s.ret);
    *out++ = s.passed ? 1 : 0;
    *out++ = static_cast<std::uint8_t>(s.budget);
    put16(out, pack(s.pred));
    put16(out, pack(s.next));
  }
}

void System::decode(const std::uint8_t* in) {
  const std::size_t n = mem_->num_registers();
  for (std::size_t f = 0; f < n; ++f) mem_->poke_flat(f, unpack(get16(in)));
  if (cfg_.backend == Backend::hazard) {
    for (std::size_t f = 0; f < n; ++f) {
      const std::uint8_t owner = *in++;
      const Word observed = unpack(get16(in));
      mem_->set_pending_flat(
          f, owner ? std::optional<PendingRmw>(PendingRmw{
                         static_cast<std::uint32_t>(owner - 1), observed})
                   : std::nullopt);
    }
  }
  for (auto& s : states_) {
    s.pc = static_cast<Label>(*in++);
    s.ret = static_cast<Label>(*in++);
    s.passed = *in++ != 0;
    s.budget = static_cast<std::int8_t>(*in++);
    s.pred = unpack(get16(in));
    s.next = unpack(get16(in));
  }
}

}  // namespace asymlock
