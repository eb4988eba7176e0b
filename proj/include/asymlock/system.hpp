#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asymlock/alock.hpp"
#include "asymlock/baselines.hpp"

namespace asymlock {

enum class LockKind : std::uint8_t { alock, naive_rcas, mixed_cas, peterson2 };

std::string to_string(LockKind k);
std::optional<LockKind> lock_kind_from_string(std::string_view s);

enum class InitialVictim : std::uint8_t { zero, one, both };

// A closed system of processes sharing one lock. Node 0 is the lock's home
// and hosts the n_local processes; each remote process gets its own node.
// Process serials: locals first (0..n_local-1), then remotes.
struct CheckConfig {
  int n_local = 1;
  int n_remote = 1;
  int k_init_budget = 1;
  Backend backend = Backend::seq_cst;
  LockKind lock = LockKind::alock;
  InitialVictim initial_victim = InitialVictim::both;
  // atomic: the whole enqueue loop is one step.
  SwapStep swap = SwapStep::atomic;
  std::size_t state_cap = 5'000'000;
  // Weak fairness covers every label except ncs, where a process may idle
  // forever. Clearing this makes ncs weakly fair too.
  bool ncs_exempt = true;

  int num_processes() const { return n_local + n_remote; }
  // Throws std::invalid_argument on an unusable configuration.
  void validate() const;
};

std::string describe(const CheckConfig& cfg);

// Full snapshot: every process's program state plus every register.
struct LabeledState {
  std::vector<ProcessState> procs;
  std::vector<Word> registers;  // flat allocation order
  std::vector<std::optional<PendingRmw>> pending;

  friend bool operator==(const LabeledState&, const LabeledState&) = default;
};

// Owns the memory, the lock and the processes for one configuration, and
// steps processes one at a time. Every performed access of the latest step is
// kept in last_accesses().
class System {
 public:
  explicit System(const CheckConfig& cfg);

  const CheckConfig& config() const { return cfg_; }
  Memory& memory() { return *mem_; }
  const Memory& memory() const { return *mem_; }
  const Protocol& protocol() const { return *proto_; }

  std::size_t num_processes() const { return who_.size(); }
  const Participant& participant(std::size_t i) const { return who_[i]; }
  ProcessState& state(std::size_t i) { return states_[i]; }
  const ProcessState& state(std::size_t i) const { return states_[i]; }
  Label pc(std::size_t i) const { return states_[i].pc; }
  ClassId class_of(std::size_t i) const { return who_[i].cls; }

  // Register holding the Peterson victim; null for the flag locks.
  std::optional<RegisterId> victim_register() const;
  // Cohort tails (alock) / interest flags (peterson2); empty otherwise.
  std::vector<RegisterId> cohort_tails() const;

  StepResult step(std::size_t i);
  const std::vector<AccessRecord>& last_accesses() const { return journal_; }

  LabeledState snapshot() const;
  void restore(const LabeledState& s);

  // The configured initial states (one per initial victim choice).
  std::vector<LabeledState> initial_states() const;

  // Fixed-size byte encoding of the full state, for hashing and storage.
  std::size_t encoded_size() const { return encoded_size_; }
  void encode(std::uint8_t* out) const;
  void decode(const std::uint8_t* in);

 private:
  std::uint16_t pack(Word w) const;
  Word unpack(std::uint16_t v) const;

  CheckConfig cfg_;
  std::unique_ptr<Memory> mem_;
  std::unique_ptr<Protocol> proto_;
  std::vector<Participant> who_;
  std::vector<ProcessState> states_;
  std::vector<AccessRecord> journal_;
  std::size_t encoded_size_ = 0;
  LabeledState initial_;
};

}  // namespace asymlock
