#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "asymlock/word.hpp"

namespace asymlock {

// SeqCst: every access, local or remote, is atomic with every other.
// Hazard: a remote CAS is split into an observe step and a store step; local
// writes and local CAS on the same register may land in between. Local reads
// and all other remote accesses to that register wait for the store step.
enum class Backend : std::uint8_t { seq_cst, hazard };

std::string to_string(Backend b);

// Raised when a process issues a local access to a register on another node.
class LocalityViolation : public std::logic_error {
 public:
  LocalityViolation(ProcId p, RegisterId r);
};

struct OpMetrics {
  std::uint64_t local_reads = 0;
  std::uint64_t local_writes = 0;
  std::uint64_t local_cas = 0;
  std::uint64_t local_cas_successes = 0;
  std::uint64_t remote_reads = 0;
  std::uint64_t remote_writes = 0;
  std::uint64_t remote_cas = 0;
  std::uint64_t remote_cas_successes = 0;

  std::uint64_t local_total() const {
    return local_reads + local_writes + local_cas;
  }
  std::uint64_t remote_total() const {
    return remote_reads + remote_writes + remote_cas;
  }
  OpMetrics& operator+=(const OpMetrics& o);
  friend bool operator==(const OpMetrics&, const OpMetrics&) = default;
};

enum class AccessStatus : std::uint8_t {
  done,       // completed; `value` holds the result
  in_flight,  // hazard r_cas observe step taken; call again to complete
  blocked,    // not enabled right now; nothing happened
};

struct Access {
  AccessStatus status = AccessStatus::done;
  Word value;

  bool done() const { return status == AccessStatus::done; }
  bool blocked() const { return status == AccessStatus::blocked; }
};

enum class OpKind : std::uint8_t { read, write, cas, cas_observe, cas_store };

std::string to_string(OpKind k);

// One performed access, recorded when a journal is attached.
struct AccessRecord {
  std::uint32_t proc = 0;
  OpKind op = OpKind::read;
  bool remote = false;
  RegisterId reg;
  Word before;
  Word after;
};

// An r_cas between its observe and store steps (hazard backend only).
struct PendingRmw {
  std::uint32_t owner = 0;
  Word observed;
  friend bool operator==(const PendingRmw&, const PendingRmw&) = default;
};

// RDMA-accessible memory partitioned among nodes.
//
// Registers and processes are created up front (single-threaded). After
// that, the SeqCst backend may be shared across threads: every access is a
// seq_cst atomic, so all accesses form one total order. Metrics for a process
// must only be bumped by the thread driving that process. The Hazard backend,
// the journal, and the snapshot helpers are for single-threaded stepping.
class Memory {
 public:
  explicit Memory(std::size_t num_nodes, Backend backend = Backend::seq_cst);

  Memory(const Memory&) = delete;
  Memory& operator=(const Memory&) = delete;

  std::size_t num_nodes() const { return node_slots_.size(); }
  Backend backend() const { return backend_; }

  ProcId add_process(NodeId node);
  std::size_t num_processes() const { return procs_.size(); }
  ProcId process(std::size_t serial) const { return procs_.at(serial); }

  RegisterId alloc_register(NodeId node, Word init);
  std::size_t num_registers() const { return ids_.size(); }
  std::size_t flat_index(RegisterId r) const;
  RegisterId register_at(std::size_t flat) const { return ids_.at(flat); }

  // Local accesses; the caller must reside on the register's node.
  Access read(ProcId p, RegisterId r);
  Access write(ProcId p, RegisterId r, Word v);
  // Returns the value observed immediately before; stores `swap` iff it
  // equalled `expected`.
  Access cas(ProcId p, RegisterId r, Word expected, Word swap);

  // Remote (RNIC) accesses; enabled for every process, loopback included.
  Access r_read(ProcId p, RegisterId r);
  Access r_write(ProcId p, RegisterId r, Word v);
  Access r_cas(ProcId p, RegisterId r, Word expected, Word swap);

  OpMetrics op_counts(ProcId p) const;
  void reset_counts();
  // Probing steps (e.g. to learn which processes are enabled) turn this off.
  void set_counting(bool on) { counting_ = on; }
  bool counting() const { return counting_; }

  // Busy-wait cost added to each remote access; only meaningful for
  // throughput runs.
  void set_remote_tick_cost(std::uint32_t ticks) { remote_tick_cost_ = ticks; }

  void set_journal(std::vector<AccessRecord>* journal) { journal_ = journal; }

  // Uncounted inspection and initialization.
  Word peek(RegisterId r) const;
  void poke(RegisterId r, Word v);
  Word peek_flat(std::size_t flat) const;
  void poke_flat(std::size_t flat, Word v);

  std::optional<PendingRmw> pending(RegisterId r) const;
  const std::optional<PendingRmw>& pending_flat(std::size_t flat) const {
    return pending_[flat];
  }
  void set_pending_flat(std::size_t flat, std::optional<PendingRmw> p) {
    pending_[flat] = p;
  }

 private:
  struct alignas(64) PaddedMetrics {
    OpMetrics m;
  };

  std::atomic<std::uint64_t>& cell(RegisterId r);
  void check_proc(ProcId p) const;
  void check_local(ProcId p, RegisterId r) const;
  OpMetrics* metrics_for(ProcId p);
  void log(ProcId p, OpKind op, bool remote, RegisterId r, Word before,
           Word after);
  void remote_delay() const;

  Backend backend_;
  std::vector<std::vector<std::uint32_t>> node_slots_;  // slot -> flat index
  std::vector<RegisterId> ids_;                          // flat -> id
  std::deque<std::atomic<std::uint64_t>> cells_;
  std::vector<std::optional<PendingRmw>> pending_;
  std::vector<ProcId> procs_;
  std::vector<std::uint16_t> per_node_procs_;
  std::vector<PaddedMetrics> metrics_;
  bool counting_ = true;
  std::uint32_t remote_tick_cost_ = 0;
  std::vector<AccessRecord>* journal_ = nullptr;
};

}  // namespace asymlock
