#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asymlock/checker.hpp"

namespace asymlock {

enum class Mode : std::uint8_t { check_safety, check_liveness, run, stress };

std::string to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

struct RunSpec {
  Mode mode = Mode::check_safety;
  LockKind lock = LockKind::alock;
  int n_local = 1;
  int n_remote = 1;
  int budget = 1;
  Backend backend = Backend::seq_cst;
  std::uint64_t seed = 1;
  std::uint64_t steps = 100'000;        // run
  std::uint64_t acquisitions = 10'000;  // stress, per process
  std::uint32_t remote_tick_cost = 0;   // run, stress
  std::size_t state_cap = 5'000'000;    // check-*
  std::string out = "-";
  std::string trace_out = "alock-trace.csv";

  // Throws std::invalid_argument; stress needs the seqcst backend.
  void validate() const;
  CheckConfig check_config() const;
};

struct ProcessReport {
  std::uint32_t serial = 0;
  int cls = 0;
  std::uint64_t acquisitions = 0;
  OpMetrics ops;
};

struct RunReport {
  RunSpec spec;
  std::vector<PropertyReport> properties;
  std::vector<ProcessReport> processes;
  std::size_t states = 0;       // check-*
  std::size_t transitions = 0;  // check-*
  std::uint64_t steps = 0;      // run
  std::uint64_t max_streak_past_enter = 0;
  std::uint64_t max_streak_announced = 0;
  std::uint64_t occupancy_violations = 0;  // stress
  std::uint64_t counter = 0;               // stress
  double seconds = 0;                      // stress only; stepwise reports
                                           // stay byte-deterministic
  std::vector<std::pair<std::string, std::string>> info;
  std::string trace_file;  // set once a trace has been written

  bool violated() const;
  const PropertyReport* first_violation() const;
};

// Runs one spec. Does not touch the filesystem.
RunReport execute(const RunSpec& spec);

// One thread per process, each doing `acquisitions` acquire / cs / release
// cycles on a shared seqcst memory. The cs checks single occupancy and bumps
// a shared counter with a non-atomic read-modify-write.
RunReport stress(const RunSpec& spec);

// key=value lines, ending with a CSV header/row pair for aggregation.
void write_report(std::ostream& os, const RunReport& r);
std::string csv_header();
std::string csv_row(const RunReport& r);

}  // namespace asymlock
