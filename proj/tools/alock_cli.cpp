// Command-line front end: model checking, random fair runs and threaded
// stress runs of the asymmetric lock and its baselines.
//
// Exit status: 0 all properties hold, 2 a property was violated (a trace file
// is written), 1 usage error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "asymlock/bench_cli.hpp"

namespace {

using namespace asymlock;

void write_trace_file(const RunSpec& spec, RunReport& report) {
  std::ofstream os(spec.trace_out);
  if (!os) throw std::runtime_error("cannot write " + spec.trace_out);
  const PropertyReport* bad = report.first_violation();
  if (bad->counterexample) {
    os << "# property: " << bad->property << "\n";
    write_trace(os, spec.check_config(), *bad->counterexample);
  } else {
    // Threaded runs have no step sequence to replay.
    os << "# property: " << bad->property << "\n"
       << "# config: " << describe(spec.check_config()) << "\n"
       << "# " << bad->detail << "\n"
       << "# step_index,proc,label,changed_register,old,new\n";
  }
  report.trace_file = spec.trace_out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymmetric RDMA lock: checker, random runs and stress tests"};
  RunSpec spec;
  std::string mode = "check-safety", lock = "alock", backend = "seqcst";

  app.add_option("--mode", mode, "What to do")
      ->check(CLI::IsMember(
          {"check-safety", "check-liveness", "run", "stress"}))
      ->capture_default_str();
  app.add_option("--lock", lock, "Lock under test")
      ->check(CLI::IsMember({"alock", "naive-rcas", "mixed-cas", "peterson2"}))
      ->capture_default_str();
  app.add_option("--local", spec.n_local, "Processes on the lock's home node")
      ->check(CLI::Range(0, 8))
      ->capture_default_str();
  app.add_option("--remote", spec.n_remote, "Processes on other nodes")
      ->check(CLI::Range(0, 8))
      ->capture_default_str();
  app.add_option("--budget", spec.budget,
                 "Cohort budget: same-class hand-offs before yielding")
      ->check(CLI::Range(1, 100))
      ->capture_default_str();
  app.add_option("--backend", backend,
                 "Memory model; hazard splits remote CAS (stepwise modes only)")
      ->check(CLI::IsMember({"seqcst", "hazard"}))
      ->capture_default_str();
  app.add_option("--seed", spec.seed, "Scheduler seed for run mode")
      ->capture_default_str();
  app.add_option("--steps", spec.steps, "Scheduler ticks for run mode")
      ->capture_default_str();
  app.add_option("--acquisitions", spec.acquisitions,
                 "Lock cycles per thread for stress mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--remote-tick-cost", spec.remote_tick_cost,
                 "Busy-wait ticks added to every remote access")
      ->capture_default_str();
  app.add_option("--state-cap", spec.state_cap,
                 "Checker gives up (inconclusive) beyond this many states")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", spec.out, "Report file, - for stdout")
      ->capture_default_str();
  app.add_option("--trace-out", spec.trace_out,
                 "Counterexample file, written on violation")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  spec.mode = *mode_from_string(mode);
  spec.lock = *lock_kind_from_string(lock);
  spec.backend = backend == "hazard" ? Backend::hazard : Backend::seq_cst;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    RunReport report = execute(spec);
    if (report.violated()) write_trace_file(spec, report);
    if (spec.out == "-") {
      write_report(std::cout, report);
    } else {
      std::ofstream os(spec.out);
      if (!os) throw std::runtime_error("cannot write " + spec.out);
      write_report(os, report);
    }
    return report.violated() ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
