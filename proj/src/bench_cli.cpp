#include "asymlock/bench_cli.hpp"

#include <atomic>
#include <chrono>
#include <latch>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "asymlock/random_run.hpp"

namespace asymlock {

namespace {

PropertyReport verdict(std::string name, bool ok, std::string detail = {}) {
  PropertyReport r;
  r.property = std::move(name);
  r.verdict = ok ? Verdict::holds : Verdict::violated;
  if (!ok) r.detail = std::move(detail);
  return r;
}

RunReport base_report(const RunSpec& spec) {
  RunReport r;
  r.spec = spec;
  return r;
}

RunReport run_checker(const RunSpec& spec) {
  RunReport r = base_report(spec);
  Checker checker(spec.check_config());
  if (spec.mode == Mode::check_safety) {
    r.properties = checker.check_invariants();
  } else {
    r.properties = checker.check_liveness();
    // The model lets a process idle in ncs forever, which alone refutes
    // ExecsCriticalSectionInfinitelyOften; show the verdicts with ncs fair.
    CheckConfig fair = spec.check_config();
    fair.ncs_exempt = false;
    for (const auto& p : Checker(fair).check_liveness())
      r.info.emplace_back("ncs_fair." + p.property, to_string(p.verdict));
  }
  if (!r.properties.empty()) {
    r.states = r.properties.front().states;
    r.transitions = r.properties.front().transitions;
  }
  System sys(spec.check_config());
  for (std::uint32_t i = 0; i < sys.num_processes(); ++i)
    r.processes.push_back(ProcessReport{i, sys.class_of(i).id, 0, {}});
  return r;
}

RunReport run_random(const RunSpec& spec) {
  RunReport r = base_report(spec);
  const CheckConfig cfg = spec.check_config();
  RandomRun run = random_fair_run(cfg, spec.seed, spec.steps, false);
  r.steps = run.steps;
  r.max_streak_past_enter = run.max_streak_past_enter;
  r.max_streak_announced = run.max_streak_announced;
  System sys(cfg);
  for (std::uint32_t i = 0; i < sys.num_processes(); ++i)
    r.processes.push_back(ProcessReport{i, sys.class_of(i).id,
                                        run.acquisitions[i], run.metrics[i]});

  const bool alock = spec.lock == LockKind::alock;
  r.properties.push_back(verdict("MutualExclusion", run.mutex_violations == 0,
                                 std::to_string(run.mutex_violations) +
                                     " states with two at cs"));
  if (spec.lock != LockKind::naive_rcas)
    r.properties.push_back(verdict(
        "LocalPurity", run.purity_violations == 0,
        std::to_string(run.purity_violations) + " remote accesses by class 0"));
  if (alock) {
    r.properties.push_back(verdict(
        "LocalWaitLocality", run.wait_locality_violations == 0,
        std::to_string(run.wait_locality_violations) + " non-local spin reads"));
    r.properties.push_back(verdict(
        "ClassMonopolyBound",
        run.max_streak_announced <= static_cast<std::uint64_t>(spec.budget),
        "announced streak " + std::to_string(run.max_streak_announced)));
  }
  if (run.stuck)
    r.properties.push_back(verdict("Progress", false, "no process enabled"));
  r.info.emplace_back("forced_steps", std::to_string(run.forced));

  if (run.first_violation || run.stuck) {
    // Same seed, same schedule: replay up to the breach with the trace kept.
    const std::uint64_t upto =
        run.first_violation ? *run.first_violation + 1 : run.steps;
    RandomRun again = random_fair_run(cfg, spec.seed, upto, true);
    for (auto& p : r.properties)
      if (p.verdict == Verdict::violated) p.counterexample = again.trace;
  }
  return r;
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::check_safety: return "check-safety";
    case Mode::check_liveness: return "check-liveness";
    case Mode::run: return "run";
    case Mode::stress: return "stress";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  for (auto m : {Mode::check_safety, Mode::check_liveness, Mode::run,
                 Mode::stress})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

void RunSpec::validate() const {
  if (mode == Mode::stress && backend != Backend::seq_cst)
    throw std::invalid_argument("stress mode needs the seqcst backend");
  if (mode == Mode::stress && acquisitions == 0)
    throw std::invalid_argument("acquisitions must be positive");
  check_config().validate();
}

CheckConfig RunSpec::check_config() const {
  CheckConfig c;
  c.n_local = n_local;
  c.n_remote = n_remote;
  c.k_init_budget = budget;
  c.backend = backend;
  c.lock = lock;
  c.state_cap = state_cap;
  return c;
}

bool RunReport::violated() const { return first_violation() != nullptr; }

const PropertyReport* RunReport::first_violation() const {
  for (const auto& p : properties)
    if (p.verdict == Verdict::violated) return &p;
  return nullptr;
}

RunReport execute(const RunSpec& spec) {
  spec.validate();
  switch (spec.mode) {
    case Mode::check_safety:
    case Mode::check_liveness:
      return run_checker(spec);
    case Mode::run:
      return run_random(spec);
    case Mode::stress:
      return stress(spec);
  }
  throw std::logic_error("unknown mode");
}

RunReport stress(const RunSpec& spec) {
  spec.validate();
  RunReport r = base_report(spec);
  CheckConfig cfg = spec.check_config();
  cfg.initial_victim = InitialVictim::zero;
  System sys(cfg);
  Memory& mem = sys.memory();
  mem.set_journal(nullptr);
  mem.set_remote_tick_cost(spec.remote_tick_cost);
  mem.reset_counts();
  const auto* alock = dynamic_cast<const ALock*>(&sys.protocol());

  const std::size_t n = sys.num_processes();
  std::atomic<int> occupancy{0};
  std::atomic<std::uint64_t> violations{0};
  std::atomic<std::uint64_t> counter{0};
  std::latch start(static_cast<std::ptrdiff_t>(n) + 1);

  auto critical_section = [&] {
    if (occupancy.fetch_add(1) != 0) violations.fetch_add(1);
    // Split load/store: a lost update shows up in the final count.
    counter.store(counter.load(std::memory_order_relaxed) + 1,
                  std::memory_order_relaxed);
    occupancy.fetch_sub(1);
  };

  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < n; ++i) {
    workers.emplace_back([&, i] {
      ProcessContext ctx{sys.participant(i), ProcessState{}};
      start.arrive_and_wait();
      for (std::uint64_t k = 0; k < spec.acquisitions; ++k) {
        if (alock != nullptr) {
          LockToken token = alock->acquire(mem, ctx);
          critical_section();
          alock->release(mem, ctx, std::move(token));
        } else {
          run_until(sys.protocol(), mem, ctx.who, ctx.state, Label::cs);
          critical_section();
          run_until(sys.protocol(), mem, ctx.who, ctx.state, Label::ncs);
        }
      }
    });
  }
  const auto t0 = std::chrono::steady_clock::now();
  start.arrive_and_wait();
  for (auto& w : workers) w.join();
  r.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  r.occupancy_violations = violations.load();
  r.counter = counter.load();
  for (std::uint32_t i = 0; i < n; ++i)
    r.processes.push_back(ProcessReport{i, sys.class_of(i).id,
                                        spec.acquisitions,
                                        mem.op_counts(sys.participant(i).proc)});
  const std::uint64_t expected = spec.acquisitions * n;
  r.properties.push_back(verdict(
      "SingleOccupancy", r.occupancy_violations == 0,
      std::to_string(r.occupancy_violations) + " overlapping entries"));
  r.properties.push_back(verdict("CounterExact", r.counter == expected,
                                 "counter " + std::to_string(r.counter) +
                                     " expected " + std::to_string(expected)));
  return r;
}

std::string csv_header() {
  return "mode,lock,local,remote,budget,backend,seed,states,steps,"
         "remote_ops_class0,remote_ops_class1,max_streak_past_enter,"
         "max_streak_announced,violated,result";
}

std::string csv_row(const RunReport& r) {
  std::uint64_t remote[2] = {0, 0};
  for (const auto& p : r.processes) remote[p.cls] += p.ops.remote_total();
  std::string violated;
  for (const auto& p : r.properties)
    if (p.verdict == Verdict::violated)
      violated += (violated.empty() ? "" : ";") + p.property;
  std::ostringstream os;
  const auto& s = r.spec;
  os << to_string(s.mode) << ',' << to_string(s.lock) << ',' << s.n_local
     << ',' << s.n_remote << ',' << s.budget << ',' << to_string(s.backend)
     << ',' << s.seed << ',' << r.states << ',' << r.steps << ',' << remote[0]
     << ',' << remote[1] << ',' << r.max_streak_past_enter << ','
     << r.max_streak_announced << ',' << violated << ','
     << (r.violated() ? "violated" : "ok");
  return os.str();
}

void write_report(std::ostream& os, const RunReport& r) {
  const auto& s = r.spec;
  os << "mode=" << to_string(s.mode) << '\n'
     << "lock=" << to_string(s.lock) << '\n'
     << "local=" << s.n_local << '\n'
     << "remote=" << s.n_remote << '\n'
     << "budget=" << s.budget << '\n'
     << "backend=" << to_string(s.backend) << '\n';
  switch (s.mode) {
    case Mode::check_safety:
    case Mode::check_liveness:
      os << "state_cap=" << s.state_cap << '\n'
         << "states=" << r.states << '\n'
         << "transitions=" << r.transitions << '\n';
      break;
    case Mode::run:
      os << "seed=" << s.seed << '\n'
         << "remote_tick_cost=" << s.remote_tick_cost << '\n'
         << "steps=" << r.steps << '\n'
         << "max_streak_past_enter=" << r.max_streak_past_enter << '\n'
         << "max_streak_announced=" << r.max_streak_announced << '\n';
      break;
    case Mode::stress:
      os << "acquisitions=" << s.acquisitions << '\n'
         << "remote_tick_cost=" << s.remote_tick_cost << '\n'
         << "occupancy_violations=" << r.occupancy_violations << '\n'
         << "counter=" << r.counter << '\n'
         << "seconds=" << r.seconds << '\n'
         << "acquisitions_per_second="
         << (r.seconds > 0 ? static_cast<double>(r.counter) / r.seconds : 0)
         << '\n';
      break;
  }
  for (const auto& p : r.properties) {
    os << "property." << p.property << '=' << to_string(p.verdict) << '\n';
    if (!p.detail.empty())
      os << "property." << p.property << ".detail=" << p.detail << '\n';
  }
  for (const auto& [k, v] : r.info) os << "info." << k << '=' << v << '\n';
  for (const auto& p : r.processes) {
    const std::string k = "proc." + std::to_string(p.serial) + '.';
    os << k << "class=" << p.cls << '\n';
    if (s.mode == Mode::check_safety || s.mode == Mode::check_liveness)
      continue;
    const auto& m = p.ops;
    os << k << "acquisitions=" << p.acquisitions << '\n'
       << k << "local_reads=" << m.local_reads << '\n'
       << k << "local_writes=" << m.local_writes << '\n'
       << k << "local_cas=" << m.local_cas << '\n'
       << k << "local_cas_successes=" << m.local_cas_successes << '\n'
       << k << "remote_reads=" << m.remote_reads << '\n'
       << k << "remote_writes=" << m.remote_writes << '\n'
       << k << "remote_cas=" << m.remote_cas << '\n'
       << k << "remote_cas_successes=" << m.remote_cas_successes << '\n';
  }
  os << "result=" << (r.violated() ? "violated" : "ok") << '\n'
     << "trace=" << (r.trace_file.empty() ? "none" : r.trace_file) << '\n'
     << "csv_header=" << csv_header() << '\n'
     << "csv_row=" << csv_row(r) << '\n';
}

}  // namespace asymlock
