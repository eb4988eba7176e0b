#include "state_space.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <stdexcept>

#include <omp.h>

namespace asymlock::detail {

StateStore::StateStore(std::size_t width)
    : width_(width),
      arena_(std::make_unique<Arena>()),
      index_(1024, Hash{arena_.get(), width}, Eq{arena_.get(), width}) {
  if (width == 0) throw std::invalid_argument("empty state encoding");
}

std::size_t StateStore::Hash::operator()(std::uint32_t i) const {
  const char* p = reinterpret_cast<const char*>(arena->data()) +
                  static_cast<std::size_t>(i) * width;
  return std::hash<std::string_view>{}(std::string_view(p, width));
}

bool StateStore::Eq::operator()(std::uint32_t a, std::uint32_t b) const {
  return std::memcmp(arena->data() + static_cast<std::size_t>(a) * width,
                     arena->data() + static_cast<std::size_t>(b) * width,
                     width) == 0;
}

std::pair<std::uint32_t, bool> StateStore::insert(const std::uint8_t* bytes) {
  const std::size_t n = size();
  if (n >= kNoState) throw std::length_error("state store full");
  arena_->insert(arena_->end(), bytes, bytes + width_);
  auto [it, fresh] = index_.insert(static_cast<std::uint32_t>(n));
  if (!fresh) arena_->resize(n * width_);
  return {*it, fresh};
}

namespace {

struct Successor {
  std::uint32_t proc;
  Label label;
  std::size_t offset;
  std::vector<AccessRecord> accesses;
};

struct Expansion {
  std::vector<std::uint8_t> bytes;
  std::vector<Successor> succ;
};

void expand(System& sys, const std::uint8_t* src, Expansion& out) {
  out.bytes.clear();
  out.succ.clear();
  const std::size_t w = sys.encoded_size();
  bool dirty = true;
  for (std::uint32_t p = 0; p < sys.num_processes(); ++p) {
    if (dirty) sys.decode(src);
    dirty = false;
    const Label label = sys.pc(p);
    // A blocked step changes nothing, so the decoded state stays valid.
    if (sys.step(p) == StepResult::blocked) continue;
    dirty = true;
    const std::size_t off = out.bytes.size();
    out.bytes.resize(off + w);
    sys.encode(out.bytes.data() + off);
    out.succ.push_back(Successor{p, label, off, sys.last_accesses()});
  }
}

std::unique_ptr<System> quiet_system(const CheckConfig& cfg) {
  auto sys = std::make_unique<System>(cfg);
  sys->memory().set_counting(false);
  return sys;
}

}  // namespace

StateGraph search(const CheckConfig& cfg, SearchOrder order, bool keep_edges,
                  const SearchHooks& hooks) {
  auto sys_owner = quiet_system(cfg);
  System& sys = *sys_owner;
  StateGraph g(sys.encoded_size());
  std::vector<std::uint8_t> buf(sys.encoded_size());
  struct Triple {
    std::uint32_t src, dst, proc;
  };
  std::vector<Triple> triples;

  auto visit_new = [&](std::uint32_t idx) {
    if (!hooks.on_state) return true;
    sys.decode(g.store.at(idx));
    return hooks.on_state(idx, sys);
  };

  auto merge = [&](std::uint32_t src, const Expansion& ex,
                   auto&& push) -> bool {
    for (const auto& s : ex.succ) {
      if (g.size() >= cfg.state_cap) {
        g.cap_hit = true;
        return false;
      }
      auto [dst, fresh] = g.store.insert(ex.bytes.data() + s.offset);
      if (fresh) {
        g.parent.push_back(src);
        g.via.push_back(static_cast<std::uint8_t>(s.proc));
      }
      ++g.transitions;
      if (keep_edges) triples.push_back({src, dst, s.proc});
      if (hooks.on_transition &&
          !hooks.on_transition(src, dst, s.proc, s.label, s.accesses)) {
        g.stopped = true;
        return false;
      }
      if (fresh) {
        if (!visit_new(dst)) {
          g.stopped = true;
          return false;
        }
        push(dst);
      }
    }
    return true;
  };

  for (const auto& init : sys.initial_states()) {
    sys.restore(init);
    sys.encode(buf.data());
    auto [idx, fresh] = g.store.insert(buf.data());
    if (!fresh) continue;
    g.parent.push_back(kNoState);
    g.via.push_back(0);
    g.initial.push_back(idx);
    if (!visit_new(idx)) {
      g.stopped = true;
      return g;
    }
  }

  Expansion ex;
  switch (order) {
    case SearchOrder::bfs: {
      // States are numbered in discovery order, so the queue is implicit.
      for (std::uint32_t i = 0; i < g.size(); ++i) {
        expand(sys, g.store.at(i), ex);
        if (!merge(i, ex, [](std::uint32_t) {})) break;
      }
      break;
    }
    case SearchOrder::dfs: {
      std::vector<std::uint32_t> stack(g.initial.rbegin(), g.initial.rend());
      while (!stack.empty()) {
        const std::uint32_t i = stack.back();
        stack.pop_back();
        expand(sys, g.store.at(i), ex);
        if (!merge(i, ex, [&](std::uint32_t d) { stack.push_back(d); })) break;
      }
      break;
    }
    case SearchOrder::parallel_bfs: {
      // Level-synchronous: expand a whole frontier in parallel, then merge
      // serially in frontier order. That reproduces the serial numbering.
      std::vector<std::unique_ptr<System>> workers(omp_get_max_threads());
      for (auto& w : workers) w = quiet_system(cfg);
      std::vector<std::uint32_t> frontier = g.initial;
      std::vector<Expansion> level;
      while (!frontier.empty()) {
        level.resize(frontier.size());
        std::exception_ptr failure;
        const auto n = static_cast<std::ptrdiff_t>(frontier.size());
#pragma omp parallel for schedule(dynamic, 64)
        for (std::ptrdiff_t k = 0; k < n; ++k) {
          try {
            expand(*workers[omp_get_thread_num()], g.store.at(frontier[k]),
                   level[k]);
          } catch (...) {
#pragma omp critical
            failure = std::current_exception();
          }
        }
        if (failure) std::rethrow_exception(failure);
        std::vector<std::uint32_t> next;
        bool go = true;
        for (std::ptrdiff_t k = 0; k < n && go; ++k)
          go = merge(frontier[k], level[k],
                     [&](std::uint32_t d) { next.push_back(d); });
        if (!go) break;
        frontier.swap(next);
      }
      break;
    }
  }

  if (keep_edges) {
    const std::size_t n = g.size();
    g.offsets.assign(n + 1, 0);
    for (const auto& t : triples) ++g.offsets[t.src + 1];
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    g.edges.resize(triples.size());
    std::vector<std::uint32_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& t : triples) g.edges[fill[t.src]++] = Edge{t.dst, t.proc};
  }
  return g;
}

std::vector<std::uint32_t> path_to(const StateGraph& g, std::uint32_t target,
                                   std::uint32_t* root) {
  std::vector<std::uint32_t> procs;
  std::uint32_t s = target;
  while (g.parent[s] != kNoState) {
    procs.push_back(g.via[s]);
    s = g.parent[s];
  }
  std::reverse(procs.begin(), procs.end());
  if (root != nullptr) *root = s;
  return procs;
}

Trace build_trace(const CheckConfig& cfg, const StateGraph& g,
                  std::uint32_t root, const std::vector<std::uint32_t>& procs,
                  std::optional<std::size_t> cycle_start) {
  System sys(cfg);
  sys.decode(g.store.at(root));
  Trace t;
  t.initial = sys.snapshot();
  t.cycle_start = cycle_start;
  for (std::uint32_t p : procs) {
    const Label label = sys.pc(p);
    if (sys.step(p) != StepResult::taken)
      throw std::logic_error("trace step not enabled");
    t.steps.push_back(TraceStep{p, label, sys.last_accesses()});
  }
  return t;
}

}  // namespace asymlock::detail
