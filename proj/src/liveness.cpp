// Fair-lasso search for the leads-to properties of the process body.
//
// Every property is checked in the form
//     [](A => (C ~> D))
// read as: once A holds, no weakly fair behavior reaches a C state and then
// avoids D forever, counting from the A state up to the first D state. A
// violation is a fair strongly connected component of the not-D part of the
// graph that is reachable from a C state. A component is fair when it has a
// cycle (or is a single state where nothing fair can move) and every process
// either steps inside it or is disabled, or parked at an exempt ncs, at one of
// its states.

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <stdexcept>
#include <unordered_map>

#include "state_space.hpp"

namespace asymlock::detail {

namespace {

using Clock = std::chrono::steady_clock;
using Pred = std::function<bool(std::uint32_t)>;

struct Model {
  const CheckConfig& cfg;
  StateGraph g;
  std::size_t procs;
  std::vector<Label> pcs;               // state * procs + p
  std::vector<std::uint32_t> enabled;   // bitmask of processes with an edge
  std::uint32_t all;

  Label pc(std::uint32_t s, std::size_t p) const { return pcs[s * procs + p]; }

  // Processes that weak fairness does not push at `s`.
  std::uint32_t idle(std::uint32_t s) const {
    std::uint32_t m = ~enabled[s] & all;
    if (cfg.ncs_exempt)
      for (std::size_t p = 0; p < procs; ++p)
        if (pc(s, p) == Label::ncs) m |= 1u << p;
    return m;
  }
};

Model build_model(const CheckConfig& cfg) {
  Model m{cfg, search(cfg, SearchOrder::bfs, true, {}),
          static_cast<std::size_t>(cfg.num_processes()), {}, {}, 0};
  if (m.procs > 32) throw std::invalid_argument("too many processes");
  m.all = m.procs == 32 ? ~0u : (1u << m.procs) - 1;
  const std::size_t n = m.g.size();
  System sys(cfg);
  m.pcs.resize(n * m.procs);
  m.enabled.assign(n, 0);
  for (std::uint32_t s = 0; s < n; ++s) {
    sys.decode(m.g.store.at(s));
    for (std::size_t p = 0; p < m.procs; ++p) m.pcs[s * m.procs + p] = sys.pc(p);
    for (auto e = m.g.offsets[s]; e < m.g.offsets[s + 1]; ++e)
      m.enabled[s] |= 1u << m.g.edges[e].proc;
  }
  return m;
}

struct Lasso {
  std::uint32_t root;
  std::vector<std::uint32_t> procs;
  std::size_t cycle_start;
};

class LeadsTo {
 public:
  LeadsTo(const Model& m, const Pred& a, const Pred& c, const Pred& d)
      : m_(m), c_(c), d_(d), n_(m.g.size()) {
    closure(a);
    components();
    backward();
  }

  std::optional<Lasso> violation() const {
    for (std::uint32_t s = 0; s < n_; ++s)
      if (bad_[s] && c_(s)) return lasso(s);
    return std::nullopt;
  }

 private:
  bool in(std::uint32_t s) const { return in_[s] != 0; }

  template <class F>
  void for_edges(std::uint32_t s, F&& f) const {
    for (auto e = m_.g.offsets[s]; e < m_.g.offsets[s + 1]; ++e)
      f(m_.g.edges[e]);
  }

  // States reachable from an A state without passing a D state.
  void closure(const Pred& a) {
    in_.assign(n_, 0);
    cpar_.assign(n_, kNoState);
    cvia_.assign(n_, 0);
    std::deque<std::uint32_t> q;
    for (std::uint32_t s = 0; s < n_; ++s)
      if (!d_(s) && a(s)) {
        in_[s] = 1;
        q.push_back(s);
      }
    while (!q.empty()) {
      const auto s = q.front();
      q.pop_front();
      for_edges(s, [&](const Edge& e) {
        if (in(e.to) || d_(e.to)) return;
        in_[e.to] = 1;
        cpar_[e.to] = s;
        cvia_[e.to] = static_cast<std::uint8_t>(e.proc);
        q.push_back(e.to);
      });
    }
  }

  // Iterative Tarjan over the closure, then per-component fairness.
  void components() {
    comp_.assign(n_, kNoState);
    std::vector<std::uint32_t> index(n_, kNoState), low(n_, 0);
    std::vector<std::uint32_t> stack;
    std::vector<std::uint8_t> on_stack(n_, 0);
    struct Frame {
      std::uint32_t s;
      std::uint32_t edge;
    };
    std::vector<Frame> calls;
    std::uint32_t counter = 0, ncomp = 0;
    for (std::uint32_t root = 0; root < n_; ++root) {
      if (!in(root) || index[root] != kNoState) continue;
      calls.push_back({root, m_.g.offsets[root]});
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = 1;
      while (!calls.empty()) {
        auto& f = calls.back();
        if (f.edge < m_.g.offsets[f.s + 1]) {
          const auto t = m_.g.edges[f.edge++].to;
          if (!in(t)) continue;
          if (index[t] == kNoState) {
            index[t] = low[t] = counter++;
            stack.push_back(t);
            on_stack[t] = 1;
            calls.push_back({t, m_.g.offsets[t]});
          } else if (on_stack[t]) {
            low[f.s] = std::min(low[f.s], index[t]);
          }
          continue;
        }
        const auto s = f.s;
        calls.pop_back();
        if (!calls.empty())
          low[calls.back().s] = std::min(low[calls.back().s], low[s]);
        if (low[s] != index[s]) continue;
        std::uint32_t t;
        do {
          t = stack.back();
          stack.pop_back();
          on_stack[t] = 0;
          comp_[t] = ncomp;
        } while (t != s);
        ++ncomp;
      }
    }

    std::vector<std::uint32_t> stepped(ncomp, 0), idle(ncomp, 0);
    for (std::uint32_t s = 0; s < n_; ++s) {
      if (!in(s)) continue;
      const auto c = comp_[s];
      idle[c] |= m_.idle(s);
      for_edges(s, [&](const Edge& e) {
        if (in(e.to) && comp_[e.to] == c) stepped[c] |= 1u << e.proc;
      });
    }
    fair_.assign(ncomp, 0);
    stepped_ = stepped;
    for (std::uint32_t c = 0; c < ncomp; ++c)
      fair_[c] = (stepped[c] | idle[c]) == m_.all;
  }

  // States of the closure that can reach a fair component.
  void backward() {
    bad_.assign(n_, 0);
    next_.assign(n_, kNoState);
    nvia_.assign(n_, 0);
    std::vector<std::uint32_t> roff(n_ + 1, 0);
    for (std::uint32_t s = 0; s < n_; ++s)
      if (in(s))
        for_edges(s, [&](const Edge& e) {
          if (in(e.to)) ++roff[e.to + 1];
        });
    for (std::uint32_t s = 0; s < n_; ++s) roff[s + 1] += roff[s];
    std::vector<Edge> redges(roff[n_]);
    std::vector<std::uint32_t> fill(roff.begin(), roff.end() - 1);
    for (std::uint32_t s = 0; s < n_; ++s)
      if (in(s))
        for_edges(s, [&](const Edge& e) {
          if (in(e.to)) redges[fill[e.to]++] = Edge{s, e.proc};
        });

    std::deque<std::uint32_t> q;
    for (std::uint32_t s = 0; s < n_; ++s)
      if (in(s) && fair_[comp_[s]]) {
        bad_[s] = 1;
        q.push_back(s);
      }
    while (!q.empty()) {
      const auto v = q.front();
      q.pop_front();
      for (auto k = roff[v]; k < roff[v + 1]; ++k) {
        const auto u = redges[k].to;
        if (bad_[u]) continue;
        bad_[u] = 1;
        next_[u] = v;
        nvia_[u] = static_cast<std::uint8_t>(redges[k].proc);
        q.push_back(u);
      }
    }
  }

  // Shortest walk inside component `c` from `from` to a state satisfying
  // `goal`; appends the processes taken and returns the end state.
  std::uint32_t walk(std::uint32_t from, std::uint32_t c,
                     const std::function<bool(std::uint32_t)>& goal,
                     std::vector<std::uint32_t>& out) const {
    if (goal(from)) return from;
    std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>>
        par;
    std::deque<std::uint32_t> q{from};
    par[from] = {kNoState, 0};
    while (!q.empty()) {
      const auto s = q.front();
      q.pop_front();
      std::uint32_t hit = kNoState;
      for_edges(s, [&](const Edge& e) {
        if (hit != kNoState || !in(e.to) || comp_[e.to] != c) return;
        if (par.count(e.to)) return;
        par[e.to] = {s, e.proc};
        if (goal(e.to)) hit = e.to;
        q.push_back(e.to);
      });
      if (hit == kNoState) continue;
      std::vector<std::uint32_t> rev;
      for (auto t = hit; t != from; t = par[t].first) rev.push_back(par[t].second);
      out.insert(out.end(), rev.rbegin(), rev.rend());
      return hit;
    }
    throw std::logic_error("component walk failed");
  }

  Lasso lasso(std::uint32_t s) const {
    Lasso l{};
    // Closure part, back to its A root.
    std::vector<std::uint32_t> mid;
    std::uint32_t a = s;
    while (cpar_[a] != kNoState) {
      mid.push_back(cvia_[a]);
      a = cpar_[a];
    }
    std::reverse(mid.begin(), mid.end());
    l.procs = path_to(m_.g, a, &l.root);
    l.procs.insert(l.procs.end(), mid.begin(), mid.end());
    std::uint32_t e = s;
    while (next_[e] != kNoState) {
      l.procs.push_back(nvia_[e]);
      e = next_[e];
    }
    l.cycle_start = l.procs.size();

    // One round through the component that gives every process its due.
    const auto c = comp_[e];
    std::uint32_t at = e;
    for (std::size_t p = 0; p < m_.procs; ++p) {
      const std::uint32_t bit = 1u << p;
      if (m_.idle(at) & bit) continue;
      if (stepped_[c] & bit) {
        at = walk(at, c, [&](std::uint32_t u) {
          bool has = false;
          for_edges(u, [&](const Edge& x) {
            has |= x.proc == p && in(x.to) && comp_[x.to] == c;
          });
          return has;
        }, l.procs);
        std::uint32_t to = kNoState;
        for_edges(at, [&](const Edge& x) {
          if (to == kNoState && x.proc == p && in(x.to) && comp_[x.to] == c)
            to = x.to;
        });
        l.procs.push_back(static_cast<std::uint32_t>(p));
        at = to;
      } else {
        at = walk(at, c, [&](std::uint32_t u) { return (m_.idle(u) & bit) != 0; },
                  l.procs);
      }
    }
    walk(at, c, [&](std::uint32_t u) { return u == e; }, l.procs);
    return l;
  }

  const Model& m_;
  const Pred& c_;
  const Pred& d_;
  std::size_t n_;
  std::vector<std::uint8_t> in_;
  std::vector<std::uint32_t> cpar_;
  std::vector<std::uint8_t> cvia_;
  std::vector<std::uint32_t> comp_;
  std::vector<std::uint8_t> fair_;
  std::vector<std::uint32_t> stepped_;
  std::vector<std::uint8_t> bad_;
  std::vector<std::uint32_t> next_;
  std::vector<std::uint8_t> nvia_;
};

// First-come precedence for GlobalFairness: once i waits at gwait while j is
// at enter, j must not reach cs before i does. Product search over
// (state, armed).
std::optional<std::vector<std::uint32_t>> overtaken(const Model& m,
                                                    std::size_t i,
                                                    std::size_t j,
                                                    std::uint32_t* root) {
  const std::size_t n = m.g.size();
  auto arm = [&](std::uint32_t s, bool armed) {
    if (m.pc(s, i) == Label::cs) return false;
    return armed || (m.pc(s, i) == Label::gwait && m.pc(s, j) == Label::enter);
  };
  std::vector<std::uint32_t> par(2 * n, kNoState);
  std::vector<std::uint8_t> via(2 * n, 0), seen(2 * n, 0);
  std::deque<std::uint32_t> q;
  for (auto s : m.g.initial) {
    const auto x = 2 * s + (arm(s, false) ? 1 : 0);
    seen[x] = 1;
    q.push_back(x);
  }
  while (!q.empty()) {
    const auto x = q.front();
    q.pop_front();
    const std::uint32_t s = x / 2;
    const bool armed = x % 2;
    for (auto k = m.g.offsets[s]; k < m.g.offsets[s + 1]; ++k) {
      const auto& e = m.g.edges[k];
      const auto y = 2 * e.to + (arm(e.to, armed) ? 1 : 0);
      if (seen[y]) continue;
      seen[y] = 1;
      par[y] = x;
      via[y] = static_cast<std::uint8_t>(e.proc);
      if (armed && m.pc(e.to, j) == Label::cs) {
        std::vector<std::uint32_t> procs;
        auto z = y;
        for (; par[z] != kNoState; z = par[z]) procs.push_back(via[z]);
        std::reverse(procs.begin(), procs.end());
        *root = z / 2;
        return procs;
      }
      q.push_back(y);
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<PropertyReport> check_liveness(const CheckConfig& cfg) {
  const auto t0 = Clock::now();
  const Model m = build_model(cfg);
  const double build = std::chrono::duration<double>(Clock::now() - t0).count();
  const std::size_t np = m.procs;

  auto report = [&](std::string name) {
    PropertyReport r;
    r.property = std::move(name);
    r.states = m.g.size();
    r.transitions = m.g.transitions;
    if (m.g.cap_hit) {
      r.verdict = Verdict::inconclusive;
      r.detail = "state cap hit";
    }
    return r;
  };
  auto timed = [&](PropertyReport& r, Clock::time_point t1) {
    r.seconds = build + std::chrono::duration<double>(Clock::now() - t1).count();
  };
  auto at = [&](std::size_t p, Label l) -> Pred {
    return [&m, p, l](std::uint32_t s) { return m.pc(s, p) == l; };
  };
  const Pred always = [](std::uint32_t) { return true; };
  auto any_at = [&](Label l) -> Pred {
    return [&m, l](std::uint32_t s) {
      for (std::size_t p = 0; p < m.procs; ++p)
        if (m.pc(s, p) == l) return true;
      return false;
    };
  };
  // Checks one instance; on violation fills the report and returns true.
  auto refute = [&](PropertyReport& r, const Pred& a, const Pred& c,
                    const Pred& d, const std::string& who) {
    auto l = LeadsTo(m, a, c, d).violation();
    if (!l) return false;
    r.verdict = Verdict::violated;
    r.counterexample = build_trace(cfg, m.g, l->root, l->procs, l->cycle_start);
    r.detail = who;
    return true;
  };

  std::vector<PropertyReport> out;
  if (m.g.cap_hit) {
    for (const char* name :
         {"StarvationFree", "DeadAndLivelockFree",
          "ExecsCriticalSectionInfinitelyOften", "CohortFairness",
          "GlobalFairness"}) {
      out.push_back(report(name));
      timed(out.back(), Clock::now());
    }
    return out;
  }

  {
    const auto t1 = Clock::now();
    auto r = report("StarvationFree");
    for (std::size_t i = 0; i < np; ++i)
      if (refute(r, always, at(i, Label::enter), at(i, Label::cs),
                 "process " + std::to_string(i) + " starves"))
        break;
    timed(r, t1);
    out.push_back(std::move(r));
  }
  {
    const auto t1 = Clock::now();
    auto r = report("DeadAndLivelockFree");
    refute(r, always, any_at(Label::enter), any_at(Label::cs),
           "no process reaches cs");
    timed(r, t1);
    out.push_back(std::move(r));
  }
  {
    const auto t1 = Clock::now();
    auto r = report("ExecsCriticalSectionInfinitelyOften");
    for (std::size_t i = 0; i < np; ++i)
      if (refute(r, always, always, at(i, Label::cs),
                 "process " + std::to_string(i) + " stops reaching cs"))
        break;
    timed(r, t1);
    out.push_back(std::move(r));
  }
  for (auto [name, wait] : {std::pair{"CohortFairness", Label::cwait},
                            std::pair{"GlobalFairness", Label::gwait}}) {
    const auto t1 = Clock::now();
    auto r = report(name);
    for (std::size_t i = 0; i < np && r.verdict == Verdict::holds; ++i)
      for (std::size_t j = 0; j < np && r.verdict == Verdict::holds; ++j) {
        if (i == j) continue;
        const Pred a = [&m, i, j, w = wait](std::uint32_t s) {
          return m.pc(s, i) == w && m.pc(s, j) == Label::enter;
        };
        const std::string who =
            "i=" + std::to_string(i) + " j=" + std::to_string(j);
        if (refute(r, a, at(i, Label::cs), at(j, Label::cs), who)) break;
        if (wait != Label::gwait) continue;
        std::uint32_t root = 0;
        if (auto procs = overtaken(m, i, j, &root)) {
          r.verdict = Verdict::violated;
          r.counterexample = build_trace(cfg, m.g, root, *procs);
          r.detail = who + " overtaken";
        }
      }
    timed(r, t1);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace asymlock::detail
