#pragma once

// Internal: hashed state store and the search engine behind Checker.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "asymlock/checker.hpp"

namespace asymlock::detail {

inline constexpr std::uint32_t kNoState =
    std::numeric_limits<std::uint32_t>::max();

// Fixed-width encoded states in one arena, deduplicated through a hash set of
// arena indices.
class StateStore {
 public:
  explicit StateStore(std::size_t width);

  std::size_t width() const { return width_; }
  std::size_t size() const { return arena_->size() / width_; }
  const std::uint8_t* at(std::uint32_t i) const {
    return arena_->data() + static_cast<std::size_t>(i) * width_;
  }
  // Returns (index, inserted).
  std::pair<std::uint32_t, bool> insert(const std::uint8_t* bytes);

 private:
  // The arena lives on the heap so the hash functors stay valid when the
  // store is moved.
  using Arena = std::vector<std::uint8_t>;
  struct Hash {
    const Arena* arena;
    std::size_t width;
    std::size_t operator()(std::uint32_t i) const;
  };
  struct Eq {
    const Arena* arena;
    std::size_t width;
    bool operator()(std::uint32_t a, std::uint32_t b) const;
  };

  std::size_t width_;
  std::unique_ptr<Arena> arena_;
  std::unordered_set<std::uint32_t, Hash, Eq> index_;
};

struct Edge {
  std::uint32_t to;
  std::uint32_t proc;
};

struct StateGraph {
  StateStore store;
  std::vector<std::uint32_t> parent;   // kNoState for initial states
  std::vector<std::uint8_t> via;       // process whose step discovered it
  std::vector<std::uint32_t> initial;  // indices of the initial states
  // CSR adjacency, filled when edges are requested.
  std::vector<std::uint32_t> offsets;
  std::vector<Edge> edges;
  std::size_t transitions = 0;
  bool cap_hit = false;
  bool stopped = false;

  explicit StateGraph(std::size_t width) : store(width) {}
  std::size_t size() const { return store.size(); }
};

struct SearchHooks {
  // Newly discovered state, with `sys` positioned on it. Return false to stop.
  std::function<bool(std::uint32_t, const System&)> on_state;
  // Every transition, including ones into known states. Return false to stop.
  std::function<bool(std::uint32_t src, std::uint32_t dst, std::uint32_t proc,
                     Label label, const std::vector<AccessRecord>&)>
      on_transition;
};

StateGraph search(const CheckConfig& cfg, SearchOrder order, bool keep_edges,
                  const SearchHooks& hooks);

// Process sequence from an initial state to `target`, following parents.
std::vector<std::uint32_t> path_to(const StateGraph& g, std::uint32_t target,
                                   std::uint32_t* root);

// Materializes a trace by replaying `procs` from initial state `root`.
Trace build_trace(const CheckConfig& cfg, const StateGraph& g,
                  std::uint32_t root, const std::vector<std::uint32_t>& procs,
                  std::optional<std::size_t> cycle_start = std::nullopt);

std::vector<PropertyReport> check_liveness(const CheckConfig& cfg);

}  // namespace asymlock::detail
