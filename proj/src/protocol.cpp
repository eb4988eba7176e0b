#include "asymlock/protocol.hpp"

#include <array>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace asymlock {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "ncs",   "enter", "p2", "cs", "exit", "g1",  "gwait", "g2",
    "g3",    "g4",    "c1", "swap", "cwait", "c2", "c3",  "c4",
    "c5",    "c6",    "c7", "c8", "c9",  "c10", "rnext", "cas",
    "r1",    "r2",    "r3", "tas", "rel", "pset", "pclr",
};

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#endif
}

}  // namespace

std::string_view to_string(Label l) {
  return kLabelNames[static_cast<std::size_t>(l)];
}

std::optional<Label> label_from_string(std::string_view s) {
  for (int i = 0; i < kNumLabels; ++i)
    if (kLabelNames[i] == s) return static_cast<Label>(i);
  return std::nullopt;
}

void SpinWait::pause() {
  if (++rounds_ < 16) {
    cpu_relax();
  } else {
    std::this_thread::yield();
  }
}

}  // namespace asymlock
