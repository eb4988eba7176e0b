#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace asymlock {

struct NodeId {
  std::uint16_t index = 0;
  friend constexpr bool operator==(NodeId, NodeId) = default;
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

// A process lives on exactly one node for its whole lifetime. `serial` is the
// dense system-wide index assigned by Memory::add_process.
struct ProcId {
  NodeId node;
  std::uint16_t local_index = 0;
  std::uint32_t serial = 0;
  friend constexpr bool operator==(ProcId, ProcId) = default;
};

struct RegisterId {
  NodeId node;
  std::uint32_t slot = 0;
  friend constexpr bool operator==(RegisterId, RegisterId) = default;
  friend constexpr auto operator<=>(RegisterId, RegisterId) = default;
};

// Contents of one 8-byte register: Null, a small signed integer, or a
// reference to another register. The three kinds never compare equal.
//
// Encoding (two tag bits at the top):
//   00 -> Null (raw value 0)
//   01 -> integer, low 62 bits two's complement
//   10 -> reference, node in bits 32..47, slot in bits 0..31
class Word {
 public:
  constexpr Word() = default;

  static constexpr Word null() { return Word{}; }
  static constexpr Word integer(std::int64_t v) {
    return Word{kIntTag | (static_cast<std::uint64_t>(v) & kPayloadMask)};
  }
  static constexpr Word ref(RegisterId r) {
    return Word{kRefTag | (static_cast<std::uint64_t>(r.node.index) << 32) |
                r.slot};
  }
  static constexpr Word from_raw(std::uint64_t raw) { return Word{raw}; }

  constexpr bool is_null() const { return raw_ == 0; }
  constexpr bool is_int() const { return (raw_ & kTagMask) == kIntTag; }
  constexpr bool is_ref() const { return (raw_ & kTagMask) == kRefTag; }

  constexpr std::int64_t as_int() const {
    // sign-extend the 62-bit payload
    return static_cast<std::int64_t>(raw_ << 2) >> 2;
  }
  constexpr RegisterId as_ref() const {
    return RegisterId{NodeId{static_cast<std::uint16_t>(raw_ >> 32)},
                      static_cast<std::uint32_t>(raw_)};
  }
  constexpr std::uint64_t raw() const { return raw_; }

  friend constexpr bool operator==(Word, Word) = default;

 private:
  constexpr explicit Word(std::uint64_t raw) : raw_(raw) {}

  static constexpr std::uint64_t kTagMask = 0xC000000000000000ULL;
  static constexpr std::uint64_t kPayloadMask = ~kTagMask;
  static constexpr std::uint64_t kIntTag = 0x4000000000000000ULL;
  static constexpr std::uint64_t kRefTag = 0x8000000000000000ULL;

  std::uint64_t raw_ = 0;
};

std::string to_string(NodeId n);
std::string to_string(RegisterId r);
std::string to_string(ProcId p);
// "null", "-1", "&n1.4"
std::string to_string(Word w);

}  // namespace asymlock
