// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace evaba {

/// Party identifier, 1-based as in the protocol description.
class PartyId {
 public:
  constexpr PartyId() = default;
  constexpr explicit PartyId(int index) : index_(index) {}

  constexpr int index() const { return index_; }
  constexpr bool valid(int n) const { return index_ >= 1 && index_ <= n; }

  friend constexpr auto operator<=>(PartyId, PartyId) = default;

 private:
  int index_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, PartyId p) { return os << 'p' << p.index(); }

/// Proposal payload. Opaque bytes as far as the protocol is concerned.
using Value = std::string;

/// Resilience parameters. Every barrier in the protocol is expressed through these.
struct Quorum {
  int n = 4;
  int f = 1;

  constexpr int big() const { return n - f; }        // signature / barrier threshold
  constexpr int small() const { return f + 1; }      // coin reconstruction, committee size
  constexpr bool optimal() const { return n == 3 * f + 1; }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace evaba

template <>
struct std::hash<evaba::PartyId> {
  std::size_t operator()(evaba::PartyId p) const noexcept { return std::hash<int>{}(p.index()); }
};
