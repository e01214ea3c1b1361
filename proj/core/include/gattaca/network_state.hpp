#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace gattaca {

/// Fixed-stride bit vector holding one point of a network's state space.
///
/// Bit i is the value of node i. Storage is always kMaxNodes bits wide so
/// states are trivially copyable and never allocate; only the first size()
/// bits are meaningful and the rest stay zero.
class NetworkState {
 public:
  static constexpr std::size_t kMaxNodes = 512;
  static constexpr std::size_t kWordBits = 64;
  static constexpr std::size_t kWords = kMaxNodes / kWordBits;

  NetworkState() = default;
  explicit NetworkState(std::size_t size);

  std::size_t size() const noexcept { return size_; }

  bool get(std::size_t i) const noexcept { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i, bool value) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }
  void flip(std::size_t i) noexcept { words_[i / kWordBits] ^= std::uint64_t{1} << (i % kWordBits); }

  std::size_t popcount() const noexcept;
  std::size_t hamming_distance(const NetworkState& other) const noexcept;

  /// Hex encoding of the bit string x_1 x_2 ... x_n read as a big-endian
  /// number, zero-padded to ceil(n/4) digits; "011" encodes as "3".
  std::string to_hex() const;
  static NetworkState from_hex(std::string_view hex, std::size_t size);

  /// Plain bit string "x_1 x_2 ... x_n", e.g. "011".
  std::string to_bits() const;
  static NetworkState from_bits(std::string_view bits);

  std::size_t hash() const noexcept;

  const std::array<std::uint64_t, kWords>& words() const noexcept { return words_; }

  friend bool operator==(const NetworkState& a, const NetworkState& b) noexcept {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }

  /// Orders states by their value with node 0 as the most significant bit,
  /// which is also the lexicographic order of to_bits() and to_hex().
  friend std::strong_ordering operator<=>(const NetworkState& a, const NetworkState& b) noexcept;

 private:
  std::array<std::uint64_t, kWords> words_{};
  std::uint32_t size_ = 0;
};

}  // namespace gattaca

template <>
struct std::hash<gattaca::NetworkState> {
  std::size_t operator()(const gattaca::NetworkState& s) const noexcept { return s.hash(); }
};
