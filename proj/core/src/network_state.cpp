#include "gattaca/network_state.hpp"

#include "gattaca/errors.hpp"

namespace gattaca {

NetworkState::NetworkState(std::size_t size) : size_(static_cast<std::uint32_t>(size)) {
  if (size == 0 || size > kMaxNodes) {
    throw ConfigError("state size must be in [1, " + std::to_string(kMaxNodes) + "], got " +
                      std::to_string(size));
  }
}

std::size_t NetworkState::popcount() const noexcept {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::size_t NetworkState::hamming_distance(const NetworkState& other) const noexcept {
  std::size_t total = 0;
  for (std::size_t k = 0; k < kWords; ++k) {
    total += static_cast<std::size_t>(std::popcount(words_[k] ^ other.words_[k]));
  }
  return total;
}

std::string NetworkState::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (size_ + 3) / 4;
  const std::size_t pad = digits * 4 - size_;
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    unsigned value = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t padded = d * 4 + b;
      value <<= 1;
      if (padded >= pad && get(padded - pad)) value |= 1U;
    }
    out[d] = kDigits[value];
  }
  return out;
}

NetworkState NetworkState::from_hex(std::string_view hex, std::size_t size) {
  NetworkState s(size);
  const std::size_t digits = (size + 3) / 4;
  if (hex.size() != digits) {
    throw ConfigError("hex state '" + std::string(hex) + "' must have " + std::to_string(digits) +
                      " digits for " + std::to_string(size) + " nodes");
  }
  const std::size_t pad = digits * 4 - size;
  for (std::size_t d = 0; d < digits; ++d) {
    const char c = hex[d];
    unsigned value = 0;
    if (c >= '0' && c <= '9') {
      value = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      value = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      value = static_cast<unsigned>(c - 'A' + 10);
    } else {
      throw ConfigError("invalid hex digit in state '" + std::string(hex) + "'");
    }
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t padded = d * 4 + b;
      const bool bit = (value >> (3 - b)) & 1U;
      if (padded < pad) {
        if (bit) throw ConfigError("hex state '" + std::string(hex) + "' has bits beyond node count");
      } else {
        s.set(padded - pad, bit);
      }
    }
  }
  return s;
}

std::string NetworkState::to_bits() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) out[i] = '1';
  }
  return out;
}

NetworkState NetworkState::from_bits(std::string_view bits) {
  NetworkState s(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      s.set(i, true);
    } else if (bits[i] != '0') {
      throw ConfigError("invalid bit string '" + std::string(bits) + "'");
    }
  }
  return s;
}

std::size_t NetworkState::hash() const noexcept {
  // splitmix64 finalizer folded over the used words
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ size_;
  const std::size_t used = (size_ + kWordBits - 1) / kWordBits;
  for (std::size_t k = 0; k < used; ++k) {
    std::uint64_t z = h + words_[k] + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    h = z ^ (z >> 31);
  }
  return static_cast<std::size_t>(h);
}

std::strong_ordering operator<=>(const NetworkState& a, const NetworkState& b) noexcept {
  if (a.size_ != b.size_) return a.size_ <=> b.size_;
  for (std::size_t k = 0; k < NetworkState::kWords; ++k) {
    const std::uint64_t diff = a.words_[k] ^ b.words_[k];
    if (diff != 0) {
      const int lowest = std::countr_zero(diff);
      // the lower node index is the more significant bit
      return ((a.words_[k] >> lowest) & 1U) ? std::strong_ordering::greater : std::strong_ordering::less;
    }
  }
  return std::strong_ordering::equal;
}

}  // namespace gattaca
