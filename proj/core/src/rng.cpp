#include "gattaca/rng.hpp"

#include <array>

namespace gattaca {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::string label) : seed_(seed), label_(std::move(label)) {
  const std::uint64_t key = fnv1a64(label_);
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  engine_.seed(seq);
}

RngStream RngStream::substream(std::string_view suffix) const {
  return RngStream(seed_, label_ + "/" + std::string(suffix));
}

void RngStream::discard(std::uint64_t count) {
  engine_.discard(count);
  counter_ += count;
}

std::size_t RngStream::uniform_index(std::size_t bound) {
  std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
  return dist(*this);
}

double RngStream::uniform01() { return std::generate_canonical<double, 64>(*this); }

}  // namespace gattaca
