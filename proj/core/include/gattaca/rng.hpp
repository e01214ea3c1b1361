#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace gattaca {

/// Reproducible random stream identified by (seed, label).
///
/// Identical (seed, label) pairs produce identical draw sequences; distinct
/// labels seed independent engines. counter() is the number of raw engine
/// words consumed so far, so a stream position can be restored with
/// RngStream(seed, label).discard(counter).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string label);

  /// Child stream with label "<label>/<suffix>" under the same seed.
  RngStream substream(std::string_view suffix) const;

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t counter() const noexcept { return counter_; }

  void discard(std::uint64_t count);

  /// Uniform integer in [0, bound).
  std::size_t uniform_index(std::size_t bound);
  /// Uniform real in [0, 1).
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }

  // UniformRandomBitGenerator interface, for std distributions / shuffles.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() {
    ++counter_;
    return engine_();
  }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 engine_;
};

/// 64-bit FNV-1a over bytes; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace gattaca
