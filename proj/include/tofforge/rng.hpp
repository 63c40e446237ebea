// rng.hpp -- counter-based random streams keyed by (seed, scenario, replicate)
//
// Every random draw in the toolkit comes from an RngStream derived from a
// master seed plus the coordinates of the work item it belongs to. Streams
// never share state, so results do not depend on worker count or the order
// in which work items are scheduled.
#pragma once

#include <cstdint>
#include <limits>

namespace tofforge {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// What a stream is used for. Mixed into the key so that e.g. thinning and
/// histogram sampling of the same record never see correlated draws.
enum class StreamPurpose : std::uint64_t {
  histogram = 0x68697374ull,
  thinning  = 0x7468696eull,
  folds     = 0x666f6c64ull,
  shuffle   = 0x73687566ull,
  scene     = 0x7363656eull,
  test      = 0x74657374ull,
};

/// Counter-based generator: output i is splitmix64(key + i * gamma).
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr RngStream(std::uint64_t key) noexcept : key_{key} {}

  /// Stream for one work item.
  static constexpr RngStream derive(std::uint64_t master_seed, StreamPurpose purpose,
                                    std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
    std::uint64_t k = splitmix64(master_seed ^ static_cast<std::uint64_t>(purpose));
    k = splitmix64(k ^ splitmix64(a + 0x632BE59BD9B4E019ull));
    k = splitmix64(k ^ splitmix64(b + 0x85157AF5ull));
    return RngStream{k};
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return splitmix64(key_ + counter_ * 0xD1342543DE82EF95ull);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tofforge
