#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace expphi {

enum class StreamPurpose : std::uint32_t {
  initial_state = 1,
  dynamics_noise = 2,
  proposal = 3,
  resampling = 4,
  zero_mode = 5,
  test = 99,
};

std::string to_string(StreamPurpose purpose);

/// Label of a reproducible random stream: (seed, replica, purpose) plus an
/// optional chain of substream indices (time step, level, sample, ...).
///
/// The key is a hash of the full label, so streams are addressable without
/// advancing any shared state, and identical labels give identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t replica, StreamPurpose purpose);

  RngStream substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replica() const { return replica_; }
  StreamPurpose purpose() const { return purpose_; }
  std::uint64_t key() const { return key_; }
  int depth() const { return depth_; }

 private:
  std::uint64_t seed_;
  std::uint64_t replica_;
  StreamPurpose purpose_;
  std::uint64_t key_;
  int depth_ = 0;
};

/// Counter-based 64-bit generator: the n-th output is splitmix64(key + n * golden).
/// Satisfies UniformRandomBitGenerator.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  explicit CounterEngine(const RngStream& stream) : key_(stream.key()) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace expphi
