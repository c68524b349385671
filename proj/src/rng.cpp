#include "expphi/rng.hpp"

namespace expphi {
namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v + kGolden)); }
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string to_string(StreamPurpose purpose) {
  switch (purpose) {
    case StreamPurpose::initial_state: return "initial_state";
    case StreamPurpose::dynamics_noise: return "dynamics_noise";
    case StreamPurpose::proposal: return "proposal";
    case StreamPurpose::resampling: return "resampling";
    case StreamPurpose::zero_mode: return "zero_mode";
    case StreamPurpose::test: return "test";
  }
  return "unknown";
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t replica, StreamPurpose purpose)
    : seed_(seed), replica_(replica), purpose_(purpose) {
  key_ = combine(combine(combine(0x6578705068693221ULL, seed), replica),
                 static_cast<std::uint64_t>(purpose));
}

RngStream RngStream::substream(std::uint64_t index) const {
  RngStream s = *this;
  s.key_ = combine(key_ ^ (static_cast<std::uint64_t>(depth_ + 1) << 56), index);
  s.depth_ = depth_ + 1;
  return s;
}

CounterEngine::result_type CounterEngine::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

}  // namespace expphi
