#pragma once

#include <cstdint>

namespace extkm {

/// splitmix64 step (Steele, Lea, Flood 2014). Full-period on 64-bit state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent child seed. Used for replicate r of a study
/// (seed, r) and for observation streams, so that output never depends
/// on how work is split across threads.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x632be59bd9b4e019ULL * (index + 1));
  // two scrambling rounds decorrelate nearby indices
  splitmix64(s);
  return splitmix64(s);
}

/// Small counter-style generator. One instance per observation or
/// replicate; consuming a fixed number of draws keeps results identical
/// under any parallel schedule.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}
  RngStream(std::uint64_t seed, std::uint64_t index) : state_(derive_seed(seed, index)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform draw on the open interval (0,1); never returns 0 or 1.
  double next_u01() {
    const std::uint64_t bits = next_u64() >> 11; // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

} // namespace extkm
