#pragma once

#include <cstdint>
#include <random>

namespace gcb {

using Rng = std::mt19937_64;

/// Purpose tags of derived random streams.
enum class StreamPurpose : std::uint8_t {
  Prior = 1,
  Environment = 2,
  Agent = 3,
  Oracle = 4,
  Audit = 5,
  Probe = 6,
  Stress = 7,
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the stream identified by (base, replicate, node, purpose).
///
/// The tuple is packed injectively into one word (replicate: 32 bits, node:
/// 24 bits, purpose: 8 bits) and pushed through a bijection together with the
/// mixed base seed, so two distinct tuples never share a seed within a run.
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint32_t replicate, std::uint32_t node,
                                    StreamPurpose purpose) {
  const std::uint64_t key = (static_cast<std::uint64_t>(replicate) << 32) |
                            (static_cast<std::uint64_t>(node & 0xFFFFFFu) << 8) |
                            static_cast<std::uint64_t>(purpose);
  return mix64(mix64(base) + key);
}

inline Rng make_stream(std::uint64_t base, std::uint32_t replicate, std::uint32_t node, StreamPurpose purpose) {
  return Rng(stream_seed(base, replicate, node, purpose));
}

}  // namespace gcb
