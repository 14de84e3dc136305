#pragma once

#include <cstdint>
#include <random>

namespace fairsched {

using Rng = std::mt19937_64;

// Independent sub-streams derived from one master seed. The numeric values are
// part of the reproducibility contract; do not reorder.
enum class Stream : std::uint64_t {
  MeanSnr = 1,
  Fading = 2,
  TrafficPhase = 3,
  BlockError = 4,
  Exploration = 5,
  Replay = 6,
  WeightInit = 7,
};

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
  return mix64(mix64(master) ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
}

inline Rng make_rng(std::uint64_t master, Stream stream) {
  return Rng(derive_seed(master, stream));
}

// Episode e > 0 re-seeds every stream except MeanSnr, so the cell (user mean
// SNRs) stays the same while fading, traffic and errors are fresh. Episode 0
// is the plain master seed.
constexpr std::uint64_t episode_seed(std::uint64_t master, Stream stream, std::uint64_t episode) {
  if (episode == 0 || stream == Stream::MeanSnr) return derive_seed(master, stream);
  return derive_seed(mix64(master ^ (episode * 0x9e3779b97f4a7c15ULL)), stream);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t episode) {
  return Rng(episode_seed(master, stream, episode));
}

}  // namespace fairsched
