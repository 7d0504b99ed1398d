#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace peerfl {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent streams: every consumer of randomness gets its own seed derived
// from the run seed plus a stream tag, so adding draws in one place never
// shifts the sequence seen by another.
enum class Stream : std::uint64_t {
  Data = 1,
  Partition,
  Split,
  ModelInit,
  Training,
  Topology,
  EdgeCaps,
  Gossip,
  Mobility,
  Channel,
  Adversary,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::initializer_list<std::uint64_t> ids = {}) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  for (auto id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> ids = {}) {
  return Rng(derive_seed(seed, stream, ids));
}

}  // namespace peerfl
