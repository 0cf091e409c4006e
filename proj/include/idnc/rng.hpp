#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace idnc {

using Engine = std::mt19937_64;

// Stream domains. Every random draw in the library comes from an engine
// seeded by (seed, domain, keys...), so schemes that share a key see the
// same numbers (common random numbers) and nothing depends on draw order
// across unrelated parts of a run.
enum class Stream : std::uint64_t {
  erasure = 1,
  initial_phase = 2,
  channel = 3,
  base_station = 4,
  actions = 5,
  feedback = 6,
  instance = 7,
};

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, Stream domain,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(domain)));
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Engine make_stream(std::uint64_t seed, Stream domain,
                          std::initializer_list<std::uint64_t> keys = {}) {
  return Engine(stream_seed(seed, domain, keys));
}

// 53-bit uniform in [0,1). Written out so results do not depend on the
// standard library's distribution implementation.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Engine& eng, double p_true) {
  return uniform01(eng) < p_true;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

}  // namespace idnc
