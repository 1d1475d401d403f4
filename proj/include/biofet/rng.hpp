#pragma once

#include <cstdint>
#include <random>

namespace biofet {

// SplitMix64 finalizer. Used to derive statistically independent engine
// seeds from (master seed, stream index) pairs so that parallel trials are
// reproducible regardless of execution order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^
                    (0x9E3779B97F4A7C15ull * (stream + 1)));
}

inline std::mt19937_64 make_engine(std::uint64_t master,
                                   std::uint64_t stream) {
  return std::mt19937_64(derive_seed(master, stream));
}

} // namespace biofet
