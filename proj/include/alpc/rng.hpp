// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_RNG_HPP
#define ALPC_RNG_HPP

#include <cstdint>
#include <random>

namespace alpc {

// All randomness in the library flows from explicit seeds through this
// helper; nothing reads the clock or an entropy device.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-stream seed for (master, stream, slot).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t slot = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + slot);
}

}  // namespace alpc

#endif  // ALPC_RNG_HPP
