#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hesitancy {

using Rng = std::mt19937_64;

// Derives an independent seed for a named substream ("fit", "synth",
// "shuffle", "subsample", ...) of a root seed. Stable across platforms.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return Rng(substream_seed(root, name, index));
}

// Uniform on [0, 1) from the top 53 bits; identical across standard libraries,
// unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller; one draw per call.
double std_normal(Rng& rng);

}  // namespace hesitancy
