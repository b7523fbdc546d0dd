#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace dbdtc {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a. Stable across platforms; used for stream names and
/// provenance hashes.
std::uint64_t fnv1a(std::string_view text) noexcept;

/// Independent generator for a named sub-stream of a master seed
/// ("init", "anneal", "draw", "replicate" with index k, ...).
Rng make_stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index = 0);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Requires n > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace dbdtc
