#pragma once

#include <cstdint>
#include <random>

namespace capscale {

using Rng = std::mt19937_64;

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// Uniform double in the open interval (0, 1) from 53 high bits.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Child seed for the k-th work item of a parent stream. Trials derive their
/// seeds through this, so the fan-out is identical for any worker count.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t k) noexcept {
  return hash_combine(mix64(parent), k);
}

inline double uniform01(Rng& rng) { return to_open_unit(rng()); }

}  // namespace capscale
