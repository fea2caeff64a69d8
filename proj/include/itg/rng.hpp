#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "itg/document.hpp"

namespace itg {

using Rng = std::mt19937_64;

// Stable across platforms and runs (unlike std::hash), so derived seeds and
// hash-based splits are reproducible.
std::uint64_t stable_hash(std::string_view s, std::uint64_t seed = 0);
std::uint64_t stable_hash(const Document& d, std::uint64_t seed = 0);

// splitmix64 finalizer over a combined pair.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return mix_seed(mix_seed(a, b), static_cast<std::uint64_t>(rest)...);
}

}  // namespace itg
