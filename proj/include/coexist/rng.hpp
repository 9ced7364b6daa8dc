#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace coexist {

/// Derives an independent generator from a user seed and a stream tag so
/// that sub-streams (per chunk, per cell) never share state.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (auto t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

/// 64-bit sub-seed for a tagged stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  auto rng = make_rng(seed, tags);
  return rng();
}

}  // namespace coexist
