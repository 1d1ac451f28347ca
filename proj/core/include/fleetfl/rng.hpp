#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fleetfl {

using Rng = std::mt19937_64;

/// Purpose tags keep streams derived from the same master seed independent.
enum class Stream : std::uint32_t {
  kTrace = 1,
  kProfiles,
  kInit,
  kSelect,
  kShadow,
  kFading,
  kSubsample,
  kBatches,
  kBeamRandomization,
};

/// Deterministic generator keyed by (seed, purpose, keys...). Identical keys
/// always yield identical streams, so independent entities (links, agents,
/// rounds) can be evaluated in any order.
inline Rng make_stream(std::uint64_t seed, Stream purpose,
                       std::initializer_list<std::uint64_t> keys = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(3 + 2 * keys.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  words.push_back(static_cast<std::uint32_t>(purpose));
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace fleetfl
