#ifndef CRE_RNG_H_
#define CRE_RNG_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cre/digest.h"

namespace cre {

// std::mt19937_64 is fully specified by the standard, but the
// <random> distributions are not, so sampling here uses its own bounded draw
// to stay byte-reproducible across standard libraries.

// Mixes a user seed with a salt (e.g. a relation name) so that each stratum
// gets an independent stream that does not shift when other strata change.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt) {
  std::string material = std::to_string(seed);
  material.push_back('\x1f');
  material.append(salt);
  const std::string hex = sha256_hex(material);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % n;
}

// Fisher-Yates.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_below(gen, i)]);
  }
}

}  // namespace cre

#endif  // CRE_RNG_H_
