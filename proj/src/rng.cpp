#include "cfsec/rng.hpp"

#include <array>

namespace cfsec {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Engine derive_stream(std::uint64_t root_seed, StreamPurpose purpose,
                     std::uint64_t index_a, std::uint64_t index_b) {
  std::uint64_t h = splitmix64(root_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ index_a);
  h = splitmix64(h ^ (index_b + 0x632be59bd9b4e019ULL));
  std::array<std::uint32_t, 8> words{};
  std::uint64_t s = h;
  for (std::size_t i = 0; i < words.size(); i += 2) {
    s = splitmix64(s);
    words[i] = static_cast<std::uint32_t>(s);
    words[i + 1] = static_cast<std::uint32_t>(s >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace cfsec
