#include "scatterid/rng.hpp"

namespace scatterid {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                          std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  for (std::uint64_t idx : indices) h = splitmix64(h ^ splitmix64(idx + 1));
  return h;
}

Rng make_stream(std::uint64_t master, StreamPurpose purpose,
                std::initializer_list<std::uint64_t> indices) {
  return Rng(derive_seed(master, purpose, indices));
}

}  // namespace scatterid
