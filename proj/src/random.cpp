#include "attribqa/random.hpp"

#include <limits>
#include <numeric>

namespace attribqa {

std::uint64_t Rng::uniform(std::uint64_t bound) {
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

std::uint64_t Rng::between(std::uint64_t lo, std::uint64_t hi) {
  return lo + uniform(hi - lo + 1);
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k && i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k < n ? k : n);
  return pool;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view id, std::uint64_t copy) {
  std::uint64_t h = splitmix(master);
  h = fnv1a(id, h);
  return splitmix(h ^ splitmix(copy + 1));
}

}  // namespace attribqa
