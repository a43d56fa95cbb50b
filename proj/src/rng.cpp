#include "lasmc/rng.hpp"

#include <atomic>

namespace lasmc {

namespace {
std::atomic<int> g_threads{1};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

void set_thread_count(int n) { g_threads.store(n < 1 ? 1 : n); }

int thread_count() { return g_threads.load(); }

}  // namespace lasmc
