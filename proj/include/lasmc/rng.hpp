#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <random>

namespace lasmc {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based derivation: the same (seed, keys) always gives the same stream.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(seed, keys));
}

// Particles are split into fixed blocks, one stream per block, so results do
// not depend on the number of threads.
inline constexpr int kParticleBlock = 64;

void set_thread_count(int n);
int thread_count();

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline double std_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Calls fn(j, rng_j) for every particle. rng_j is shared within a block and
// advanced in particle order, so fn must consume draws only for its own j.
template <class Fn>
void for_each_particle(int m, std::uint64_t step_key, Fn&& fn) {
  const int blocks = (m + kParticleBlock - 1) / kParticleBlock;
  std::exception_ptr failure;
#if defined(LASMC_HAVE_OPENMP)
  const int threads = thread_count();
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
  for (int b = 0; b < blocks; ++b) {
    try {
      Rng rng(derive_seed(step_key, {static_cast<std::uint64_t>(b)}));
      const int end = std::min(m, (b + 1) * kParticleBlock);
      for (int j = b * kParticleBlock; j < end; ++j) fn(j, rng);
    } catch (...) {
#if defined(LASMC_HAVE_OPENMP)
#pragma omp critical(lasmc_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Index-parallel loop without randomness.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  std::exception_ptr failure;
#if defined(LASMC_HAVE_OPENMP)
  const int threads = thread_count();
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#if defined(LASMC_HAVE_OPENMP)
#pragma omp critical(lasmc_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lasmc
