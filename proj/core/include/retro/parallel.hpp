#pragma once
/**
 * @file parallel.hpp
 * @brief Deterministic block-parallel Monte Carlo.
 *
 * Work is cut into fixed-size blocks. Block b draws from an mt19937_64
 * seeded with seed_seq{seed_lo, seed_hi, b} and produces a partial result;
 * partials are merged in block order. The output therefore depends on
 * (seed, block size) only, never on the thread count.
 */

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace retro {

inline std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

inline constexpr std::uint64_t kBlockSize = 4096;

/// fn(rng, begin, end) -> Partial for each block; merge(acc, partial) in
/// block order starting from `init`. threads == 0 uses the hardware count.
template <class Partial, class Fn, class Merge>
Partial run_blocks(std::uint64_t total, std::uint64_t seed, unsigned threads,
                   Partial init, Fn&& fn, Merge&& merge,
                   std::uint64_t block_size = kBlockSize) {
  const std::uint64_t blocks = (total + block_size - 1) / block_size;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(blocks, 1)));
  std::vector<Partial> parts(blocks, init);
  auto work = [&](std::uint64_t b) {
    const std::uint64_t begin = b * block_size;
    const std::uint64_t end = std::min(total, begin + block_size);
    auto rng = block_rng(seed, b);
    parts[b] = fn(rng, begin, end);
  };
  if (threads <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) work(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t b = next++; b < blocks; b = next++) {
          try {
            work(b);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  Partial acc = std::move(init);
  for (auto& p : parts) merge(acc, p);
  return acc;
}

}  // namespace retro
