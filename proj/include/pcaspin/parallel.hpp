#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

/// Deterministic work partitioning.
///
/// Work is split into fixed-size blocks whose boundaries depend only on the
/// problem size -- never on the worker count.  Threads claim whole blocks;
/// floating-point reductions collect one partial per block and fold them
/// serially in block order.  Together with counter-based random numbers this
/// makes every result bit-identical across thread counts.
namespace pcaspin::parallel {

/// Number of items per block.  Fixed: changing it changes reduction order and
/// hence the low-order bits of floating-point accumulations.
inline constexpr std::size_t kBlockSize = 16384;

/// Environment variable consulted for the default worker count.
inline constexpr const char* kThreadsEnvVar = "PCASPIN_THREADS";

/// Resolves the worker count: an explicit request wins, otherwise the
/// PCASPIN_THREADS environment variable, otherwise 1.  Always >= 1.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

/// Number of fixed-size blocks covering [0, total).
inline std::size_t block_count(std::size_t total) {
  return (total + kBlockSize - 1) / kBlockSize;
}

/// Runs body(begin, end, block_index) over every block of [0, total), using
/// `threads` workers.  Blocks are assigned to workers in strides; the body
/// must only write to locations owned by its block (or to per-block slots).
template <class Body>
void for_blocks(std::size_t total, unsigned threads, Body&& body) {
  const std::size_t blocks = block_count(total);
  if (blocks == 0) return;
  if (threads <= 1 || blocks == 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      std::size_t begin = b * kBlockSize;
      std::size_t end = begin + kBlockSize < total ? begin + kBlockSize : total;
      body(begin, end, b);
    }
    return;
  }
  if (threads > blocks) threads = static_cast<unsigned>(blocks);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t b = t; b < blocks; b += threads) {
        std::size_t begin = b * kBlockSize;
        std::size_t end =
            begin + kBlockSize < total ? begin + kBlockSize : total;
        body(begin, end, b);
      }
    });
  }
  for (auto& th : pool) th.join();
}

/// Sum of term(i) for i in [0, total), reduced deterministically: each block
/// accumulates its own partial and the partials are folded in block order.
template <class Term>
double sum_blocks(std::size_t total, unsigned threads, Term&& term) {
  std::vector<double> partial(block_count(total), 0.0);
  for_blocks(total, threads,
             [&](std::size_t begin, std::size_t end, std::size_t b) {
               double acc = 0.0;
               for (std::size_t i = begin; i < end; ++i) acc += term(i);
               partial[b] = acc;
             });
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

/// Integer counterpart of sum_blocks (order-insensitive, but kept in the same
/// shape for symmetry).
template <class Term>
std::int64_t count_blocks(std::size_t total, unsigned threads, Term&& term) {
  std::vector<std::int64_t> partial(block_count(total), 0);
  for_blocks(total, threads,
             [&](std::size_t begin, std::size_t end, std::size_t b) {
               std::int64_t acc = 0;
               for (std::size_t i = begin; i < end; ++i) acc += term(i);
               partial[b] = acc;
             });
  std::int64_t acc = 0;
  for (std::int64_t p : partial) acc += p;
  return acc;
}

}  // namespace pcaspin::parallel
