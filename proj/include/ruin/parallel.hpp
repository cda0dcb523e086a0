#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ruin {

// Replicate chunking policy. Chunk boundaries are a pure function of n so
// that results are invariant under the worker count.
struct ChunkPlan {
  std::size_t n = 0;
  std::size_t chunk_size = 4096;

  std::size_t num_chunks() const { return n == 0 ? 0 : (n + chunk_size - 1) / chunk_size; }
  std::size_t begin(std::size_t c) const { return c * chunk_size; }
  std::size_t end(std::size_t c) const {
    const std::size_t e = (c + 1) * chunk_size;
    return e < n ? e : n;
  }
  std::size_t size(std::size_t c) const { return end(c) - begin(c); }
};

// Runs fn(chunk_index) for every chunk. Each chunk writes only into its own
// output slot, so any scheduling yields identical results; the caller reduces
// slots in chunk order afterwards.
inline void parallel_chunks(std::size_t num_chunks, int workers,
                            const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || num_chunks <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) fn(c);
    return;
  }
  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(workers), num_chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= num_chunks) return;
        try {
          fn(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ruin
