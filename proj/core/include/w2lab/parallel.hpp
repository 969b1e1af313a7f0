#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace w2lab {

// Process-wide worker count (0 = hardware concurrency).  Set once from the
// CLI --threads flag; reads are cheap.
void set_num_threads(int n) noexcept;
int num_threads() noexcept;

// Runs fn(lo, hi, chunk_index) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on n, never on the worker count, so any
// reduction that writes per-chunk slots and folds them in chunk order is
// bit-reproducible under different --threads settings.
void parallel_for_chunked(std::size_t n,
                          const std::function<void(std::size_t, std::size_t,
                                                   std::size_t)>& fn);

std::size_t parallel_chunk_count(std::size_t n) noexcept;

// Sum of per-chunk partials, folded in chunk order.
double parallel_sum(std::size_t n,
                    const std::function<double(std::size_t, std::size_t)>& fn);

}  // namespace w2lab
