#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qtwist {

/// Worker count used by every parallel kernel. 0 restores the hardware default.
void set_num_threads(unsigned n);
unsigned num_threads();

/// Runs body(chunk_index) for every chunk in [0, num_chunks). Chunks are
/// claimed dynamically; callers must write results into per-chunk slots so
/// the outcome does not depend on scheduling.
void parallel_for_chunks(std::size_t num_chunks, const std::function<void(std::size_t)>& body);

/// Pairwise (balanced binary tree) summation in a fixed order. Combined with
/// fixed-size chunking this makes reductions bit-stable across thread counts.
double tree_sum(std::span<const double> values);

/// Splits [0, n) into chunks of a fixed size (independent of thread count).
struct ChunkPlan {
  std::size_t n = 0;
  std::size_t chunk = 1;
  std::size_t count() const { return chunk == 0 ? 0 : (n + chunk - 1) / chunk; }
  std::size_t begin(std::size_t i) const { return i * chunk; }
  std::size_t end(std::size_t i) const { return (i + 1) * chunk < n ? (i + 1) * chunk : n; }
};

/// Deterministic parallel sum of f(i) over [0, n): each fixed-size chunk is
/// summed sequentially, chunk partials are combined with tree_sum.
double parallel_sum(std::size_t n, std::size_t chunk, const std::function<double(std::size_t)>& f);

}  // namespace qtwist
