#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace curvlab::parallel {

/// Worker count used by node-parallel loops (default 1).
void set_threads(unsigned count);
unsigned threads();

/// Calls body(i) for i in [0, count) on up to threads() workers. Work items
/// must write to disjoint outputs.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Node blocks are a fixed size so reduction trees never depend on the
/// worker count.
inline constexpr std::size_t kLeafBlock = 256;

/// Pairwise tree reduction over node blocks. leaf(lo, hi) produces the
/// partial value of nodes [lo, hi); partials are combined with `add` in a
/// tree fixed by block index.
template <class T, class Leaf, class Add>
T reduce_blocks(std::size_t node_count, Leaf leaf, Add add) {
  const std::size_t blocks = node_count == 0 ? 0 : (node_count + kLeafBlock - 1) / kLeafBlock;
  std::vector<T> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kLeafBlock;
    const std::size_t hi = lo + kLeafBlock < node_count ? lo + kLeafBlock : node_count;
    partial[b] = leaf(lo, hi);
  });
  if (blocks == 0) return leaf(0, 0);
  std::size_t width = blocks;
  while (width > 1) {
    const std::size_t half = (width + 1) / 2;
    for (std::size_t i = 0; i + half < width; ++i) {
      partial[i] = add(partial[i], partial[i + half]);
    }
    width = half;
  }
  return partial[0];
}

}  // namespace curvlab::parallel
