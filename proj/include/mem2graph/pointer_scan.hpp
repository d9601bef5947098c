#pragma once

#include <optional>
#include <vector>

#include "mem2graph/heap_io.hpp"

namespace mem2graph {

struct PointerHit {
  BlockIndex block_index = 0;
  Address value = 0;
  BlockIndex target_index = 0;

  bool operator==(const PointerHit&) const = default;
};

// Nonzero, aligned and inside [heap_start, heap_end).
inline bool is_heap_pointer(const HeapDump& heap, std::uint64_t value) noexcept {
  return value != 0 && is_pointer_aligned(value) && heap.contains(value);
}

std::optional<PointerHit> pointer_at(const HeapDump& heap, BlockIndex index);

// Hits in ascending block order.
std::vector<PointerHit> detect_pointers(const HeapDump& heap);

}  // namespace mem2graph
