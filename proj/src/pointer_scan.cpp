#include "mem2graph/pointer_scan.hpp"

namespace mem2graph {

std::optional<PointerHit> pointer_at(const HeapDump& heap, BlockIndex index) {
  const std::uint64_t v = heap.block_value(index);
  if (!is_heap_pointer(heap, v)) return std::nullopt;
  return PointerHit{index, v, (v - heap.heap_start()) / kBlockSize};
}

std::vector<PointerHit> detect_pointers(const HeapDump& heap) {
  std::vector<PointerHit> hits;
  for (BlockIndex i = 0; i < heap.block_count(); ++i) {
    if (auto hit = pointer_at(heap, i)) hits.push_back(*hit);
  }
  return hits;
}

}  // namespace mem2graph
