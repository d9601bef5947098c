#include <doctest.h>

#include "fixtures.hpp"
#include "mem2graph/pointer_scan.hpp"

using namespace mem2graph;

namespace {

HeapDump heap_5070_prefix() {
  auto bytes = fixtures::rows_to_bytes(fixtures::k5070Rows);
  bytes.resize(fixtures::k5070HeapBytes, 0);
  return HeapDump("5070-1643978841", bytes, fixtures::k5070HeapStart);
}

}  // namespace

TEST_CASE("marked rows of 5070 are hits") {
  auto heap = heap_5070_prefix();
  auto hits = detect_pointers(heap);
  std::vector<BlockIndex> idx;
  for (const auto& h : hits) idx.push_back(h.block_index);
  for (BlockIndex b : {0x50 / 8, 0x60 / 8, 0x68 / 8, 0x70 / 8, 0x78 / 8})
    CHECK(std::find(idx.begin(), idx.end(), b) != idx.end());
  CHECK(hits.front().value == 0x56343a1a2280ull);
  CHECK(hits.front().target_index == (0x56343a1a2280ull - fixtures::k5070HeapStart) / 8);
  // Header and small-integer rows are not pointers.
  for (BlockIndex b = 0; b < 10; ++b) CHECK(!pointer_at(heap, b));
}

TEST_CASE("row 0x58 of 5070 satisfies the detection rule") {
  // 007f1a3a34560000 decodes to 0x56343a1a7f00: non-zero, aligned and below
  // heap_start + 135169, so it is reported like the other rows.
  auto heap = heap_5070_prefix();
  auto hit = pointer_at(heap, 0x58 / 8);
  REQUIRE(hit);
  CHECK(hit->value == 0x56343a1a7f00ull);
}

TEST_CASE("range and alignment edges") {
  std::vector<std::uint8_t> bytes(64, 0);
  const Address start = 0x1000;
  auto put = [&](std::size_t blk, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) bytes[blk * 8 + k] = static_cast<std::uint8_t>(v >> (8 * k));
  };
  put(0, start);        // first byte of the heap: hit
  put(1, start + 56);   // last block: hit
  put(2, start + 64);   // one past the end
  put(3, start - 8);    // below start
  put(4, start + 12);   // misaligned
  put(5, 0);            // NULL
  put(6, start + 8);    // hit
  HeapDump heap("t", bytes, start);
  auto hits = detect_pointers(heap);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].block_index == 0);
  CHECK(hits[0].target_index == 0);
  CHECK(hits[1].block_index == 1);
  CHECK(hits[1].target_index == 7);
  CHECK(hits[2].block_index == 6);
  CHECK(!is_heap_pointer(heap, 0));
}

TEST_CASE("all-zero heap") {
  HeapDump heap("z", std::vector<std::uint8_t>(800, 0), 0x4000);
  CHECK(detect_pointers(heap).empty());
}

TEST_CASE("hits are ascending and target valid blocks") {
  auto heap = heap_5070_prefix();
  auto hits = detect_pointers(heap);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    CHECK(hits[i].value != 0);
    CHECK(hits[i].target_index < heap.block_count());
    if (i) CHECK(hits[i - 1].block_index < hits[i].block_index);
  }
  CHECK(detect_pointers(heap) == hits);
}
