#include <doctest.h>

#include <cstring>

#include "fixtures.hpp"
#include "mem2graph/chunk_parser.hpp"
#include "mem2graph/error.hpp"
#include "mem2graph/synth.hpp"

using namespace mem2graph;

namespace {

HeapDump heap_of(const std::vector<std::uint64_t>& blocks, Address start = 0x10000) {
  std::vector<std::uint8_t> bytes(blocks.size() * 8);
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (int k = 0; k < 8; ++k) bytes[i * 8 + k] = static_cast<std::uint8_t>(blocks[i] >> (8 * k));
  return HeapDump("t", bytes, start);
}

}  // namespace

TEST_CASE("malloc header values") {
  auto h = parse_malloc_header(fixtures::rows_to_bytes({"5102000000000000"}));
  CHECK(h.size == 592);
  CHECK(h.p);
  CHECK(!h.m);
  CHECK(!h.a);

  auto h33 = parse_malloc_header(fixtures::rows_to_bytes({"2100000000000000"}));
  CHECK(h33.size == 32);
  CHECK(h33.p);

  auto z = parse_malloc_header(std::uint64_t{0});
  CHECK(z.size == 0);
  CHECK(!(z.a || z.m || z.p));

  auto all = parse_malloc_header(std::uint64_t{0x37});
  CHECK(all.size == 0x30);
  CHECK((all.a && all.m && all.p));
  CHECK(encode_malloc_header(all) == 0x37);
}

TEST_CASE("chain of three chunks with a free one in the middle") {
  // zero | hdr 33 | 3 data | hdr 48 (P) | fd bk x x footer=48 | hdr 0x20 (P=0) | top...
  auto heap = heap_of({0, 33, 1, 2, 3, 49, 7, 7, 9, 9, 48, 0x20, 1, 2, 3, 0});
  auto chunks = parse_chunks(heap);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].block_index == 2);
  CHECK(chunks[0].address == 0x10010);
  CHECK(chunks[0].header.size == 32);
  CHECK(chunks[0].is_in_use);
  CHECK(chunks[1].block_index == 6);
  CHECK(!chunks[1].is_in_use);  // next header has P=0
  CHECK(chunks[1].correct_footer);
  CHECK(chunks[2].block_index == 12);
  CHECK(!chunks[2].is_in_use);  // ends exactly at the dump end
  CHECK(!chunks[2].is_zero_cropped);
  CHECK(chunks[0].describe() == "Chunk(block_index=2, size=32, flags=[A=False, M=False, P=True])");
}

TEST_CASE("cropped last chunk") {
  auto heap = heap_of({0, 33, 1, 2, 3, 0x101, 0, 0});
  auto chunks = parse_chunks(heap);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[1].is_zero_cropped);
  CHECK(!chunks[1].is_in_use);
  CHECK(chunks[1].member_count(heap) == 2);
}

TEST_CASE("undersized header breaks the chain") {
  CHECK_THROWS_AS(parse_chunks(heap_of({0, 33, 1, 2, 3, 9, 0})), BrokenChaining);
  CHECK_THROWS_AS(parse_chunks(heap_of({0, 1})), BrokenChaining);
}

TEST_CASE("all-zero heap has no chunks") { CHECK(parse_chunks(heap_of({0, 0, 0, 0})).empty()); }

TEST_CASE("first rows of 5070") {
  auto bytes = fixtures::rows_to_bytes(fixtures::k5070Rows);
  bytes.resize(fixtures::k5070HeapBytes, 0);
  HeapDump heap("5070-1643978841", bytes, fixtures::k5070HeapStart);
  auto chunks = parse_chunks(heap);
  REQUIRE(!chunks.empty());
  CHECK(chunks[0].block_index == 2);
  CHECK(chunks[0].header.size == 592);
  CHECK(chunks[0].header.p);
}

TEST_CASE("annotate_chunk tags by user-data address") {
  auto heap = heap_of({0, 33, 1, 2, 3, 49, 7, 7, 9, 9, 48, 0x20, 1, 2, 3, 0});
  auto chunks = parse_chunks(heap);
  std::vector<std::pair<char, Address>> keys = {{'A', chunks[0].address}, {'B', 0x99999}};
  annotate_chunk(chunks[0], keys, std::nullopt, chunks[0].address);
  CHECK(chunks[0].key_letters == std::vector<char>{'A'});
  CHECK(chunks[0].contains_session_state);
  CHECK(!chunks[0].contains_ssh_struct);

  Chunk untouched = chunks[2];
  annotate_chunk(chunks[2], keys, std::nullopt, std::nullopt);
  CHECK(chunks[2].key_letters == untouched.key_letters);
  CHECK(!chunks[2].is_annotated());

  std::vector<std::pair<char, Address>> on_free = {{'C', chunks[1].address}};
  CHECK_THROWS_AS(annotate_chunk(chunks[1], on_free, std::nullopt, std::nullopt), IntegrityError);
}

TEST_CASE("annotate_chunks counts annotation addresses landing on footers") {
  auto heap = heap_of({0, 33, 1, 2, 3, 49, 7, 7, 9, 9, 48, 0x20, 1, 2, 3, 0});
  auto chunks = parse_chunks(heap);
  Annotation ann;
  ann.heap_start = heap.heap_start();
  KeyRecord k;
  k.letter = 'A';
  k.addr = block_index_to_address(heap, chunks[0].footer_index());
  k.declared_len = 8;
  k.value_hex = "0300000000000000";
  ann.keys.push_back(k);
  auto m = annotate_chunks(chunks, heap, ann);
  CHECK(m.unmatched.size() == 1);
  CHECK(m.footer_hits == 1);
}

TEST_CASE("parse stats") {
  ParseStats empty;
  CHECK(empty.chunks == 0);
  CHECK(empty.report(false).find("Total number of chunks: 0") != std::string::npos);

  auto heap = heap_of({0, 33, 1, 2, 3, 49, 0, 0, 0, 0, 0, 0x20, 1, 2, 3, 0});
  auto chunks = parse_chunks(heap);
  ParseStats s;
  s.add_heap(heap, chunks);
  CHECK(s.files == 1);
  CHECK(s.chunks == 3);
  CHECK(s.p_set == 2);  // 33 and 49 carry P, 0x20 does not
  CHECK(s.free_chunks == 2);
  CHECK(s.blocks == 16);
  CHECK(s.blocks_in_free == 6 + 4);
  CHECK(s.zero_only == 1);  // the middle free chunk, footer included
  ParseStats twice = s;
  twice.merge(s);
  CHECK(twice.chunks == 6);
  CHECK(twice.report(true).find("Total number of parsed files: 2") != std::string::npos);
}

TEST_CASE("synthetic heap of one 32-byte chunk") {
  SynthHeapSpec spec;
  spec.chunks = {{32, true}, {64, false}};
  spec.zero_block_ratio = 1.0;
  auto s = synth_heap(spec);
  std::uint64_t header = 0;
  std::memcpy(&header, &s.bytes[8], 8);
  CHECK(header == 33);
}

TEST_CASE("free chunk clears the next P flag") {
  SynthHeapSpec spec;
  spec.chunks = {{48, true}, {32, false}, {48, true}, {128, false}};
  auto s = synth_heap(spec);
  auto chunks = parse_chunks(s.dump());
  REQUIRE(chunks.size() == 4);
  CHECK(chunks[1].header.p);
  CHECK(!chunks[2].header.p);
  CHECK(!chunks[1].is_in_use);
  CHECK(chunks[1].correct_footer);
  CHECK(chunks[2].header.p == false);
}
