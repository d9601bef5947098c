#include <doctest.h>

#include <set>

#include "mem2graph/error.hpp"
#include "mem2graph/memgraph.hpp"
#include "mem2graph/synth.hpp"
#include "oracles.hpp"

using namespace mem2graph;

namespace {

// zero | 3 in-use 48-byte chunks | free top chunk. User blocks: 2..6, 8..12, 14..18.
SynthHeapSpec three_chunks() {
  SynthHeapSpec spec;
  spec.chunks = {{48, true}, {48, true}, {48, true}, {64, false}};
  spec.zero_block_ratio = 1.0;
  return spec;
}

std::set<std::pair<Address, Address>> ptr_edges(const MemGraph& g) {
  std::set<std::pair<Address, Address>> out;
  for (const auto& e : g.edges)
    if (e.type == EdgeType::Ptr) out.emplace(g.nodes[e.source].address, g.nodes[e.target].address);
  return out;
}

Annotation annotation_of(const SynthHeap& s, const HeapDump& heap) { return parse_annotation(s.annotation, heap.size()); }

}  // namespace

TEST_CASE("node ids") {
  Node n;
  n.type = NodeType::CHN;
  n.address = 0x558343d21d40;
  CHECK(n.id() == "CHN(0x558343d21d40)");
  n.type = NodeType::KN;
  n.key_letter = 'A';
  n.address = 0x558343d29460;
  CHECK(n.id() == "KN_KEY_A(0x558343d29460)");
  n.type = NodeType::PN;
  CHECK(n.id() == "PN(0x558343d29460)");
}

TEST_CASE("single chunk, no pointers") {
  SynthHeapSpec spec;
  spec.chunks = {{48, true}, {32, false}};
  spec.zero_block_ratio = 0.0;
  auto s = synth_heap(spec);
  auto heap = s.dump();
  BuildOptions only_in_use;
  only_in_use.include_free_chunks = false;
  auto g = build_memgraph(heap, annotation_of(s, heap), only_in_use);
  CHECK(g.count(NodeType::CHN) == 1);
  CHECK(g.count(NodeType::VN) == 5);
  CHECK(g.count(EdgeType::Dts) == 5);
  CHECK(g.count(EdgeType::Ptr) == 0);
}

TEST_CASE("planted pointer chain") {
  auto spec = three_chunks();
  spec.pointers = {{2, 8}, {9, 14}};
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto g = build_memgraph(heap, annotation_of(s, heap));
  const Address st = heap.heap_start();
  CHECK(ptr_edges(g) == std::set<std::pair<Address, Address>>{{st + 16, st + 64}, {st + 72, st + 112}});
  CHECK(g.count(NodeType::PN) == 2);
  // dts out-degree of each CHN equals its member count.
  for (std::size_t ci = 0; ci < g.chunks.size(); ++ci) {
    auto chn = g.chunk_node(ci);
    REQUIRE(chn);
    CHECK(g.out(*chn).size() == g.chunks[ci].member_count(heap));
  }
}

TEST_CASE("pointer to a header lands on the CHN") {
  auto spec = three_chunks();
  spec.pointers = {{3, 7}};
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto g = build_memgraph(heap, annotation_of(s, heap));
  auto edges = ptr_edges(g);
  REQUIRE(edges.size() == 1);
  auto target = g.find(edges.begin()->second);
  REQUIRE(target);
  CHECK(g.nodes[*target].type == NodeType::CHN);
}

TEST_CASE("pointer into the leading zero block has no target node") {
  auto spec = three_chunks();
  spec.pointers = {{3, 0}};
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto g = build_memgraph(heap, annotation_of(s, heap));
  CHECK(g.count(NodeType::PN) == 1);
  CHECK(g.count(EdgeType::Ptr) == 0);
}

TEST_CASE("key nodes replace value nodes") {
  auto spec = three_chunks();
  spec.keys = {{'A', 1, std::vector<std::uint8_t>{0xde, 0xad, 0xbe, 0xef, 1, 2, 3, 0x84, 5, 6, 7, 8}}};
  spec.pointers = {{2, 8}};
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto g = build_memgraph(heap, annotation_of(s, heap));
  REQUIRE(g.count(NodeType::KN) == 1);
  auto kn = g.find(heap.heap_start() + 8 * 8);
  REQUIRE(kn);
  CHECK(g.nodes[*kn].type == NodeType::KN);
  CHECK(g.nodes[*kn].key_letter == 'A');
  CHECK(g.nodes[*kn].id() == "KN_KEY_A(0x" + to_hex(heap.heap_start() + 64) + ")");
  // The PN pointing at the key block keeps its edge.
  CHECK(ptr_edges(g).count({heap.heap_start() + 16, heap.heap_start() + 64}) == 1);

  auto ann = annotation_of(s, heap);
  ann.keys[0].value_hex = "ffad";
  ann.keys[0].declared_len = 2;
  CHECK_THROWS_AS(build_memgraph(heap, ann), IntegrityError);
  ann = annotation_of(s, heap);
  ann.keys[0].addr = heap.heap_start() + 7 * 8;  // header block
  CHECK_THROWS_AS(build_memgraph(heap, ann), IntegrityError);
}

TEST_CASE("free chunks can be left out") {
  SynthHeapSpec spec;
  spec.chunks = {{48, true}, {64, false}, {48, true}, {64, false}};
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto full = build_memgraph(heap, annotation_of(s, heap));
  CHECK(full.count(NodeType::CHN) == 4);
  BuildOptions o;
  o.include_free_chunks = false;
  auto in_use = build_memgraph(heap, annotation_of(s, heap), o);
  CHECK(in_use.count(NodeType::CHN) == 2);
  for (const auto& n : in_use.nodes) CHECK(!n.in_free_chunk);
}

TEST_CASE("graphs are deterministic") {
  auto s = synth_heap(random_spec(99));
  auto heap = s.dump();
  auto a = build_memgraph(heap, annotation_of(s, heap));
  auto b = build_memgraph(heap, annotation_of(s, heap));
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) CHECK(a.nodes[i].id() == b.nodes[i].id());
  CHECK(a.edges == b.edges);
  for (std::size_t i = 1; i < a.nodes.size(); ++i) CHECK(a.nodes[i - 1].address < a.nodes[i].address);
}

TEST_CASE("chunk graph") {
  auto spec = three_chunks();
  spec.pointers = {{2, 8}, {3, 12}, {9, 13}, {14, 15}};
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto g = build_memgraph(heap, annotation_of(s, heap));
  auto r = reduce_to_chunk_graph(g);
  CHECK(r.chunk_only);
  CHECK(r.nodes.size() == r.chunks.size());
  for (const auto& n : r.nodes) CHECK(n.type == NodeType::CHN);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : r.edges) edges.emplace(r.nodes[e.source].chunk, r.nodes[e.target].chunk);
  // 2->8 and 3->12 collapse into one edge; 9->13 hits chunk 2's header; 14->15 is a self loop.
  CHECK(edges == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {2, 2}});
  CHECK(edges == oracle::chunk_edges(heap, parse_chunks(heap)));
}

TEST_CASE("chunk graph without pointers is edgeless") {
  auto s = synth_heap(three_chunks());
  auto heap = s.dump();
  auto r = reduce_to_chunk_graph(build_memgraph(heap, annotation_of(s, heap)));
  CHECK(r.edges.empty());
  CHECK(r.nodes.size() == 4);
}

TEST_CASE("pointers in free chunks do not link chunks") {
  SynthHeapSpec spec;
  spec.chunks = {{48, true}, {64, false}, {48, true}, {64, false}};
  spec.pointers = {{10, 2}};  // inside the free chunk, after fd/bk
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto g = build_memgraph(heap, annotation_of(s, heap));
  CHECK(g.count(EdgeType::Ptr) >= 1);
  auto r = reduce_to_chunk_graph(g);
  CHECK(r.edges.empty());
}

TEST_CASE("key chunk labels") {
  auto s = synth_heap(random_spec(4));
  auto heap = s.dump();
  auto ann = annotation_of(s, heap);
  auto r = reduce_to_chunk_graph(build_memgraph(heap, ann));
  auto labels = label_key_chunks(r, ann);
  std::set<Address> expected;
  for (auto [letter, addr] : s.keys) expected.insert(addr);
  std::set<Address> got;
  std::size_t lettered = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    if (labels[i]) got.insert(r.chunks[r.nodes[i].chunk].address);
    lettered += r.nodes[i].key_letter.has_value();
  }
  CHECK(got == expected);
  CHECK(lettered == expected.size());
  CHECK(expected.size() <= 6);

  // An empty KEY_E contributes nothing.
  auto fewer = ann;
  fewer.keys[4].value_hex.clear();
  fewer.keys[4].declared_len = 0;
  auto r2 = reduce_to_chunk_graph(build_memgraph(heap, ann));
  auto l2 = label_key_chunks(r2, fewer);
  CHECK(std::count(l2.begin(), l2.end(), true) == static_cast<long>(expected.size()) - 1);

  auto clash = ann;
  clash.keys[1].addr = clash.keys[0].addr;
  auto r3 = reduce_to_chunk_graph(build_memgraph(heap, ann));
  CHECK_THROWS_AS(label_key_chunks(r3, clash), IntegrityError);
  auto off = ann;
  off.keys[0].addr += 8;
  auto r4 = reduce_to_chunk_graph(build_memgraph(heap, ann));
  CHECK_THROWS_AS(label_key_chunks(r4, off), IntegrityError);
}

TEST_CASE("retain_chunks drops members and incident edges") {
  auto spec = three_chunks();
  spec.pointers = {{2, 8}, {9, 14}};
  auto s = synth_heap(spec);
  auto heap = s.dump();
  auto g = build_memgraph(heap, annotation_of(s, heap));
  retain_chunks(g, {true, false, true, true});
  CHECK(g.count(NodeType::CHN) == 3);
  CHECK(g.count(EdgeType::Ptr) == 0);
  CHECK(!g.chunk_node(1));
  CHECK(g.chunk_node(2));
  for (const auto& n : g.nodes) CHECK(n.chunk != 1);
}
