#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mem2graph/chunk_parser.hpp"
#include "mem2graph/heap_io.hpp"

namespace mem2graph {

enum class NodeType { CHN, PN, KN, VN };
enum class EdgeType { Dts, Ptr };

std::string_view to_string(NodeType t) noexcept;
std::string_view to_string(EdgeType t) noexcept;

inline constexpr std::size_t kNoChunk = static_cast<std::size_t>(-1);

struct Node {
  NodeType type = NodeType::VN;
  Address address = 0;
  BlockIndex block_index = 0;
  std::optional<char> key_letter;  // KN, or a key CHN in a chunk-only graph
  std::size_t chunk = kNoChunk;    // index into MemGraph::chunks
  bool in_free_chunk = false;

  // "CHN(0x558343d21d40)", "KN_KEY_A(0x558343d29460)"
  std::string id() const;
};

struct Edge {
  std::size_t source = 0;  // node indices
  std::size_t target = 0;
  EdgeType type = EdgeType::Dts;

  bool operator==(const Edge&) const = default;
};

struct BuildOptions {
  // Free chunks and their blocks are part of the graph unless this is off.
  bool include_free_chunks = true;
};

class MemGraph {
 public:
  std::string file_id;
  Address heap_start = 0;
  bool chunk_only = false;
  std::vector<Chunk> chunks;
  std::vector<Node> nodes;  // ascending address
  std::vector<Edge> edges;  // dts first, then ptr, each by (source, target) address

  std::optional<std::size_t> find(Address addr) const;
  // CHN node of chunks[i], if present.
  std::optional<std::size_t> chunk_node(std::size_t chunk) const;

  const std::vector<std::size_t>& out(std::size_t node) const { return out_[node]; }
  const std::vector<std::size_t>& in(std::size_t node) const { return in_[node]; }

  std::size_t count(NodeType t) const;
  std::size_t count(EdgeType t) const;

  // Sorts nodes/edges into canonical order, drops duplicate edges and
  // rebuilds the lookup tables. Call after any direct edit.
  void finalize();

 private:
  std::unordered_map<Address, std::size_t> by_address_;
  std::vector<std::size_t> chunk_nodes_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

// Members of each chunk as pointer/value counts, read from block content (a
// key block counts by what it holds, not by its node type).
struct ChunkContent {
  std::size_t pointers = 0;
  std::size_t values = 0;
};

ChunkContent chunk_content(const Chunk& chunk, const HeapDump& heap);

// Full block graph. Chunks are parsed and annotated from `annotation`;
// BrokenChaining and IntegrityError propagate.
MemGraph build_memgraph(const HeapDump& heap, const Annotation& annotation, const BuildOptions& options = {});

// Same, from chunks the caller already parsed and annotated.
MemGraph build_memgraph(const HeapDump& heap, std::vector<Chunk> chunks, const Annotation& annotation,
                        const BuildOptions& options = {});

// One CHN per chunk; CHN_a -> CHN_b iff a pointer in a's user data (a in use)
// targets any block of b, header and footer included.
MemGraph reduce_to_chunk_graph(const MemGraph& graph);

// Marks key chunks on a chunk-only graph. Returns per-node labels (true for
// key chunks). Throws IntegrityError when a key address is not a chunk start
// or when two keys share a chunk.
std::vector<bool> label_key_chunks(MemGraph& chunk_graph, const Annotation& annotation);

// Removes the chunks whose flag is false, together with their member nodes
// and incident edges. keep is indexed like graph.chunks.
void retain_chunks(MemGraph& graph, const std::vector<bool>& keep);

}  // namespace mem2graph
