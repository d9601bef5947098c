#include "mem2graph/memgraph.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <spdlog/spdlog.h>

#include "mem2graph/error.hpp"
#include "mem2graph/pointer_scan.hpp"

namespace mem2graph {

std::string_view to_string(NodeType t) noexcept {
  switch (t) {
    case NodeType::CHN: return "CHN";
    case NodeType::PN: return "PN";
    case NodeType::KN: return "KN";
    case NodeType::VN: return "VN";
  }
  return "?";
}

std::string_view to_string(EdgeType t) noexcept { return t == EdgeType::Dts ? "dts" : "ptr"; }

std::string Node::id() const {
  std::string prefix(to_string(type));
  if (type == NodeType::KN) prefix = std::string("KN_KEY_") + key_letter.value_or('?');
  return prefix + "(0x" + to_hex(address) + ")";
}

std::optional<std::size_t> MemGraph::find(Address addr) const {
  auto it = by_address_.find(addr);
  if (it == by_address_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> MemGraph::chunk_node(std::size_t chunk) const {
  if (chunk >= chunk_nodes_.size() || chunk_nodes_[chunk] == kNoChunk) return std::nullopt;
  return chunk_nodes_[chunk];
}

std::size_t MemGraph::count(NodeType t) const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [t](const Node& n) { return n.type == t; }));
}

std::size_t MemGraph::count(EdgeType t) const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [t](const Edge& e) { return e.type == t; }));
}

void MemGraph::finalize() {
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return nodes[a].address < nodes[b].address; });
  std::vector<std::size_t> remap(nodes.size());
  std::vector<Node> sorted;
  sorted.reserve(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    remap[order[i]] = i;
    sorted.push_back(std::move(nodes[order[i]]));
  }
  nodes = std::move(sorted);
  for (auto& e : edges) {
    e.source = remap[e.source];
    e.target = remap[e.target];
  }
  // Node order is address order, so index order is address order too.
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.type, a.source, a.target) < std::tie(b.type, b.source, b.target);
  });
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  by_address_.clear();
  by_address_.reserve(nodes.size());
  chunk_nodes_.assign(chunks.size(), kNoChunk);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!by_address_.emplace(nodes[i].address, i).second)
      throw ContractViolation("two nodes share address 0x" + to_hex(nodes[i].address));
    if (nodes[i].type == NodeType::CHN && nodes[i].chunk < chunks.size()) chunk_nodes_[nodes[i].chunk] = i;
  }
  out_.assign(nodes.size(), {});
  in_.assign(nodes.size(), {});
  for (const auto& e : edges) {
    out_[e.source].push_back(e.target);
    in_[e.target].push_back(e.source);
  }
}

ChunkContent chunk_content(const Chunk& chunk, const HeapDump& heap) {
  ChunkContent c;
  const std::size_t n = chunk.member_count(heap);
  for (std::size_t k = 0; k < n; ++k) {
    if (pointer_at(heap, chunk.block_index + k))
      ++c.pointers;
    else
      ++c.values;
  }
  return c;
}

MemGraph build_memgraph(const HeapDump& heap, const Annotation& annotation, const BuildOptions& options) {
  auto chunks = parse_chunks(heap);
  annotate_chunks(chunks, heap, annotation);
  return build_memgraph(heap, std::move(chunks), annotation, options);
}

MemGraph build_memgraph(const HeapDump& heap, std::vector<Chunk> chunks, const Annotation& annotation,
                        const BuildOptions& options) {
  MemGraph g;
  g.file_id = heap.file_id();
  g.heap_start = heap.heap_start();
  g.chunks = std::move(chunks);

  std::vector<std::pair<std::size_t, Address>> pointer_nodes;  // node, target
  for (std::size_t ci = 0; ci < g.chunks.size(); ++ci) {
    const Chunk& c = g.chunks[ci];
    if (!c.is_in_use && !options.include_free_chunks) continue;
    const std::size_t chn = g.nodes.size();
    Node header;
    header.type = NodeType::CHN;
    header.block_index = c.header_index();
    header.address = heap.heap_start() + header.block_index * kBlockSize;
    header.chunk = ci;
    header.in_free_chunk = !c.is_in_use;
    g.nodes.push_back(header);

    const std::size_t n = c.member_count(heap);
    for (std::size_t k = 0; k < n; ++k) {
      Node m;
      m.block_index = c.block_index + k;
      m.address = heap.heap_start() + m.block_index * kBlockSize;
      m.chunk = ci;
      m.in_free_chunk = !c.is_in_use;
      if (auto hit = pointer_at(heap, m.block_index)) {
        m.type = NodeType::PN;
        pointer_nodes.emplace_back(g.nodes.size(), hit->value);
      } else {
        m.type = NodeType::VN;
      }
      g.edges.push_back({chn, g.nodes.size(), EdgeType::Dts});
      g.nodes.push_back(m);
    }
  }

  std::unordered_map<Address, std::size_t> by_address;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) by_address.emplace(g.nodes[i].address, i);

  for (const auto& key : annotation.present_keys()) {
    auto it = by_address.find(key.addr);
    if (it == by_address.end() || g.nodes[it->second].type == NodeType::CHN)
      throw IntegrityError("KEY_" + std::string(1, key.letter) + " address 0x" + to_hex(key.addr) +
                           " is not a user-data block");
    Node& node = g.nodes[it->second];
    auto value = key.value_bytes();
    auto block = heap.block(node.block_index);
    const std::size_t n = std::min(value.size(), kBlockSize);
    if (!std::equal(block.begin(), block.begin() + n, value.begin()))
      throw IntegrityError("KEY_" + std::string(1, key.letter) + " bytes at 0x" + to_hex(key.addr) +
                           " do not match the annotated value");
    if (node.type == NodeType::KN)
      throw IntegrityError("two keys annotated at 0x" + to_hex(key.addr));
    if (node.type == NodeType::PN)
      spdlog::warn("{}: key {} block at 0x{} also decodes as a heap pointer; keeping it as a key node",
                   heap.file_id(), key.letter, to_hex(key.addr));
    node.type = NodeType::KN;
    node.key_letter = key.letter;
  }

  for (auto [source, target] : pointer_nodes) {
    if (g.nodes[source].type != NodeType::PN) continue;
    auto it = by_address.find(target);
    if (it == by_address.end()) continue;
    g.edges.push_back({source, it->second, EdgeType::Ptr});
  }
  g.finalize();
  return g;
}

MemGraph reduce_to_chunk_graph(const MemGraph& graph) {
  MemGraph r;
  r.file_id = graph.file_id;
  r.heap_start = graph.heap_start;
  r.chunk_only = true;
  r.chunks = graph.chunks;

  std::vector<std::size_t> reduced(graph.chunks.size(), kNoChunk);
  for (std::size_t ci = 0; ci < graph.chunks.size(); ++ci) {
    auto chn = graph.chunk_node(ci);
    if (!chn) continue;
    reduced[ci] = r.nodes.size();
    Node n = graph.nodes[*chn];
    n.key_letter.reset();
    r.nodes.push_back(n);
  }
  for (const auto& e : graph.edges) {
    if (e.type != EdgeType::Ptr) continue;
    const Node& src = graph.nodes[e.source];
    const Node& dst = graph.nodes[e.target];
    if (src.chunk == kNoChunk || dst.chunk == kNoChunk) continue;
    if (!graph.chunks[src.chunk].is_in_use) continue;
    if (reduced[src.chunk] == kNoChunk || reduced[dst.chunk] == kNoChunk) continue;
    r.edges.push_back({reduced[src.chunk], reduced[dst.chunk], EdgeType::Ptr});
  }
  r.finalize();
  return r;
}

std::vector<bool> label_key_chunks(MemGraph& g, const Annotation& annotation) {
  std::vector<bool> labels(g.nodes.size(), false);
  std::map<Address, std::size_t> chunk_at;
  for (std::size_t ci = 0; ci < g.chunks.size(); ++ci) chunk_at.emplace(g.chunks[ci].address, ci);

  for (const auto& key : annotation.present_keys()) {
    auto it = chunk_at.find(key.addr);
    if (it == chunk_at.end())
      throw IntegrityError("KEY_" + std::string(1, key.letter) + " at 0x" + to_hex(key.addr) +
                           " is not at the start of a chunk");
    auto node = g.chunk_node(it->second);
    if (!node) continue;  // chunk filtered out of this graph
    if (labels[*node])
      throw IntegrityError("chunk at 0x" + to_hex(key.addr) + " holds more than one key");
    labels[*node] = true;
    if (g.chunk_only) g.nodes[*node].key_letter = key.letter;
  }
  return labels;
}

void retain_chunks(MemGraph& g, const std::vector<bool>& keep) {
  std::vector<std::size_t> remap(g.nodes.size(), kNoChunk);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (n.chunk != kNoChunk && n.chunk < keep.size() && !keep[n.chunk]) continue;
    remap[i] = nodes.size();
    nodes.push_back(n);
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges) {
    if (remap[e.source] == kNoChunk || remap[e.target] == kNoChunk) continue;
    edges.push_back({remap[e.source], remap[e.target], e.type});
  }
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  g.finalize();
}

}  // namespace mem2graph
