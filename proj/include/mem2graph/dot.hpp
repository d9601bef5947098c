#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mem2graph/embeddings.hpp"
#include "mem2graph/memgraph.hpp"

namespace mem2graph {

struct GraphComment {
  std::string embedding_type;
  std::vector<std::string> fields;

  bool operator==(const GraphComment&) const = default;
};

struct DotNode {
  std::string id;
  NodeType type = NodeType::VN;
  Address address = 0;
  std::optional<char> key;  // KN letter, or key="X" on a chunk-only CHN
  std::string label;
  std::optional<std::vector<double>> comment;

  // NaN compares equal to NaN here.
  bool operator==(const DotNode& o) const;
};

struct DotEdge {
  std::string source;
  std::string target;
  EdgeType type = EdgeType::Dts;
  int weight = 1;

  bool operator==(const DotEdge&) const = default;
};

struct DotDocument {
  std::string name;
  std::optional<GraphComment> comment;
  std::vector<DotNode> nodes;
  std::vector<DotEdge> edges;

  bool operator==(const DotDocument&) const = default;
};

struct ParsedNodeId {
  NodeType type;
  std::optional<char> key;
  Address address;
};

// "PN(0x558343d24ae8)" -> {PN, -, 0x558343d24ae8}. Throws FormatError.
ParsedNodeId parse_node_id(std::string_view id);

// Shortest text that reads back to the same double; "NaN" for NaN.
std::string format_number(double v);

std::string write_dot(const DotDocument& doc);

// Throws DotParseError (with line number) on malformed input or unknown node
// type strings.
DotDocument parse_dot(std::string_view text);

// table may be null; rows are matched to CHN nodes through their chunk index.
DotDocument to_document(const MemGraph& graph, const EmbeddingTable* table = nullptr);

// Nodes referenced only by edges are created from their ids. Chunk data is not
// carried by DOT, so the result has no chunks.
MemGraph to_memgraph(const DotDocument& doc);

inline std::string export_dot(const MemGraph& graph, const EmbeddingTable* table = nullptr) {
  return write_dot(to_document(graph, table));
}

}  // namespace mem2graph
