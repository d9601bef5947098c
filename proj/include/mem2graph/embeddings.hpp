#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mem2graph/heap_io.hpp"
#include "mem2graph/memgraph.hpp"

namespace mem2graph {

enum class EmbeddingType { Semantic, Statistic, StartBytes };

std::string_view to_string(EmbeddingType t) noexcept;
std::optional<EmbeddingType> parse_embedding_type(std::string_view s) noexcept;

inline constexpr std::size_t kDefaultDepth = 8;
inline constexpr std::size_t kDefaultStartBytes = 64;
inline constexpr std::size_t kMaxNgram = 8;

struct FeatureVector {
  std::vector<std::string> field_names;
  std::vector<double> values;
};

// Attributes every embedding carries. chn_addr identifies the chunk and is not
// a learning feature.
struct ChunkBasics {
  double block_position_in_chunk = 0;
  Address chn_addr = 0;
  std::size_t chunk_byte_size = 0;
  std::size_t chunk_number_in_heap = 0;  // 1-based
  std::size_t chunk_ptrs = 0;
  std::size_t chunk_vns = 0;
};

ChunkBasics chunk_basics(const MemGraph& graph, std::size_t chunk, const HeapDump& heap);

enum class Direction { Out, In };

// Layered set walk seeded with the CHN's members: entry l is (CHN count, PN
// count) of layer l+1.
std::vector<std::pair<std::size_t, std::size_t>> layered_counts(const MemGraph& graph, std::size_t chn_node,
                                                                Direction dir, std::size_t depth);

std::vector<std::string> semantic_field_names(std::size_t depth = kDefaultDepth);
std::vector<std::string> statistic_field_names();
std::vector<std::string> start_bytes_field_names(std::size_t limit = kDefaultStartBytes);
std::vector<std::string> field_names(EmbeddingType type, std::size_t depth = kDefaultDepth,
                                     std::size_t limit = kDefaultStartBytes);

// Fields that identify rather than describe (excluded from learning).
inline bool is_identifier_field(std::string_view name) noexcept { return name == "chn_addr"; }

FeatureVector semantic_embedding(const MemGraph& graph, std::size_t chn_node, const ChunkBasics& basics,
                                 std::size_t depth = kDefaultDepth);

// Normalised frequencies of every n-bit pattern, n = 1..8, bits read most
// significant first, stride 1. Patterns in numeric order within each n.
std::vector<double> bit_ngram_frequencies(std::span<const std::uint8_t> data);

struct ByteMoments {
  double mean = 0, std = 0, mad = 0, skewness = 0, kurtosis = 0, entropy = 0;
};

// Population moments over byte values; mad is the mean absolute deviation,
// kurtosis is excess kurtosis.
ByteMoments byte_moments(std::span<const std::uint8_t> data);

// NaN in n-gram and moment slots when the bytes have zero deviation.
FeatureVector statistic_embedding(std::span<const std::uint8_t> user_data, const ChunkBasics& basics);

FeatureVector start_bytes_embedding(std::span<const std::uint8_t> user_data, const ChunkBasics& basics,
                                    std::size_t limit = kDefaultStartBytes);

inline constexpr std::string_view kEntropyField = "entropy";
inline constexpr std::string_view kSizeFlagField = "chunk_size_flag";

void attach_filter_features(FeatureVector& vec, std::optional<double> entropy, std::optional<bool> size_allowed);

// NaN -> 0, in place.
void normalize_nan(std::vector<double>& values) noexcept;

struct EmbeddingOptions {
  EmbeddingType type = EmbeddingType::Semantic;
  std::size_t depth = kDefaultDepth;
  std::size_t start_bytes_limit = kDefaultStartBytes;
  bool entropy_feature = false;
  bool size_feature = false;
};

struct EmbeddingTable {
  EmbeddingType type = EmbeddingType::Semantic;
  std::vector<std::string> fields;
  std::vector<std::vector<double>> rows;  // indexed like graph.chunks, empty if the chunk has no CHN
};

// Computed on the full block graph.
EmbeddingTable compute_embeddings(const MemGraph& full_graph, const HeapDump& heap, const EmbeddingOptions& options);

}  // namespace mem2graph
