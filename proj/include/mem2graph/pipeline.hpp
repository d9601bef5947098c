#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mem2graph/embeddings.hpp"
#include "mem2graph/entropy_filter.hpp"
#include "mem2graph/heap_io.hpp"

namespace mem2graph {

enum class PipelineKind { Graph, GraphWithEmbeddingComments };

std::string_view to_string(PipelineKind k) noexcept;
std::optional<PipelineKind> parse_pipeline_kind(std::string_view s) noexcept;

inline constexpr std::string_view kChunkHeaderNode = "chunk-header-node";

struct PipelineOptions {
  PipelineKind kind = PipelineKind::Graph;
  std::filesystem::path input;
  std::filesystem::path output;
  std::size_t index = 0;
  bool validate = false;                     // -v: skip pairs whose annotation is not correct and complete
  std::optional<std::string> annotate;       // -a chunk-header-node: label key nodes / key chunks
  std::optional<EmbeddingType> embedding;    // -c, graph-with-embedding-comments only
  FilterPolicy filter;                       // -e / -s
  bool no_value_node = false;                // chunk-only graphs
  std::size_t depth = kDefaultDepth;
  std::size_t start_bytes_limit = kDefaultStartBytes;
  bool include_free_chunks = true;
  unsigned workers = 1;
};

// Throws UsageError.
void check_options(const PipelineOptions& options);

// "0_graph_with_embedding_comments_-v_-a_chunk-header-node_-c_chunk-semantic-embedding_-e_none_-s_none"
std::string output_dir_name(const PipelineOptions& options);

// One pair end to end, returning DOT text. Library errors propagate.
std::string process_heap(const HeapDump& heap, const Annotation& annotation, const PipelineOptions& options);

enum class FileStatus { Written, Skipped, Failed };

struct FileResult {
  std::filesystem::path raw_path;
  std::string file_id;
  FileStatus status = FileStatus::Failed;
  std::string reason;
};

struct PipelineSummary {
  std::filesystem::path output_dir;
  std::vector<FileResult> files;
  double seconds = 0;

  std::size_t count(FileStatus s) const;
  int exit_code() const { return count(FileStatus::Failed) == 0 ? 0 : 1; }
  std::string report() const;
};

// Every *-heap.raw under options.input (or the single file) is turned into
// <output>/<output_dir_name>/<relative dir>/<file_id>.gv. Skips leave a
// <file_id>.skipped note instead.
PipelineSummary run_pipeline(const PipelineOptions& options);

}  // namespace mem2graph
