#include "mem2graph/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "mem2graph/annotation_validator.hpp"
#include "mem2graph/chunk_parser.hpp"
#include "mem2graph/dot.hpp"
#include "mem2graph/error.hpp"
#include "mem2graph/memgraph.hpp"
#include "mem2graph/parallel.hpp"

namespace fs = std::filesystem;

namespace mem2graph {

std::string_view to_string(PipelineKind k) noexcept {
  return k == PipelineKind::Graph ? "graph" : "graph-with-embedding-comments";
}

std::optional<PipelineKind> parse_pipeline_kind(std::string_view s) noexcept {
  if (s == "graph") return PipelineKind::Graph;
  if (s == "graph-with-embedding-comments") return PipelineKind::GraphWithEmbeddingComments;
  return std::nullopt;
}

void check_options(const PipelineOptions& o) {
  if (o.annotate && *o.annotate != kChunkHeaderNode)
    throw UsageError("unsupported annotation mode '" + *o.annotate + "', expected " + std::string(kChunkHeaderNode));
  if (o.kind == PipelineKind::GraphWithEmbeddingComments && !o.embedding)
    throw UsageError("graph-with-embedding-comments needs an embedding type (-c)");
  if (o.kind == PipelineKind::Graph && o.embedding)
    throw UsageError("-c only applies to graph-with-embedding-comments");
  if (o.filter.entropy_mode == EntropyMode::OnlyMaxEntropy && !(o.filter.entropy_threshold > 0.0))
    throw UsageError("only-max-entropy needs a positive --entropy-threshold (see calibrate-entropy)");
  if (o.depth == 0) throw UsageError("depth must be at least 1");
  if (o.start_bytes_limit == 0) throw UsageError("start-bytes limit must be at least 1");
}

std::string output_dir_name(const PipelineOptions& o) {
  std::string kind(to_string(o.kind));
  for (auto& ch : kind)
    if (ch == '-') ch = '_';
  std::string name = std::to_string(o.index) + "_" + kind;
  if (o.validate) name += "_-v";
  if (o.annotate) name += "_-a_" + *o.annotate;
  if (o.kind == PipelineKind::GraphWithEmbeddingComments && o.embedding)
    name += "_-c_" + std::string(to_string(*o.embedding));
  name += "_-e_" + std::string(to_string(o.filter.entropy_mode));
  name += "_-s_" + std::string(to_string(o.filter.size_filter));
  if (o.no_value_node) name += "_--no-value-node";
  return name;
}

std::string process_heap(const HeapDump& heap, const Annotation& annotation, const PipelineOptions& o) {
  // Without -a the graph must not depend on key positions at all.
  Annotation ann = annotation;
  if (!o.annotate) {
    ann.keys.clear();
    ann.ssh_struct_addr.reset();
    ann.session_state_addr.reset();
  }

  auto chunks = parse_chunks(heap);
  if (o.annotate) annotate_chunks(chunks, heap, ann);

  BuildOptions build;
  build.include_free_chunks = o.include_free_chunks;
  MemGraph graph = build_memgraph(heap, chunks, ann, build);

  std::optional<EmbeddingTable> table;
  if (o.kind == PipelineKind::GraphWithEmbeddingComments) {
    EmbeddingOptions eo;
    eo.type = *o.embedding;
    eo.depth = o.depth;
    eo.start_bytes_limit = o.start_bytes_limit;
    // A disabled filter is exposed as a feature instead.
    eo.entropy_feature = o.filter.entropy_mode == EntropyMode::None;
    eo.size_feature = o.filter.size_filter == SizeFilter::None;
    table = compute_embeddings(graph, heap, eo);
  }

  if (o.filter.entropy_mode != EntropyMode::None || o.filter.size_filter != SizeFilter::None) {
    std::vector<double> entropies(graph.chunks.size());
    for (std::size_t i = 0; i < graph.chunks.size(); ++i) entropies[i] = start_bytes_entropy(graph.chunks[i], heap);
    auto outcome = filter_chunks(graph.chunks, entropies, o.filter);
    retain_chunks(graph, outcome.kept);
  }

  if (o.no_value_node) {
    graph = reduce_to_chunk_graph(graph);
    if (o.annotate) label_key_chunks(graph, ann);
  }

  return export_dot(graph, table ? &*table : nullptr);
}

std::size_t PipelineSummary::count(FileStatus s) const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.status == s;
  return n;
}

std::string PipelineSummary::report() const {
  std::ostringstream os;
  os << "Output directory: " << output_dir.string() << "\n";
  os << "Files written: " << count(FileStatus::Written) << "\n";
  os << "Files skipped: " << count(FileStatus::Skipped) << "\n";
  os << "Files failed: " << count(FileStatus::Failed) << "\n";
  for (const auto& f : files)
    if (f.status == FileStatus::Failed) os << "  FAILED " << f.raw_path.string() << ": " << f.reason << "\n";
  os << "Elapsed: " << seconds << " s\n";
  return os.str();
}

namespace {

unsigned worker_number() {
  static std::atomic<unsigned> next{0};
  thread_local unsigned id = next++;
  return id;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

PipelineSummary run_pipeline(const PipelineOptions& o) {
  check_options(o);
  auto started = std::chrono::steady_clock::now();

  std::vector<fs::path> raws;
  fs::path root = o.input;
  if (fs::is_regular_file(o.input)) {
    raws.push_back(o.input);
    root = o.input.parent_path();
  } else if (fs::is_directory(o.input)) {
    raws = find_files(o.input, "-heap.raw");
  } else {
    throw IoError("input not found: " + o.input.string());
  }

  PipelineSummary summary;
  summary.output_dir = o.output / output_dir_name(o);
  summary.files.resize(raws.size());
  std::atomic<std::size_t> done{0};

  parallel_for(raws.size(), std::max(1u, o.workers), [&](std::size_t i) {
    FileResult& r = summary.files[i];
    r.raw_path = raws[i];
    r.file_id = file_id_from_path(raws[i]);
    fs::path rel = fs::relative(raws[i].parent_path(), root);
    if (rel == ".") rel.clear();
    fs::path dir = summary.output_dir / rel;
    try {
      fs::path json = json_path_for_raw(raws[i]);
      if (o.validate) {
        auto verdict = classify_file(json);
        if (verdict.category != FileCategory::CorrectComplete) {
          r.status = FileStatus::Skipped;
          r.reason = std::string(to_string(verdict.category));
          write_text(dir / (r.file_id + ".skipped"), r.reason + "\n");
        }
      }
      if (r.status != FileStatus::Skipped) {
        auto [heap, ann] = load_heap_pair(raws[i], json);
        write_text(dir / (r.file_id + ".gv"), process_heap(heap, ann, o));
        r.status = FileStatus::Written;
      }
    } catch (const Error& e) {
      // Unreadable or inconsistent input data: logged and skipped, not a tool failure.
      r.status = FileStatus::Skipped;
      r.reason = e.what();
      try {
        write_text(dir / (r.file_id + ".skipped"), r.reason + "\n");
      } catch (const std::exception& w) {
        r.status = FileStatus::Failed;
        r.reason = w.what();
      }
    } catch (const std::exception& e) {
      r.status = FileStatus::Failed;
      r.reason = e.what();
    }
    std::size_t n = ++done;
    if (r.status == FileStatus::Failed)
      spdlog::error("FAIL [t: worker-{}] [{} / {} files] [fid: {}] {}", worker_number(), n, raws.size(), r.file_id,
                    r.reason);
    else
      spdlog::info("{} [t: worker-{}] [{} / {} files] [fid: {}]", r.status == FileStatus::Written ? "OK" : "SKIP",
                   worker_number(), n, raws.size(), r.file_id);
  });

  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

}  // namespace mem2graph
