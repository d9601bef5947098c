// mem2graph: heap dumps -> chunk statistics, pointer/entropy scans and DOT memgraphs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "mem2graph/annotation_validator.hpp"
#include "mem2graph/chunk_parser.hpp"
#include "mem2graph/entropy_filter.hpp"
#include "mem2graph/error.hpp"
#include "mem2graph/heap_io.hpp"
#include "mem2graph/parallel.hpp"
#include "mem2graph/pipeline.hpp"
#include "mem2graph/pointer_scan.hpp"
#include "mem2graph/synth.hpp"

namespace fs = std::filesystem;
using namespace mem2graph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 1;
constexpr int kExitUsage = 2;

// HEAP_START comes from --heap-start or, failing that, from the sibling JSON.
HeapDump load_raw(const fs::path& raw, const std::string& heap_start_hex) {
  Address start;
  if (!heap_start_hex.empty()) {
    start = hex_str_to_int(heap_start_hex);
  } else {
    start = parse_annotation(read_annotation_json(json_path_for_raw(raw))).heap_start;
  }
  return load_heap_dump(raw, start);
}

std::vector<fs::path> raw_inputs(const fs::path& input) {
  if (fs::is_regular_file(input)) return {input};
  if (fs::is_directory(input)) return find_files(input, "-heap.raw");
  throw IoError("input not found: " + input.string());
}

int cmd_check_annotations(const fs::path& dir, const std::optional<fs::path>& clean, bool drop_broken,
                          unsigned workers) {
  auto report = classify_corpus(dir, workers, clean);
  std::cout << report.summary();
  for (const auto& e : report.errors) spdlog::warn("{}", e);
  if (clean && drop_broken) {
    auto removed = drop_broken_chaining(*clean);
    for (const auto& p : removed) spdlog::info("removed broken chaining pair {}", p.string());
    std::cout << "Number of files removed for broken chaining: " << removed.size() << "\n";
  }
  return kExitOk;
}

int cmd_parse_chunks(const fs::path& input, bool debug, bool annotate) {
  const bool corpus = fs::is_directory(input);
  ParseStats total;
  for (const auto& raw : raw_inputs(input)) {
    try {
      auto [heap, ann] = load_heap_pair(raw, json_path_for_raw(raw));
      auto chunks = parse_chunks(heap);
      std::size_t footer_hits = 0;
      if (annotate || corpus) footer_hits = annotate_chunks(chunks, heap, ann).footer_hits;
      if (debug) {
        for (std::size_t i = 0; i < chunks.size(); ++i) {
          std::cout << "    Chunk [" << i + 1 << "]: " << chunks[i].describe() << "\n";
          if (chunks[i].is_zero_cropped)
            spdlog::warn("Chunk [{}] {} is out of bounds. Last block index: {}", chunks[i].address,
                         chunks[i].describe(), heap.block_count() - 1);
        }
      }
      ParseStats one;
      one.add_heap(heap, chunks, footer_hits);
      total.merge(one);
    } catch (const Error& e) {
      ++total.skipped_files;
      spdlog::warn("skipping {}: {}", raw.string(), e.what());
    }
  }
  std::cout << total.report(corpus);
  return kExitOk;
}

int cmd_scan_pointers(const fs::path& raw, const std::string& heap_start) {
  auto heap = load_raw(raw, heap_start);
  for (const auto& hit : detect_pointers(heap))
    std::cout << hit.block_index << " " << hit.value << " " << hit.target_index << "\n";
  return kExitOk;
}

int cmd_entropy_pairs(const fs::path& raw, const std::string& heap_start, std::size_t top) {
  auto heap = load_raw(raw, heap_start);
  auto pairs = entropy_pairs(heap);
  std::cout << "Number of pairs: " << pairs.size() << "\n";
  std::cout << "Number of pairs with max entropy sum: " << count_max_pairs(pairs) << "\n";
  for (std::size_t i = 0; i < pairs.size() && i < top; ++i)
    std::printf("%zu %zu %.17g\n", pairs[i].rank, pairs[i].first_block_index, pairs[i].entropy_sum);
  return kExitOk;
}

int cmd_smartkex(const fs::path& raw, const std::string& heap_start) {
  auto heap = load_raw(raw, heap_start);
  auto r = smartkex_preprocess(heap);
  for (auto off : r.slice_offsets) std::printf("0x%zx\n", off);
  return kExitOk;
}

int cmd_calibrate(const fs::path& input) {
  std::optional<double> best;
  std::size_t files = 0;
  for (const auto& raw : raw_inputs(input)) {
    try {
      auto [heap, ann] = load_heap_pair(raw, json_path_for_raw(raw));
      auto chunks = parse_chunks(heap);
      annotate_chunks(chunks, heap, ann);
      if (auto e = min_key_chunk_entropy(chunks, heap)) {
        ++files;
        if (!best || *e < *best) best = e;
      }
    } catch (const Error& e) {
      spdlog::warn("skipping {}: {}", raw.string(), e.what());
    }
  }
  if (!best) {
    std::cerr << "no key-annotated chunks found\n";
    return kExitFailures;
  }
  std::cout << "Files with key chunks: " << files << "\n";
  std::printf("Minimum key chunk entropy: %.17g\n", *best);
  std::printf("--entropy-threshold %.17g\n", *best);
  return kExitOk;
}

int cmd_synth(const fs::path& out, std::size_t count, std::uint64_t seed) {
  for (std::size_t i = 0; i < count; ++i) {
    auto heap = synth_heap(random_spec(seed + i));
    std::string id = std::to_string(1000 + i) + "-" + std::to_string(seed + i);
    write_pair(out, id, heap, heap.annotation.dump(4));
  }
  std::cout << "Wrote " << count << " synthetic pairs to " << out.string() << "\n";
  return kExitOk;
}

void add_pipeline(CLI::App& app, PipelineKind kind, PipelineOptions& o, std::string& entropy, std::string& size,
                  std::string& embedding) {
  auto* sub = app.add_subcommand(std::string(to_string(kind)), kind == PipelineKind::Graph
                                                                    ? "Export memgraphs as DOT"
                                                                    : "Export memgraphs with per-chunk embedding comments");
  sub->add_option("-i,--input", o.input, "RAW file or directory of RAW+JSON pairs")->required();
  sub->add_option("-o,--output", o.output, "Output root")->required();
  sub->add_option("--index", o.index, "Leading index of the output directory name");
  sub->add_flag("-v,--validate", o.validate, "Skip pairs whose annotation is not correct and complete");
  sub->add_option("-a,--annotate", o.annotate, "Annotation target (chunk-header-node)");
  if (kind == PipelineKind::GraphWithEmbeddingComments)
    sub->add_option("-c,--graph-comment-embedding-type", embedding,
                    "chunk-semantic-embedding | chunk-statistic-embedding | chunk-start-bytes-embedding")
        ->required();
  sub->add_option("-e,--entropy-filter", entropy, "none | only-max-entropy")->capture_default_str();
  sub->add_option("-s,--chunk-byte-size-filter", size, "none | activate")->capture_default_str();
  sub->add_option("--entropy-threshold", o.filter.entropy_threshold, "Minimum start-bytes entropy kept");
  sub->add_flag("--no-value-node", o.no_value_node, "Reduce to one node per chunk");
  sub->add_flag("!--no-free-chunks", o.include_free_chunks, "Leave free chunks out of the graph");
  sub->add_option("--depth", o.depth, "Ancestor/children depth of the semantic embedding")->capture_default_str();
  sub->add_option("--start-bytes", o.start_bytes_limit, "Byte count of the start-bytes embedding")
      ->capture_default_str();
  sub->add_option("-w,--workers", o.workers, "Worker threads (default: MEM2GRAPH_WORKERS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mem2graph: heap dump to memory graph tools"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("--verbose", verbose, "Debug logging");
  unsigned workers = worker_count_from_env();

  fs::path input;
  std::optional<fs::path> clean;
  bool drop_broken = false;
  auto* check = app.add_subcommand("check-annotations", "Classify JSON annotations and optionally copy clean pairs");
  check->add_option("dir", input)->required();
  check->add_option("--clean-output", clean, "Directory receiving correct and complete pairs");
  check->add_flag("--drop-broken-chaining", drop_broken, "Also drop clean pairs whose chunk chain breaks");
  check->add_option("-w,--workers", workers);

  bool debug = false, annotate = false;
  auto* parse = app.add_subcommand("parse-chunks", "Walk the malloc chunk chain");
  parse->add_option("input", input)->required();
  parse->add_flag("--debug", debug, "Print every chunk");
  parse->add_flag("--annotate", annotate, "Match annotation addresses to chunks");

  std::string heap_start;
  auto* scan = app.add_subcommand("scan-pointers", "Print block index, value and target index of every heap pointer");
  scan->add_option("raw", input)->required();
  scan->add_option("--heap-start", heap_start, "Hex HEAP_START (default: from the sibling JSON)");

  std::size_t top = 0;
  auto* pairs = app.add_subcommand("entropy-pairs", "Adjacent block pairs ranked by entropy sum");
  pairs->add_option("raw", input)->required();
  pairs->add_option("--heap-start", heap_start);
  pairs->add_option("--top", top, "Also print the first N pairs");

  auto* smartkex = app.add_subcommand("smartkex", "Offsets of 128-byte slices flagged by the row filter");
  smartkex->add_option("raw", input)->required();
  smartkex->add_option("--heap-start", heap_start);

  auto* calibrate = app.add_subcommand("calibrate-entropy", "Minimum start-bytes entropy over key chunks");
  calibrate->add_option("input", input)->required();

  std::size_t count = 10;
  std::uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth", "Write synthetic RAW+JSON pairs");
  synth->add_option("-o,--output", input)->required();
  synth->add_option("-n,--count", count)->capture_default_str();
  synth->add_option("--seed", seed)->capture_default_str();

  PipelineOptions graph_opts, emb_opts;
  graph_opts.workers = emb_opts.workers = worker_count_from_env();
  graph_opts.kind = PipelineKind::Graph;
  emb_opts.kind = PipelineKind::GraphWithEmbeddingComments;
  std::string g_entropy = "none", g_size = "none", g_emb, e_entropy = "none", e_size = "none", e_emb;
  add_pipeline(app, PipelineKind::Graph, graph_opts, g_entropy, g_size, g_emb);
  add_pipeline(app, PipelineKind::GraphWithEmbeddingComments, emb_opts, e_entropy, e_size, e_emb);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*check) return cmd_check_annotations(input, clean, drop_broken, workers);
    if (*parse) return cmd_parse_chunks(input, debug, annotate);
    if (*scan) return cmd_scan_pointers(input, heap_start);
    if (*pairs) return cmd_entropy_pairs(input, heap_start, top);
    if (*smartkex) return cmd_smartkex(input, heap_start);
    if (*calibrate) return cmd_calibrate(input);
    if (*synth) return cmd_synth(input, count, seed);

    const bool is_graph = app.got_subcommand("graph");
    PipelineOptions& o = is_graph ? graph_opts : emb_opts;
    const std::string& entropy = is_graph ? g_entropy : e_entropy;
    const std::string& size = is_graph ? g_size : e_size;
    auto em = parse_entropy_mode(entropy);
    auto sf = parse_size_filter(size);
    if (!em) throw UsageError("unknown entropy filter '" + entropy + "'");
    if (!sf) throw UsageError("unknown size filter '" + size + "'");
    o.filter.entropy_mode = *em;
    o.filter.size_filter = *sf;
    if (!is_graph) {
      o.embedding = parse_embedding_type(e_emb);
      if (!o.embedding) throw UsageError("unknown embedding type '" + e_emb + "'");
    }
    auto summary = run_pipeline(o);
    std::cout << summary.report();
    return summary.exit_code();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailures;
  }
}
