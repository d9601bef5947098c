#include "mem2graph/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mem2graph/entropy_filter.hpp"
#include "mem2graph/error.hpp"

namespace mem2graph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> numbered(std::string_view stem, std::size_t depth) {
  std::vector<std::string> out;
  for (std::size_t l = 1; l <= depth; ++l) out.push_back(std::string(stem) + "_" + std::to_string(l));
  return out;
}

void append_basics(FeatureVector& v, const ChunkBasics& b) {
  const std::pair<const char*, double> fields[] = {
      {"block_position_in_chunk", b.block_position_in_chunk},
      {"chn_addr", static_cast<double>(b.chn_addr)},
      {"chunk_byte_size", static_cast<double>(b.chunk_byte_size)},
      {"chunk_number_in_heap", static_cast<double>(b.chunk_number_in_heap)},
      {"chunk_ptrs", static_cast<double>(b.chunk_ptrs)},
      {"chunk_vns", static_cast<double>(b.chunk_vns)},
  };
  for (auto [name, value] : fields) {
    v.field_names.emplace_back(name);
    v.values.push_back(value);
  }
}

std::vector<std::string> basic_field_names() {
  FeatureVector v;
  append_basics(v, {});
  return v.field_names;
}

}  // namespace

std::string_view to_string(EmbeddingType t) noexcept {
  switch (t) {
    case EmbeddingType::Semantic: return "chunk-semantic-embedding";
    case EmbeddingType::Statistic: return "chunk-statistic-embedding";
    case EmbeddingType::StartBytes: return "chunk-start-bytes-embedding";
  }
  return "?";
}

std::optional<EmbeddingType> parse_embedding_type(std::string_view s) noexcept {
  for (auto t : {EmbeddingType::Semantic, EmbeddingType::Statistic, EmbeddingType::StartBytes})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

ChunkBasics chunk_basics(const MemGraph& graph, std::size_t chunk, const HeapDump& heap) {
  const Chunk& c = graph.chunks.at(chunk);
  ChunkBasics b;
  b.chn_addr = heap.heap_start() + c.header_index() * kBlockSize;
  b.chunk_byte_size = c.header.size;
  b.chunk_number_in_heap = chunk + 1;
  auto content = chunk_content(c, heap);
  b.chunk_ptrs = content.pointers;
  b.chunk_vns = content.values;
  return b;
}

std::vector<std::pair<std::size_t, std::size_t>> layered_counts(const MemGraph& g, std::size_t chn_node,
                                                                Direction dir, std::size_t depth) {
  if (chn_node >= g.nodes.size() || g.nodes[chn_node].type != NodeType::CHN)
    throw ContractViolation("semantic embedding needs a CHN node");

  // stamp[v] == layer marks v as already in the next set.
  std::vector<std::size_t> stamp(g.nodes.size(), 0);
  std::size_t layer = 1;
  std::vector<std::size_t> next;
  for (std::size_t m : g.out(chn_node)) {
    if (stamp[m] != layer) {
      stamp[m] = layer;
      next.push_back(m);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> result;
  result.reserve(depth);
  std::vector<std::size_t> current;
  for (std::size_t d = 0; d < depth; ++d) {
    current.swap(next);
    next.clear();
    ++layer;
    std::size_t chn = 0, ptr = 0;
    for (std::size_t v : current) {
      if (g.nodes[v].type == NodeType::CHN)
        ++chn;
      else if (g.nodes[v].type == NodeType::PN)
        ++ptr;
      const auto& nb = dir == Direction::Out ? g.out(v) : g.in(v);
      for (std::size_t w : nb) {
        if (stamp[w] != layer) {
          stamp[w] = layer;
          next.push_back(w);
        }
      }
    }
    result.emplace_back(chn, ptr);
  }
  return result;
}

std::vector<std::string> semantic_field_names(std::size_t depth) {
  std::vector<std::string> f = {"block_position_in_chunk", "chn_addr"};
  for (auto stem : {"chns_ancestor", "chns_children"})
    for (auto& n : numbered(stem, depth)) f.push_back(n);
  for (auto n : {"chunk_byte_size", "chunk_number_in_heap", "chunk_ptrs", "chunk_vns"}) f.emplace_back(n);
  for (auto stem : {"ptrs_ancestor", "ptrs_children"})
    for (auto& n : numbered(stem, depth)) f.push_back(n);
  return f;
}

std::vector<std::string> statistic_field_names() {
  std::vector<std::string> f;
  for (std::size_t n = 1; n <= kMaxNgram; ++n) {
    for (std::size_t pattern = 0; pattern < (std::size_t{1} << n); ++pattern) {
      std::string bits(n, '0');
      for (std::size_t k = 0; k < n; ++k)
        if (pattern >> (n - 1 - k) & 1) bits[k] = '1';
      f.push_back("ngram_" + std::to_string(n) + "_" + bits);
    }
  }
  for (auto n : {"mean", "std", "mad", "skewness", "kurtosis", "byte_entropy"}) f.emplace_back(n);
  for (auto& n : basic_field_names()) f.push_back(n);
  return f;
}

std::vector<std::string> start_bytes_field_names(std::size_t limit) {
  auto f = basic_field_names();
  for (std::size_t i = 0; i < limit; ++i) f.push_back("byte_" + std::to_string(i));
  return f;
}

std::vector<std::string> field_names(EmbeddingType type, std::size_t depth, std::size_t limit) {
  switch (type) {
    case EmbeddingType::Semantic: return semantic_field_names(depth);
    case EmbeddingType::Statistic: return statistic_field_names();
    case EmbeddingType::StartBytes: return start_bytes_field_names(limit);
  }
  return {};
}

FeatureVector semantic_embedding(const MemGraph& g, std::size_t chn_node, const ChunkBasics& b, std::size_t depth) {
  auto ancestors = layered_counts(g, chn_node, Direction::In, depth);
  auto children = layered_counts(g, chn_node, Direction::Out, depth);
  FeatureVector v;
  v.field_names = semantic_field_names(depth);
  v.values.reserve(v.field_names.size());
  v.values.push_back(b.block_position_in_chunk);
  v.values.push_back(static_cast<double>(b.chn_addr));
  for (auto& [chn, _] : ancestors) v.values.push_back(static_cast<double>(chn));
  for (auto& [chn, _] : children) v.values.push_back(static_cast<double>(chn));
  v.values.push_back(static_cast<double>(b.chunk_byte_size));
  v.values.push_back(static_cast<double>(b.chunk_number_in_heap));
  v.values.push_back(static_cast<double>(b.chunk_ptrs));
  v.values.push_back(static_cast<double>(b.chunk_vns));
  for (auto& [_, ptr] : ancestors) v.values.push_back(static_cast<double>(ptr));
  for (auto& [_, ptr] : children) v.values.push_back(static_cast<double>(ptr));
  return v;
}

std::vector<double> bit_ngram_frequencies(std::span<const std::uint8_t> data) {
  std::vector<double> out;
  out.reserve((std::size_t{1} << (kMaxNgram + 1)) - 2);
  const std::size_t bits = data.size() * 8;
  auto bit = [&](std::size_t i) { return (data[i / 8] >> (7 - i % 8)) & 1u; };
  for (std::size_t n = 1; n <= kMaxNgram; ++n) {
    std::vector<std::size_t> counts(std::size_t{1} << n, 0);
    const std::size_t windows = bits >= n ? bits - n + 1 : 0;
    const std::size_t mask = (std::size_t{1} << n) - 1;
    std::size_t window = 0;
    for (std::size_t i = 0; i < bits; ++i) {
      window = ((window << 1) | bit(i)) & mask;
      if (i + 1 >= n) ++counts[window];
    }
    for (std::size_t c : counts) out.push_back(windows ? static_cast<double>(c) / static_cast<double>(windows) : 0.0);
  }
  return out;
}

ByteMoments byte_moments(std::span<const std::uint8_t> data) {
  ByteMoments m;
  if (data.empty()) return m;
  const double n = static_cast<double>(data.size());
  double sum = 0;
  for (auto b : data) sum += b;
  m.mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0, abs_dev = 0;
  for (auto b : data) {
    const double d = b - m.mean;
    abs_dev += std::abs(d);
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.std = std::sqrt(m2);
  m.mad = abs_dev / n;
  if (m2 > 0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2) - 3.0;
  } else {
    m.skewness = kNaN;
    m.kurtosis = kNaN;
  }
  m.entropy = shannon_entropy(data);
  return m;
}

FeatureVector statistic_embedding(std::span<const std::uint8_t> user_data, const ChunkBasics& basics) {
  FeatureVector v;
  v.field_names = statistic_field_names();
  v.values.reserve(v.field_names.size());
  const ByteMoments m = byte_moments(user_data);
  if (m.std == 0.0) {
    // Constant content carries nothing for key detection; NaN marks it.
    v.values.assign(v.field_names.size() - basic_field_names().size(), kNaN);
  } else {
    v.values = bit_ngram_frequencies(user_data);
    for (double x : {m.mean, m.std, m.mad, m.skewness, m.kurtosis, m.entropy}) v.values.push_back(x);
  }
  FeatureVector tail;
  append_basics(tail, basics);
  v.values.insert(v.values.end(), tail.values.begin(), tail.values.end());
  return v;
}

FeatureVector start_bytes_embedding(std::span<const std::uint8_t> user_data, const ChunkBasics& basics,
                                    std::size_t limit) {
  FeatureVector v;
  append_basics(v, basics);
  for (std::size_t i = 0; i < limit; ++i) {
    v.field_names.push_back("byte_" + std::to_string(i));
    v.values.push_back(i < user_data.size() ? user_data[i] : 0.0);
  }
  return v;
}

void attach_filter_features(FeatureVector& vec, std::optional<double> entropy, std::optional<bool> size_flag) {
  if (entropy) {
    vec.field_names.emplace_back(kEntropyField);
    vec.values.push_back(*entropy);
  }
  if (size_flag) {
    vec.field_names.emplace_back(kSizeFlagField);
    vec.values.push_back(*size_flag ? 1.0 : 0.0);
  }
}

void normalize_nan(std::vector<double>& values) noexcept {
  for (double& x : values)
    if (std::isnan(x)) x = 0.0;
}

EmbeddingTable compute_embeddings(const MemGraph& g, const HeapDump& heap, const EmbeddingOptions& opt) {
  if (g.chunk_only) throw ContractViolation("embeddings are computed on the full block graph");
  EmbeddingTable t;
  t.type = opt.type;
  t.fields = field_names(opt.type, opt.depth, opt.start_bytes_limit);
  if (opt.entropy_feature) t.fields.emplace_back(kEntropyField);
  if (opt.size_feature) t.fields.emplace_back(kSizeFlagField);
  t.rows.resize(g.chunks.size());

  for (std::size_t ci = 0; ci < g.chunks.size(); ++ci) {
    auto chn = g.chunk_node(ci);
    if (!chn) continue;
    const Chunk& c = g.chunks[ci];
    const ChunkBasics b = chunk_basics(g, ci, heap);
    auto data = c.user_data(heap);
    FeatureVector v;
    switch (opt.type) {
      case EmbeddingType::Semantic: v = semantic_embedding(g, *chn, b, opt.depth); break;
      case EmbeddingType::Statistic: v = statistic_embedding(data, b); break;
      case EmbeddingType::StartBytes: v = start_bytes_embedding(data, b, opt.start_bytes_limit); break;
    }
    attach_filter_features(v, opt.entropy_feature ? std::optional<double>(start_bytes_entropy(c, heap)) : std::nullopt,
                           opt.size_feature ? std::optional<bool>(size_allowed(c.header.size)) : std::nullopt);
    t.rows[ci] = std::move(v.values);
  }
  return t;
}

}  // namespace mem2graph
