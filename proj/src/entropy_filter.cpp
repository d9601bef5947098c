#include "mem2graph/entropy_filter.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mem2graph {

namespace {

// Same association order as numpy's pairwise float summation, so ties in
// entropy sums break the same way as the reference tooling.
double pairwise_sum(const double* a, std::size_t n) noexcept {
  if (n < 8) {
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += a[i];
    return res;
  }
  if (n <= 128) {
    double r[8];
    for (std::size_t j = 0; j < 8; ++j) r[j] = a[j];
    std::size_t i = 8;
    for (; i < n - n % 8; i += 8)
      for (std::size_t j = 0; j < 8; ++j) r[j] += a[i + j];
    double res = ((r[0] + r[1]) + (r[2] + r[3])) + ((r[4] + r[5]) + (r[6] + r[7]));
    for (; i < n; ++i) res += a[i];
    return res;
  }
  std::size_t n2 = n / 2;
  n2 -= n2 % 8;
  return pairwise_sum(a, n2) + pairwise_sum(a + n2, n - n2);
}

}  // namespace

double shannon_entropy(std::span<const std::uint8_t> data) noexcept {
  if (data.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (auto b : data) ++counts[b];
  const double n = static_cast<double>(data.size());
  std::array<double, 256> terms;
  std::size_t k = 0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    terms[k++] = p * std::log2(p);
  }
  const double h = -pairwise_sum(terms.data(), k);
  // -0.0 for a single symbol
  return h == 0.0 ? 0.0 : h;
}

std::vector<double> block_entropies(const HeapDump& heap) {
  std::vector<double> out(heap.block_count());
  for (BlockIndex i = 0; i < out.size(); ++i) out[i] = shannon_entropy(heap.block(i));
  return out;
}

std::vector<EntropyPair> entropy_pairs(const HeapDump& heap) {
  const auto h = block_entropies(heap);
  std::vector<EntropyPair> pairs;
  if (h.size() < 2) return pairs;
  pairs.reserve(h.size() - 1);
  for (BlockIndex i = 0; i + 1 < h.size(); ++i) pairs.push_back({i, h[i] + h[i + 1], 0});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const EntropyPair& a, const EntropyPair& b) { return a.entropy_sum > b.entropy_sum; });
  for (std::size_t r = 0; r < pairs.size(); ++r) pairs[r].rank = r;
  return pairs;
}

std::size_t count_max_pairs(const std::vector<EntropyPair>& pairs) noexcept {
  if (pairs.empty()) return 0;
  const double top = pairs.front().entropy_sum;
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [top](const EntropyPair& p) { return p.entropy_sum == top; }));
}

SmartKexResult smartkex_preprocess(const HeapDump& heap) {
  SmartKexResult r;
  const std::size_t rows = heap.block_count();
  if (rows < 2) return r;
  auto bytes = heap.bytes();
  auto x = [&](std::size_t i, std::size_t j) { return bytes[i * kBlockSize + j]; };

  r.y_rows.assign(rows, false);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t differing = 0;
    for (std::size_t j = 0; j < kBlockSize; ++j) {
      const bool has_right = j + 1 < kBlockSize;
      const bool has_down = i + 1 < rows;
      if (!has_right && !has_down) continue;
      bool y = true;
      if (has_right) y = y && x(i, j) != x(i, j + 1);
      if (has_down) y = y && x(i, j) != x(i + 1, j);
      differing += y;
    }
    r.y_rows[i] = differing >= kBlockSize / 2;
  }

  r.pair_flags.assign(rows - 1, false);
  std::set<std::size_t> offsets;
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    r.pair_flags[i] = r.y_rows[i] && r.y_rows[i + 1];
    if (!r.pair_flags[i]) continue;
    offsets.insert(i * kBlockSize / kSmartKexSlice * kSmartKexSlice);
    offsets.insert((i + 1) * kBlockSize / kSmartKexSlice * kSmartKexSlice);
  }
  r.slice_offsets.assign(offsets.begin(), offsets.end());
  return r;
}

std::string_view to_string(EntropyMode m) noexcept {
  return m == EntropyMode::None ? "none" : "only-max-entropy";
}

std::string_view to_string(SizeFilter s) noexcept { return s == SizeFilter::None ? "none" : "activate"; }

std::optional<EntropyMode> parse_entropy_mode(std::string_view s) noexcept {
  if (s == "none") return EntropyMode::None;
  if (s == "only-max-entropy") return EntropyMode::OnlyMaxEntropy;
  return std::nullopt;
}

std::optional<SizeFilter> parse_size_filter(std::string_view s) noexcept {
  if (s == "none") return SizeFilter::None;
  if (s == "activate") return SizeFilter::Activate;
  return std::nullopt;
}

double start_bytes_entropy(const Chunk& chunk, const HeapDump& heap, std::size_t limit) noexcept {
  auto data = chunk.user_data(heap);
  return shannon_entropy(data.first(std::min(limit, data.size())));
}

FilterOutcome filter_chunks(std::span<const Chunk> chunks, std::span<const double> entropies,
                            const FilterPolicy& policy) {
  FilterOutcome out;
  out.kept.resize(chunks.size(), true);
  out.entropy.assign(entropies.begin(), entropies.end());
  out.size_flag.resize(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    out.size_flag[i] = size_allowed(chunks[i].header.size);
    if (policy.size_filter == SizeFilter::Activate && !out.size_flag[i]) out.kept[i] = false;
    if (policy.entropy_mode == EntropyMode::OnlyMaxEntropy && entropies[i] < policy.entropy_threshold)
      out.kept[i] = false;
  }
  return out;
}

std::optional<double> min_key_chunk_entropy(std::span<const Chunk> chunks, const HeapDump& heap) {
  std::optional<double> best;
  for (const auto& c : chunks) {
    if (!c.is_key_chunk()) continue;
    double e = start_bytes_entropy(c, heap);
    if (!best || e < *best) best = e;
  }
  return best;
}

}  // namespace mem2graph
