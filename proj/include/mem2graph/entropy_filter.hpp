#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mem2graph/chunk_parser.hpp"
#include "mem2graph/heap_io.hpp"

namespace mem2graph {

// -sum p log2 p over byte frequencies, summed in ascending byte order. 0 for
// empty input.
double shannon_entropy(std::span<const std::uint8_t> data) noexcept;

std::vector<double> block_entropies(const HeapDump& heap);

struct EntropyPair {
  BlockIndex first_block_index = 0;
  double entropy_sum = 0.0;
  std::size_t rank = 0;  // position in the sorted list
};

// Adjacent pairs (i, i+1), sorted by sum descending, ties by index.
std::vector<EntropyPair> entropy_pairs(const HeapDump& heap);

// Number of leading pairs sharing the maximum sum.
std::size_t count_max_pairs(const std::vector<EntropyPair>& pairs) noexcept;

struct SmartKexResult {
  std::vector<bool> y_rows;        // Z: row has >= 4 bytes differing from both neighbours
  std::vector<bool> pair_flags;    // R: Z[i] && Z[i+1]
  std::vector<std::size_t> slice_offsets;  // byte offsets of flagged 128-byte slices
};

inline constexpr std::size_t kSmartKexSlice = 128;

SmartKexResult smartkex_preprocess(const HeapDump& heap);

enum class EntropyMode { None, OnlyMaxEntropy };
enum class SizeFilter { None, Activate };

std::string_view to_string(EntropyMode m) noexcept;
std::string_view to_string(SizeFilter s) noexcept;
std::optional<EntropyMode> parse_entropy_mode(std::string_view s) noexcept;
std::optional<SizeFilter> parse_size_filter(std::string_view s) noexcept;

inline constexpr std::array<std::size_t, 3> kKeyChunkSizes = {32, 48, 64};
inline constexpr std::size_t kStartBytesEntropyLimit = 64;

inline bool size_allowed(std::size_t size) noexcept {
  return size == kKeyChunkSizes[0] || size == kKeyChunkSizes[1] || size == kKeyChunkSizes[2];
}

struct FilterPolicy {
  EntropyMode entropy_mode = EntropyMode::None;
  SizeFilter size_filter = SizeFilter::None;
  // Only read with OnlyMaxEntropy; see calibrate_entropy_threshold.
  double entropy_threshold = 0.0;
};

// Entropy of the first min(limit, user_len) user-data bytes.
double start_bytes_entropy(const Chunk& chunk, const HeapDump& heap,
                           std::size_t limit = kStartBytesEntropyLimit) noexcept;

struct FilterOutcome {
  std::vector<bool> kept;
  std::vector<double> entropy;
  std::vector<bool> size_flag;
};

FilterOutcome filter_chunks(std::span<const Chunk> chunks, std::span<const double> entropies,
                            const FilterPolicy& policy);

// Minimum start-bytes entropy over key chunks; nullopt if there are none.
std::optional<double> min_key_chunk_entropy(std::span<const Chunk> chunks, const HeapDump& heap);

}  // namespace mem2graph
