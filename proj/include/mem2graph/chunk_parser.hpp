#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mem2graph/heap_io.hpp"

namespace mem2graph {

inline constexpr std::uint64_t kFlagNonMainArena = 0x4;
inline constexpr std::uint64_t kFlagIsMmapped = 0x2;
inline constexpr std::uint64_t kFlagPrevInUse = 0x1;
inline constexpr std::size_t kMinChunkSize = 16;

struct MallocHeader {
  std::size_t size = 0;
  bool a = false;  // NON_MAIN_ARENA
  bool m = false;  // IS_MMAPPED
  bool p = false;  // PREV_INUSE

  bool operator==(const MallocHeader&) const = default;
};

MallocHeader parse_malloc_header(std::uint64_t value) noexcept;
MallocHeader parse_malloc_header(std::span<const std::uint8_t> block);

// Size bits and flags packed back into the on-heap header word.
std::uint64_t encode_malloc_header(const MallocHeader& h) noexcept;

struct Chunk {
  // First user-data block; the header sits at block_index - 1.
  BlockIndex block_index = 0;
  Address address = 0;
  MallocHeader header;
  bool is_in_use = false;
  bool correct_footer = false;
  bool is_zero_cropped = false;

  std::vector<char> key_letters;
  bool contains_ssh_struct = false;
  bool contains_session_state = false;

  BlockIndex header_index() const noexcept { return block_index - 1; }
  std::size_t block_span() const noexcept { return header.size / kBlockSize; }
  BlockIndex footer_index() const noexcept { return header_index() + block_span() - 1; }
  BlockIndex next_header_index() const noexcept { return header_index() + block_span(); }
  // Member blocks are [block_index, footer_index], clipped to the heap.
  std::size_t member_count(const HeapDump& heap) const noexcept;
  std::span<const std::uint8_t> user_data(const HeapDump& heap) const noexcept;

  bool is_annotated() const noexcept {
    return !key_letters.empty() || contains_ssh_struct || contains_session_state;
  }
  bool is_key_chunk() const noexcept { return !key_letters.empty(); }

  // "Chunk(block_index=2, size=592, flags=[A=False, M=False, P=True])"
  std::string describe() const;
};

// Walks the header chain. Throws BrokenChaining on a header smaller than a
// header+footer pair.
std::vector<Chunk> parse_chunks(const HeapDump& heap);

// Adds every tag whose address equals chunk.address. Throws IntegrityError
// when a tag would land on a free chunk.
void annotate_chunk(Chunk& chunk, std::span<const std::pair<char, Address>> key_addresses,
                    std::optional<Address> ssh_struct_addr, std::optional<Address> session_state_addr);

struct AnnotationMatch {
  std::vector<Address> unmatched;         // annotation addresses equal to no chunk address
  std::size_t footer_hits = 0;            // ... of those, how many hit a footer block
};

AnnotationMatch annotate_chunks(std::vector<Chunk>& chunks, const HeapDump& heap, const Annotation& ann);

struct ParseStats {
  std::size_t files = 0;
  std::size_t skipped_files = 0;
  std::size_t chunks = 0;
  std::size_t blocks = 0;
  std::size_t p_set = 0;
  std::size_t m_set = 0;
  std::size_t a_set = 0;
  std::size_t free_chunks = 0;
  std::size_t zero_only = 0;
  std::size_t blocks_in_free = 0;
  std::size_t correct_footer = 0;
  std::size_t free_correct_footer = 0;
  std::size_t free_annotated = 0;
  std::size_t footer_annotations = 0;
  std::size_t annotated = 0;
  std::size_t in_use_footer_annotated = 0;
  std::size_t in_use_footer_key = 0;
  std::map<std::size_t, std::size_t> key_sizes;

  void add_heap(const HeapDump& heap, const std::vector<Chunk>& chunks, std::size_t footer_hits = 0);
  void merge(const ParseStats& other);
  // Multi-line block in the "-----------> Statistics:" log layout.
  std::string report(bool corpus_layout) const;
};

bool is_zero_only(const Chunk& chunk, const HeapDump& heap) noexcept;

}  // namespace mem2graph
