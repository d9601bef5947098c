#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mem2graph/annotation_validator.hpp"
#include "mem2graph/chunk_parser.hpp"
#include "mem2graph/heap_io.hpp"
#include "mem2graph/pointer_scan.hpp"

namespace mem2graph {

// Synthetic heaps laid out like a glibc 2.28 main arena: one leading zero
// block, then a header chain ending in a free top chunk. Everything the
// generator writes is recorded so tests can compare parser output against it.

struct SynthChunkSpec {
  std::size_t size = 32;
  bool in_use = true;
  bool a = false;
  bool m = false;
};

struct PlantedPointer {
  BlockIndex from = 0;
  BlockIndex to = 0;
};

struct PlantedKey {
  char letter = 'A';
  std::size_t chunk = 0;  // index into SynthHeapSpec::chunks
  std::vector<std::uint8_t> bytes;
};

enum class AntiKind { Misaligned, HeapEnd, BelowStart };

struct AntiPointer {
  BlockIndex at = 0;
  AntiKind kind = AntiKind::Misaligned;
};

struct SynthHeapSpec {
  std::uint64_t seed = 0;
  Address heap_start = 0x55d2c0a1b000;
  std::vector<SynthChunkSpec> chunks;  // last entry is the top chunk, must be free
  // Blocks of the top chunk missing from the dump (0: the dump ends exactly
  // at the end of the top chunk).
  std::size_t cropped_blocks = 0;
  // Zero bytes appended after the last block, 0..7, to exercise padding.
  std::size_t trailing_bytes = 0;
  std::vector<PlantedPointer> pointers;
  std::vector<AntiPointer> anti_pointers;
  std::vector<PlantedKey> keys;
  std::optional<std::size_t> ssh_struct_chunk;
  std::optional<std::size_t> session_state_chunk;
  double zero_block_ratio = 0.1;  // fraction of filler blocks left zero
};

struct ExpectedChunk {
  BlockIndex block_index = 0;
  MallocHeader header;
  bool in_use = false;
  bool zero_cropped = false;
};

struct SynthHeap {
  std::vector<std::uint8_t> bytes;  // as a RAW file would hold them (unpadded)
  nlohmann::json annotation;
  std::vector<ExpectedChunk> chunks;
  std::vector<PointerHit> pointers;  // ascending block order
  std::vector<BlockIndex> anti_pointers;
  std::vector<std::pair<char, Address>> keys;

  HeapDump dump(const std::string& file_id = "synth") const;
};

// Throws ContractViolation when the SynthHeapSpec is inconsistent.
SynthHeap synth_heap(const SynthHeapSpec& spec);

struct RandomSpecOptions {
  std::size_t min_chunks = 2;
  std::size_t max_chunks = 40;
  double free_ratio = 0.2;
  double pointer_ratio = 0.2;   // of eligible user-data blocks
  double anti_ratio = 0.05;
  std::size_t keys = 6;         // planted if enough 32/48/64 in-use chunks exist
  bool allow_crop = true;
  bool random_flags = true;     // occasional A/M bits
};

SynthHeapSpec random_spec(std::uint64_t seed, const RandomSpecOptions& options = {});

// Big-endian hex with an even digit count, the way annotations store it.
std::string annotation_hex(Address addr);

// Overwrites chunk k's header with a size-0 value so the chain breaks there.
void break_chain(SynthHeap& heap, std::size_t chunk);

// Annotation text exhibiting the given defect category (CorrectComplete
// returns the clean annotation). Broken yields an empty file.
std::string annotation_with_defect(const SynthHeap& heap, FileCategory category, std::uint64_t seed);

// Writes <dir>/<file_id>-heap.raw and <dir>/<file_id>.json.
void write_pair(const std::filesystem::path& dir, const std::string& file_id, const SynthHeap& heap,
                const std::string& annotation_text);

}  // namespace mem2graph
