#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mem2graph {

using Address = std::uint64_t;
using BlockIndex = std::size_t;

inline constexpr std::size_t kBlockSize = 8;

// Big-endian hex string ("56343a198000") to integer. Even digit count, at
// most 16 digits; anything else is a FormatError.
Address hex_str_to_int(std::string_view hex);

// Little-endian decode of an in-dump 8-byte block.
Address pointer_str_to_int(std::span<const std::uint8_t> block);

constexpr bool is_pointer_aligned(Address addr) noexcept { return addr % kBlockSize == 0; }

// Lower-case hex rendering without prefix or padding ("56343a198000").
std::string to_hex(Address addr);

// One heap snapshot, padded with zeros to a whole number of 8-byte blocks.
// Immutable after construction.
class HeapDump {
 public:
  HeapDump(std::string file_id, std::vector<std::uint8_t> bytes, Address heap_start);

  const std::string& file_id() const noexcept { return file_id_; }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
  Address heap_start() const noexcept { return heap_start_; }
  // One past the last byte of the (padded) dump.
  Address heap_end() const noexcept { return heap_start_ + bytes_.size(); }
  std::size_t size() const noexcept { return bytes_.size(); }
  std::size_t block_count() const noexcept { return bytes_.size() / kBlockSize; }
  // Number of zero bytes appended at load time.
  std::size_t padding() const noexcept { return padding_; }

  std::span<const std::uint8_t, kBlockSize> block(BlockIndex index) const;
  std::uint64_t block_value(BlockIndex index) const;
  bool is_zero_block(BlockIndex index) const { return block_value(index) == 0; }

  bool contains(Address addr) const noexcept { return addr >= heap_start_ && addr < heap_end(); }

 private:
  std::string file_id_;
  std::vector<std::uint8_t> bytes_;
  Address heap_start_;
  std::size_t padding_ = 0;
};

BlockIndex address_to_block_index(const HeapDump& heap, Address addr);
Address block_index_to_address(const HeapDump& heap, BlockIndex index);

struct KeyRecord {
  char letter = 'A';
  Address addr = 0;
  std::size_t declared_len = 0;
  std::size_t real_len = 0;
  std::string value_hex;

  // Length 0 or empty value: the dump does not hold this key.
  bool is_missing() const noexcept { return declared_len == 0 || value_hex.empty(); }
  std::vector<std::uint8_t> value_bytes() const;
};

struct Annotation {
  Address heap_start = 0;
  std::optional<Address> ssh_struct_addr;
  std::optional<Address> session_state_addr;
  std::vector<KeyRecord> keys;  // sorted by letter

  // Keys actually present in the dump (non-missing).
  std::vector<KeyRecord> present_keys() const;
};

// Reads the fields the graph builder needs. When heap_size is given, every
// address must fall in [heap_start, heap_start + heap_size).
Annotation parse_annotation(const nlohmann::json& json, std::optional<std::size_t> heap_size = {});

// Throws BrokenAnnotation for empty or unparsable files.
nlohmann::json read_annotation_json(const std::filesystem::path& json_path);

HeapDump load_heap_dump(const std::filesystem::path& raw_path, Address heap_start);

std::pair<HeapDump, Annotation> load_heap_pair(const std::filesystem::path& raw_path,
                                               const std::filesystem::path& json_path);

// "5070-1643978841-heap.raw" and "5070-1643978841.json" both give "5070-1643978841".
std::string file_id_from_path(const std::filesystem::path& path);
std::filesystem::path json_path_for_raw(const std::filesystem::path& raw_path);
std::filesystem::path raw_path_for_json(const std::filesystem::path& json_path);

// Accepts JSON strings holding decimal integers as well as JSON numbers.
std::optional<long long> json_integer(const nlohmann::json& value);

}  // namespace mem2graph
