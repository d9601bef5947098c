#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mem2graph/heap_io.hpp"

namespace mem2graph {

struct HeapBounds {
  std::optional<Address> start;  // unset when HEAP_START is absent or unparsable
  std::size_t size = 0;
};

struct KeyCounts {
  std::size_t incorrect = 0;
  std::size_t missing = 0;
  std::size_t incomplete = 0;

  KeyCounts& operator+=(const KeyCounts& o) {
    incorrect += o.incorrect;
    missing += o.missing;
    incomplete += o.incomplete;
    return *this;
  }
  bool operator==(const KeyCounts&) const = default;
};

inline constexpr std::array<std::string_view, 3> kMandatoryFields = {"HEAP_START", "SSH_STRUCT_ADDR",
                                                                     "SESSION_STATE_ADDR"};

struct ValidationReport {
  // Indexed like kMandatoryFields.
  std::array<bool, 3> mandatory_present{};
  std::array<bool, 3> mandatory_valid{};
  std::size_t key_letters = 0;
  KeyCounts keys;
  std::vector<std::string> messages;

  bool all_mandatory_valid() const noexcept {
    return mandatory_valid[0] && mandatory_valid[1] && mandatory_valid[2];
  }
};

enum class FileCategory { CorrectComplete, Broken, Incorrect, MissingKey, IncompleteKey };

std::string_view to_string(FileCategory c) noexcept;

// In range, 8-byte aligned, parseable big-endian hex.
bool is_hex_address_correct(const nlohmann::json& value, const HeapBounds& bounds);

KeyCounts validate_key_entry(char letter, const nlohmann::json& json, const HeapBounds& bounds,
                             std::vector<std::string>* messages = nullptr);

ValidationReport validate_annotation(const nlohmann::json& json, std::size_t heap_size);

FileCategory categorize(const ValidationReport& report) noexcept;

struct FileVerdict {
  std::filesystem::path json_path;
  FileCategory category = FileCategory::Broken;
  ValidationReport report;
};

// Reads the JSON and the sibling RAW (size only) and classifies the pair.
FileVerdict classify_file(const std::filesystem::path& json_path);

struct CorpusReport {
  std::array<std::size_t, 5> counts{};  // indexed by FileCategory
  std::array<std::vector<std::filesystem::path>, 5> files;
  std::size_t json_files = 0;
  std::size_t key_letters = 0;
  KeyCounts keys;
  std::vector<std::string> errors;

  std::size_t count(FileCategory c) const noexcept { return counts[static_cast<std::size_t>(c)]; }
  std::string summary() const;
};

std::vector<std::filesystem::path> find_files(const std::filesystem::path& root, std::string_view suffix);

// Classifies every *.json under root. With clean_dir set, copies the
// correct-and-complete pairs there, mirroring the input tree.
CorpusReport classify_corpus(const std::filesystem::path& root, unsigned workers = 1,
                             const std::optional<std::filesystem::path>& clean_dir = std::nullopt);

// Removes from clean_dir every pair whose chunk chain is broken. Returns the
// removed RAW paths.
std::vector<std::filesystem::path> drop_broken_chaining(const std::filesystem::path& clean_dir);

}  // namespace mem2graph
