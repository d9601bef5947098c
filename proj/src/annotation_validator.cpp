#include "mem2graph/annotation_validator.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "mem2graph/chunk_parser.hpp"
#include "mem2graph/error.hpp"
#include "mem2graph/parallel.hpp"

namespace fs = std::filesystem;

namespace mem2graph {

namespace {

std::optional<Address> parse_hex_value(const nlohmann::json& value) {
  if (!value.is_string()) return std::nullopt;
  try {
    return hex_str_to_int(value.get<std::string>());
  } catch (const FormatError&) {
    return std::nullopt;
  }
}

void note(std::vector<std::string>* messages, std::string msg) {
  if (messages) messages->push_back(std::move(msg));
}

}  // namespace

std::string_view to_string(FileCategory c) noexcept {
  switch (c) {
    case FileCategory::CorrectComplete: return "correct-complete";
    case FileCategory::Broken: return "broken";
    case FileCategory::Incorrect: return "incorrect";
    case FileCategory::MissingKey: return "missing-key";
    case FileCategory::IncompleteKey: return "incomplete-key";
  }
  return "?";
}

bool is_hex_address_correct(const nlohmann::json& value, const HeapBounds& bounds) {
  auto addr = parse_hex_value(value);
  if (!addr || !bounds.start || !is_pointer_aligned(*addr)) return false;
  return *addr >= *bounds.start && *addr - *bounds.start < bounds.size;
}

KeyCounts validate_key_entry(char letter, const nlohmann::json& json, const HeapBounds& bounds,
                             std::vector<std::string>* messages) {
  const std::string base = std::string("KEY_") + letter;
  KeyCounts c;
  auto value = json.find(base);
  const bool has_value = value != json.end();
  const std::string text = has_value && value->is_string() ? value->get<std::string>() : std::string();

  if (has_value && text.empty()) {
    ++c.missing;
    return c;
  }
  auto len = json.find(base + "_LEN");
  auto addr = json.find(base + "_ADDR");
  auto real_len = json.find(base + "_REAL_LEN");
  if (!has_value || len == json.end() || addr == json.end() || real_len == json.end()) {
    ++c.incomplete;
    note(messages, base + ": incomplete annotation (value, _LEN, _ADDR or _REAL_LEN absent)");
    return c;
  }
  if (!is_hex_address_correct(*addr, bounds)) {
    ++c.incorrect;
    note(messages, base + "_ADDR is not a valid heap address");
    return c;
  }
  auto n = json_integer(*len);
  if (!n || *n < 0) {
    ++c.incorrect;
    note(messages, base + "_LEN is not a non-negative number");
    return c;
  }
  if (*n == 0) {
    ++c.missing;
  } else if (text.size() != static_cast<std::size_t>(*n) * 2) {
    ++c.incorrect;
    note(messages, base + " value length " + std::to_string(text.size()) + " contradicts " + base + "_LEN " +
                       std::to_string(*n));
  }
  return c;
}

ValidationReport validate_annotation(const nlohmann::json& json, std::size_t heap_size) {
  ValidationReport r;
  if (!json.is_object()) {
    r.messages.push_back("annotation is not a JSON object");
    return r;
  }
  HeapBounds bounds;
  bounds.size = heap_size;
  if (auto it = json.find("HEAP_START"); it != json.end()) bounds.start = parse_hex_value(*it);

  for (std::size_t i = 0; i < kMandatoryFields.size(); ++i) {
    auto it = json.find(std::string(kMandatoryFields[i]));
    r.mandatory_present[i] = it != json.end();
    if (!r.mandatory_present[i]) {
      r.messages.push_back(std::string(kMandatoryFields[i]) + " absent");
      continue;
    }
    if (i == 0) {
      r.mandatory_valid[i] = bounds.start && is_pointer_aligned(*bounds.start);
    } else {
      r.mandatory_valid[i] = is_hex_address_correct(*it, bounds);
    }
    if (!r.mandatory_valid[i]) r.messages.push_back(std::string(kMandatoryFields[i]) + " invalid");
  }

  std::set<char> letters;
  for (const auto& [name, _] : json.items()) {
    if (name.size() > 4 && name.starts_with("KEY_")) letters.insert(name[4]);
  }
  r.key_letters = letters.size();
  for (char letter : letters) r.keys += validate_key_entry(letter, json, bounds, &r.messages);
  return r;
}

FileCategory categorize(const ValidationReport& r) noexcept {
  bool mandatory_invalid = false;
  bool mandatory_absent = false;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!r.mandatory_present[i])
      mandatory_absent = true;
    else if (!r.mandatory_valid[i])
      mandatory_invalid = true;
  }
  if (r.keys.incorrect > 0 || mandatory_invalid) return FileCategory::Incorrect;
  if (r.keys.incomplete > 0 || mandatory_absent) return FileCategory::IncompleteKey;
  if (r.keys.missing > 0) return FileCategory::MissingKey;
  return FileCategory::CorrectComplete;
}

FileVerdict classify_file(const fs::path& json_path) {
  FileVerdict v;
  v.json_path = json_path;
  nlohmann::json json;
  try {
    json = read_annotation_json(json_path);
  } catch (const BrokenAnnotation& e) {
    v.category = FileCategory::Broken;
    v.report.messages.push_back(e.what());
    return v;
  }
  if (!json.is_object()) {
    v.category = FileCategory::Broken;
    v.report.messages.push_back("annotation is not a JSON object");
    return v;
  }
  std::error_code ec;
  auto raw = raw_path_for_json(json_path);
  std::size_t size = fs::exists(raw, ec) ? static_cast<std::size_t>(fs::file_size(raw, ec)) : 0;
  if (ec) size = 0;
  // Range checks use the padded size, like the loader.
  size = (size + kBlockSize - 1) / kBlockSize * kBlockSize;
  v.report = validate_annotation(json, size);
  v.category = categorize(v.report);
  return v;
}

std::string CorpusReport::summary() const {
  std::ostringstream os;
  os << "Number of JSON files: " << json_files << "\n"
     << "Number of Correct and Complete Files: " << count(FileCategory::CorrectComplete) << "\n"
     << "Number of Broken Files: " << count(FileCategory::Broken) << "\n"
     << "Number of Incorrect Files: " << count(FileCategory::Incorrect) << "\n"
     << "Number of Missing key Files: " << count(FileCategory::MissingKey) << "\n"
     << "Number of Incomplete key Files: " << count(FileCategory::IncompleteKey) << "\n"
     << "Number of SSH keys: " << key_letters << "\n"
     << "Number of missing (empty) SSH keys: " << keys.missing << "\n"
     << "Number of incompletely annotated SSH keys: " << keys.incomplete << "\n"
     << "Number of incorrectly annotated SSH keys: " << keys.incorrect << "\n";
  return os.str();
}

std::vector<fs::path> find_files(const fs::path& root, std::string_view suffix) {
  std::vector<fs::path> out;
  if (fs::is_regular_file(root)) {
    if (root.filename().string().ends_with(suffix)) out.push_back(root);
    return out;
  }
  for (const auto& entry : fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied)) {
    if (entry.is_regular_file() && entry.path().filename().string().ends_with(suffix)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

CorpusReport classify_corpus(const fs::path& root, unsigned workers, const std::optional<fs::path>& clean_dir) {
  auto jsons = find_files(root, ".json");
  std::vector<FileVerdict> verdicts(jsons.size());
  std::vector<std::string> errors(jsons.size());
  parallel_for(jsons.size(), workers, [&](std::size_t i) {
    try {
      verdicts[i] = classify_file(jsons[i]);
    } catch (const std::exception& e) {
      // Unreadable file: recorded, counted as broken so the sum still matches.
      verdicts[i].json_path = jsons[i];
      verdicts[i].category = FileCategory::Broken;
      errors[i] = jsons[i].string() + ": " + e.what();
    }
  });

  CorpusReport report;
  report.json_files = jsons.size();
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    auto idx = static_cast<std::size_t>(v.category);
    ++report.counts[idx];
    report.files[idx].push_back(v.json_path);
    report.key_letters += v.report.key_letters;
    report.keys += v.report.keys;
    if (!errors[i].empty()) report.errors.push_back(errors[i]);
  }

  if (clean_dir) {
    const fs::path base = fs::is_regular_file(root) ? root.parent_path() : root;
    for (const auto& json : report.files[static_cast<std::size_t>(FileCategory::CorrectComplete)]) {
      auto raw = raw_path_for_json(json);
      auto rel = fs::relative(json, base);
      auto dest = *clean_dir / rel;
      fs::create_directories(dest.parent_path());
      fs::copy_file(json, dest, fs::copy_options::overwrite_existing);
      if (fs::exists(raw)) fs::copy_file(raw, dest.parent_path() / raw.filename(), fs::copy_options::overwrite_existing);
    }
  }
  return report;
}

std::vector<fs::path> drop_broken_chaining(const fs::path& clean_dir) {
  std::vector<fs::path> removed;
  for (const auto& raw : find_files(clean_dir, "-heap.raw")) {
    std::ifstream in(raw, std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    HeapDump heap(file_id_from_path(raw), std::move(bytes), 0);
    try {
      (void)parse_chunks(heap);
    } catch (const BrokenChaining& e) {
      spdlog::info("dropping {}: {}", raw.string(), e.what());
      std::error_code ec;
      fs::remove(raw, ec);
      fs::remove(json_path_for_raw(raw), ec);
      removed.push_back(raw);
    }
  }
  return removed;
}

}  // namespace mem2graph
