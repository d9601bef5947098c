#include "mem2graph/heap_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>

#include "mem2graph/error.hpp"

namespace mem2graph {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::optional<Address> address_field(const nlohmann::json& json, const char* name) {
  auto it = json.find(name);
  if (it == json.end()) return std::nullopt;
  if (!it->is_string()) throw InvalidAnnotation(std::string(name) + " is not a string");
  try {
    return hex_str_to_int(it->get<std::string>());
  } catch (const FormatError& e) {
    throw InvalidAnnotation(std::string(name) + ": " + e.what());
  }
}

}  // namespace

Address hex_str_to_int(std::string_view hex) {
  if (hex.empty()) throw FormatError("empty hex string");
  if (hex.size() % 2 != 0) throw FormatError("odd number of hex digits: '" + std::string(hex) + "'");
  if (hex.size() > 16) throw FormatError("more than 16 hex digits: '" + std::string(hex) + "'");
  Address out = 0;
  for (char c : hex) {
    int d = hex_digit(c);
    if (d < 0) throw FormatError("non-hex character in '" + std::string(hex) + "'");
    out = (out << 4) | static_cast<Address>(d);
  }
  return out;
}

Address pointer_str_to_int(std::span<const std::uint8_t> block) {
  if (block.size() != kBlockSize)
    throw ContractViolation("pointer block must be 8 bytes, got " + std::to_string(block.size()));
  Address out = 0;
  for (std::size_t i = kBlockSize; i-- > 0;) out = (out << 8) | block[i];
  return out;
}

std::string to_hex(Address addr) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, addr, 16);
  return std::string(buf, end);
}

HeapDump::HeapDump(std::string file_id, std::vector<std::uint8_t> bytes, Address heap_start)
    : file_id_(std::move(file_id)), bytes_(std::move(bytes)), heap_start_(heap_start) {
  padding_ = (kBlockSize - bytes_.size() % kBlockSize) % kBlockSize;
  bytes_.resize(bytes_.size() + padding_, 0);
  if (bytes_.size() > std::numeric_limits<Address>::max() - heap_start_)
    throw RangeError("heap_start + heap size overflows 64 bits");
}

std::span<const std::uint8_t, kBlockSize> HeapDump::block(BlockIndex index) const {
  if (index >= block_count())
    throw RangeError("block index " + std::to_string(index) + " out of range");
  return std::span<const std::uint8_t, kBlockSize>(bytes_.data() + index * kBlockSize, kBlockSize);
}

std::uint64_t HeapDump::block_value(BlockIndex index) const { return pointer_str_to_int(block(index)); }

BlockIndex address_to_block_index(const HeapDump& heap, Address addr) {
  if (!heap.contains(addr)) throw RangeError("address 0x" + to_hex(addr) + " outside heap");
  if (!is_pointer_aligned(addr)) throw RangeError("address 0x" + to_hex(addr) + " not 8-byte aligned");
  return (addr - heap.heap_start()) / kBlockSize;
}

Address block_index_to_address(const HeapDump& heap, BlockIndex index) {
  if (index >= heap.block_count()) throw RangeError("block index " + std::to_string(index) + " out of range");
  return heap.heap_start() + index * kBlockSize;
}

std::vector<std::uint8_t> KeyRecord::value_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(value_hex.size() / 2);
  for (std::size_t i = 0; i + 1 < value_hex.size(); i += 2) {
    int hi = hex_digit(value_hex[i]);
    int lo = hex_digit(value_hex[i + 1]);
    if (hi < 0 || lo < 0) throw FormatError("key value is not hex");
    out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return out;
}

std::vector<KeyRecord> Annotation::present_keys() const {
  std::vector<KeyRecord> out;
  std::copy_if(keys.begin(), keys.end(), std::back_inserter(out),
               [](const KeyRecord& k) { return !k.is_missing(); });
  return out;
}

std::optional<long long> json_integer(const nlohmann::json& value) {
  if (value.is_number_integer()) return value.get<long long>();
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<long long>(d);
    return std::nullopt;
  }
  if (!value.is_string()) return std::nullopt;
  const auto& s = value.get_ref<const std::string&>();
  long long out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return out;
}

Annotation parse_annotation(const nlohmann::json& json, std::optional<std::size_t> heap_size) {
  if (!json.is_object()) throw BrokenAnnotation("annotation is not a JSON object");
  Annotation ann;
  auto start = address_field(json, "HEAP_START");
  if (!start) throw BrokenAnnotation("HEAP_START missing");
  ann.heap_start = *start;
  ann.ssh_struct_addr = address_field(json, "SSH_STRUCT_ADDR");
  ann.session_state_addr = address_field(json, "SESSION_STATE_ADDR");

  auto check_range = [&](Address a, const std::string& what) {
    if (!heap_size) return;
    if (a < ann.heap_start || a - ann.heap_start >= *heap_size)
      throw InvalidAnnotation(what + " 0x" + to_hex(a) + " outside heap");
  };
  if (ann.ssh_struct_addr) check_range(*ann.ssh_struct_addr, "SSH_STRUCT_ADDR");
  if (ann.session_state_addr) check_range(*ann.session_state_addr, "SESSION_STATE_ADDR");

  for (char letter = 'A'; letter <= 'F'; ++letter) {
    const std::string base = std::string("KEY_") + letter;
    auto addr_it = json.find(base + "_ADDR");
    auto len_it = json.find(base + "_LEN");
    if (addr_it == json.end() || len_it == json.end()) continue;

    KeyRecord key;
    key.letter = letter;
    auto len = json_integer(*len_it);
    if (!len || *len < 0) throw InvalidAnnotation(base + "_LEN is not a non-negative integer");
    key.declared_len = static_cast<std::size_t>(*len);
    if (auto rl = json.find(base + "_REAL_LEN"); rl != json.end()) {
      auto v = json_integer(*rl);
      if (v && *v >= 0) key.real_len = static_cast<std::size_t>(*v);
    } else {
      key.real_len = key.declared_len;
    }
    if (auto v = json.find(base); v != json.end() && v->is_string()) key.value_hex = v->get<std::string>();
    if (!key.is_missing()) {
      key.addr = *address_field(json, (base + "_ADDR").c_str());
      check_range(key.addr, base + "_ADDR");
      if (key.value_hex.size() != 2 * key.declared_len)
        throw InvalidAnnotation(base + " value length contradicts " + base + "_LEN");
      try {
        (void)key.value_bytes();
      } catch (const FormatError&) {
        throw InvalidAnnotation(base + " value is not hex");
      }
    } else if (addr_it->is_string()) {
      // A missing key's address is informational only.
      try {
        key.addr = hex_str_to_int(addr_it->get<std::string>());
      } catch (const FormatError&) {
      }
    }
    ann.keys.push_back(std::move(key));
  }
  return ann;
}

nlohmann::json read_annotation_json(const std::filesystem::path& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + json_path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw BrokenAnnotation("empty annotation file " + json_path.string());
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw BrokenAnnotation("unparsable annotation " + json_path.string() + ": " + e.what());
  }
}

HeapDump load_heap_dump(const std::filesystem::path& raw_path, Address heap_start) {
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + raw_path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return HeapDump(file_id_from_path(raw_path), std::move(bytes), heap_start);
}

std::pair<HeapDump, Annotation> load_heap_pair(const std::filesystem::path& raw_path,
                                               const std::filesystem::path& json_path) {
  auto json = read_annotation_json(json_path);
  if (!std::filesystem::exists(raw_path)) throw IoError("missing heap dump " + raw_path.string());
  // First pass only for HEAP_START, range checks need the dump size.
  Annotation pre = parse_annotation(json);
  HeapDump heap = load_heap_dump(raw_path, pre.heap_start);
  Annotation ann = parse_annotation(json, heap.size());
  return {std::move(heap), std::move(ann)};
}

std::string file_id_from_path(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  for (std::string_view suffix : {"-heap.raw", ".json", ".raw", ".gv", ".dot"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) return name.substr(0, name.size() - suffix.size());
  }
  return name;
}

std::filesystem::path json_path_for_raw(const std::filesystem::path& raw_path) {
  return raw_path.parent_path() / (file_id_from_path(raw_path) + ".json");
}

std::filesystem::path raw_path_for_json(const std::filesystem::path& json_path) {
  return json_path.parent_path() / (file_id_from_path(json_path) + "-heap.raw");
}

}  // namespace mem2graph
