#include "mem2graph/synth.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <set>

#include "mem2graph/error.hpp"

namespace mem2graph {

namespace {

constexpr std::size_t kLeadingBlocks = 1;
constexpr std::array<std::size_t, 3> kKeySizes = {32, 48, 64};

struct Layout {
  std::vector<BlockIndex> headers;
  std::size_t full_blocks = 0;  // through the end of the top chunk
  std::size_t blocks = 0;       // actually present (before padding)
  std::size_t padded_blocks = 0;
  std::vector<bool> reserved;   // blocks the generator writes with fixed content
  std::vector<bool> user;       // member block of some chunk
};

std::size_t key_blocks(const PlantedKey& k) { return (k.bytes.size() + kBlockSize - 1) / kBlockSize; }

Layout compute_layout(const SynthHeapSpec& spec) {
  if (spec.chunks.empty()) throw ContractViolation("synthetic heap needs at least the top chunk");
  if (spec.chunks.back().in_use) throw ContractViolation("top chunk must be free");
  if (spec.trailing_bytes >= kBlockSize) throw ContractViolation("trailing_bytes must be < 8");
  if (spec.heap_start == 0 || !is_pointer_aligned(spec.heap_start))
    throw ContractViolation("heap_start must be nonzero and aligned");
  Layout l;
  BlockIndex h = kLeadingBlocks;
  for (const auto& c : spec.chunks) {
    if (c.size < kMinChunkSize || c.size % kBlockSize != 0)
      throw ContractViolation("chunk size " + std::to_string(c.size) + " is not a multiple of 8 >= 16");
    l.headers.push_back(h);
    h += c.size / kBlockSize;
  }
  l.full_blocks = h;
  const std::size_t top_span = spec.chunks.back().size / kBlockSize;
  if (spec.cropped_blocks >= top_span) throw ContractViolation("cropping would remove the top chunk header");
  l.blocks = l.full_blocks - spec.cropped_blocks;
  l.padded_blocks = l.blocks + (spec.trailing_bytes ? 1 : 0);
  if (spec.heap_start + l.padded_blocks * kBlockSize >= 0x7f0000000000)
    throw ContractViolation("heap must end below the 0x7f... region used for fd/bk values");

  l.reserved.assign(l.blocks, false);
  l.user.assign(l.blocks, false);
  l.reserved[0] = true;
  for (std::size_t j = 0; j < spec.chunks.size(); ++j) {
    const BlockIndex hj = l.headers[j];
    const std::size_t span = spec.chunks[j].size / kBlockSize;
    const bool top = j + 1 == spec.chunks.size();
    l.reserved[hj] = true;
    for (BlockIndex b = hj + 1; b < hj + span && b < l.blocks; ++b) {
      l.user[b] = true;
      if (top) l.reserved[b] = true;  // top chunk stays zero
    }
    if (!spec.chunks[j].in_use && !top) {
      const BlockIndex footer = hj + span - 1;
      l.reserved[footer] = true;
      for (BlockIndex b = hj + 1; b < std::min(hj + 3, footer); ++b) l.reserved[b] = true;  // fd, bk
    }
  }
  for (const auto& k : spec.keys) {
    if (k.chunk + 1 >= spec.chunks.size()) throw ContractViolation("key planted outside an in-use chunk");
    const auto& c = spec.chunks[k.chunk];
    if (!c.in_use) throw ContractViolation("key planted in a free chunk");
    if (k.bytes.empty() || k.bytes.size() > c.size - kBlockSize)
      throw ContractViolation("key does not fit its chunk");
    for (std::size_t b = 0; b < key_blocks(k); ++b) {
      BlockIndex at = l.headers[k.chunk] + 1 + b;
      if (l.reserved[at]) throw ContractViolation("two keys overlap");
      l.reserved[at] = true;
    }
  }
  return l;
}

std::uint64_t noise_value(std::mt19937_64& rng) {
  // Top bit set: never inside a user-space heap.
  return rng() | (std::uint64_t{1} << 63);
}

std::uint64_t free_list_value(std::mt19937_64& rng) {
  return (0x7f0000000000ull | (rng() & 0xffffffffffull)) & ~std::uint64_t{7};
}

void put(std::vector<std::uint8_t>& bytes, BlockIndex b, std::uint64_t v) {
  for (std::size_t i = 0; i < kBlockSize; ++i) bytes[b * kBlockSize + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::string hex_bytes(const std::vector<std::uint8_t>& v) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : v) {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

bool block_is_pointer(const std::vector<std::uint8_t>& key, std::size_t block, Address start, Address end) {
  if ((block + 1) * kBlockSize > key.size()) {
    // Partial block: the tail is zeroed after filling, so only key bytes count.
    std::uint64_t v = 0;
    for (std::size_t i = key.size(); i-- > block * kBlockSize;) v = (v << 8) | key[i];
    return v != 0 && is_pointer_aligned(v) && v >= start && v < end;
  }
  std::uint64_t v = 0;
  for (std::size_t i = kBlockSize; i-- > 0;) v = (v << 8) | key[block * kBlockSize + i];
  return v != 0 && is_pointer_aligned(v) && v >= start && v < end;
}

}  // namespace

HeapDump SynthHeap::dump(const std::string& file_id) const {
  return HeapDump(file_id, bytes, hex_str_to_int(annotation.at("HEAP_START").get<std::string>()));
}

std::string annotation_hex(Address addr) {
  std::string h = to_hex(addr);
  if (h.size() % 2) h.insert(h.begin(), '0');
  return h;
}

SynthHeap synth_heap(const SynthHeapSpec& spec) {
  const Layout l = compute_layout(spec);
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
  SynthHeap out;
  out.bytes.assign(l.blocks * kBlockSize, 0);
  const Address start = spec.heap_start;
  const Address end = start + l.padded_blocks * kBlockSize;

  for (std::size_t j = 0; j < spec.chunks.size(); ++j) {
    const auto& c = spec.chunks[j];
    const BlockIndex hj = l.headers[j];
    MallocHeader h{c.size, c.a, c.m, j == 0 ? true : spec.chunks[j - 1].in_use};
    put(out.bytes, hj, encode_malloc_header(h));
    const std::size_t span = c.size / kBlockSize;
    ExpectedChunk e;
    e.block_index = hj + 1;
    e.header = h;
    e.in_use = c.in_use;
    e.zero_cropped = hj + span > l.padded_blocks;
    out.chunks.push_back(e);
    if (!c.in_use && j + 1 < spec.chunks.size()) {
      const BlockIndex footer = hj + span - 1;
      for (BlockIndex b = hj + 1; b < std::min(hj + 3, footer); ++b) put(out.bytes, b, free_list_value(rng));
      put(out.bytes, footer, c.size);
    }
  }

  for (const auto& k : spec.keys) {
    for (std::size_t b = 0; b < key_blocks(k); ++b)
      if (block_is_pointer(k.bytes, b, start, end)) throw ContractViolation("key bytes decode as a heap pointer");
    const BlockIndex at = l.headers[k.chunk] + 1;
    std::copy(k.bytes.begin(), k.bytes.end(), out.bytes.begin() + at * kBlockSize);
    out.keys.emplace_back(k.letter, start + at * kBlockSize);
  }

  std::vector<bool> planted(l.blocks, false);
  for (const auto& p : spec.pointers) {
    if (p.from >= l.blocks || l.reserved[p.from] || planted[p.from])
      throw ContractViolation("pointer planted on reserved block " + std::to_string(p.from));
    if (p.to >= l.padded_blocks) throw ContractViolation("pointer target outside the heap");
    planted[p.from] = true;
    put(out.bytes, p.from, start + p.to * kBlockSize);
    out.pointers.push_back({p.from, start + p.to * kBlockSize, p.to});
  }
  for (const auto& a : spec.anti_pointers) {
    if (a.at >= l.blocks || l.reserved[a.at] || planted[a.at])
      throw ContractViolation("anti-pointer planted on reserved block " + std::to_string(a.at));
    planted[a.at] = true;
    std::uint64_t v = 0;
    switch (a.kind) {
      case AntiKind::Misaligned:
        v = start + (rng() % l.padded_blocks) * kBlockSize + 1 + rng() % 7;
        break;
      case AntiKind::HeapEnd: v = end; break;
      case AntiKind::BelowStart: v = start - kBlockSize; break;
    }
    put(out.bytes, a.at, v);
    out.anti_pointers.push_back(a.at);
  }
  std::sort(out.pointers.begin(), out.pointers.end(),
            [](const PointerHit& x, const PointerHit& y) { return x.block_index < y.block_index; });
  std::sort(out.anti_pointers.begin(), out.anti_pointers.end());

  std::bernoulli_distribution zero(spec.zero_block_ratio);
  for (BlockIndex b = 0; b < l.blocks; ++b) {
    if (!l.user[b] || l.reserved[b] || planted[b]) continue;
    if (!zero(rng)) put(out.bytes, b, noise_value(rng));
  }
  // Key tails that stop mid-block leave filler after them; keep that filler
  // from forming an in-range value by clearing it.
  for (const auto& k : spec.keys) {
    const BlockIndex at = l.headers[k.chunk] + 1;
    const std::size_t tail_from = at * kBlockSize + k.bytes.size();
    const std::size_t tail_to = (at + key_blocks(k)) * kBlockSize;
    std::fill(out.bytes.begin() + tail_from, out.bytes.begin() + tail_to, 0);
  }
  out.bytes.resize(out.bytes.size() + spec.trailing_bytes, 0);

  nlohmann::json j = nlohmann::json::object();
  j["HEAP_START"] = annotation_hex(start);
  auto chunk_addr = [&](std::size_t idx) { return start + (l.headers.at(idx) + 1) * kBlockSize; };
  if (spec.ssh_struct_chunk) j["SSH_STRUCT_ADDR"] = annotation_hex(chunk_addr(*spec.ssh_struct_chunk));
  if (spec.session_state_chunk) j["SESSION_STATE_ADDR"] = annotation_hex(chunk_addr(*spec.session_state_chunk));
  for (char letter = 'A'; letter <= 'F'; ++letter) {
    const std::string base = std::string("KEY_") + letter;
    auto it = std::find_if(spec.keys.begin(), spec.keys.end(), [&](const PlantedKey& k) { return k.letter == letter; });
    if (it == spec.keys.end()) {
      j[base] = "";
      j[base + "_LEN"] = "0";
      j[base + "_REAL_LEN"] = "0";
      j[base + "_ADDR"] = annotation_hex(start);
      continue;
    }
    j[base] = hex_bytes(it->bytes);
    j[base + "_ADDR"] = annotation_hex(chunk_addr(it->chunk));
    j[base + "_LEN"] = std::to_string(it->bytes.size());
    j[base + "_REAL_LEN"] = std::to_string(it->bytes.size());
  }
  out.annotation = std::move(j);
  return out;
}

SynthHeapSpec random_spec(std::uint64_t seed, const RandomSpecOptions& opt) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  SynthHeapSpec spec;
  spec.seed = seed;
  spec.heap_start = (0x550000000000ull + (rng() & 0xffffffffull) * 0x1000) & ~std::uint64_t{0xfff};

  const std::size_t reserved_roles = opt.keys + 2;
  std::size_t n = uniform(std::max(opt.min_chunks, reserved_roles + 1), std::max(opt.max_chunks, reserved_roles + 1));
  spec.chunks.resize(n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    auto& c = spec.chunks[j];
    const double r = std::uniform_real_distribution<double>(0, 1)(rng);
    if (r < 0.45)
      c.size = kKeySizes[uniform(0, 2)];
    else if (r < 0.5)
      c.size = std::array<std::size_t, 3>{16, 24, 40}[uniform(0, 2)];
    else
      c.size = 16 * uniform(5, 64);
    c.in_use = !coin(opt.free_ratio);
    if (opt.random_flags) {
      c.a = coin(0.05);
      c.m = coin(0.05);
    }
  }
  spec.chunks.back().size = 16 * uniform(64, 512);
  spec.chunks.back().in_use = false;
  if (opt.allow_crop && coin(0.3)) spec.cropped_blocks = uniform(1, spec.chunks.back().size / kBlockSize - 1);
  if (coin(0.2)) spec.trailing_bytes = uniform(1, 7);

  // Distinct chunks for keys and the two struct annotations.
  std::vector<std::size_t> order(n - 1);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t next = 0;
  for (std::size_t k = 0; k < opt.keys && next < order.size(); ++k, ++next) {
    auto& c = spec.chunks[order[next]];
    c.size = kKeySizes[uniform(0, 2)];
    c.in_use = true;
    std::vector<std::size_t> lens;
    for (std::size_t len : {12, 16, 24, 32})
      if (len <= c.size - kBlockSize) lens.push_back(len);
    PlantedKey key;
    key.letter = static_cast<char>('A' + k);
    key.chunk = order[next];
    key.bytes.resize(lens[uniform(0, lens.size() - 1)]);
    for (auto& b : key.bytes) b = static_cast<std::uint8_t>(rng());
    // A random 8-byte value is essentially never an aligned in-heap address,
    // but make it certain.
    for (std::size_t blk = 0; blk * kBlockSize < key.bytes.size(); ++blk)
      if (blk * kBlockSize + 7 < key.bytes.size()) key.bytes[blk * kBlockSize + 7] |= 0x80;
    spec.keys.push_back(std::move(key));
  }
  if (next < order.size()) {
    spec.chunks[order[next]].in_use = true;
    spec.ssh_struct_chunk = order[next++];
  }
  if (next < order.size()) {
    spec.chunks[order[next]].in_use = true;
    spec.session_state_chunk = order[next++];
  }
  const Layout l = compute_layout(spec);
  for (BlockIndex b = 0; b < l.blocks; ++b) {
    if (!l.user[b] || l.reserved[b]) continue;
    if (coin(opt.pointer_ratio)) {
      spec.pointers.push_back({b, uniform(0, l.padded_blocks - 1)});
    } else if (coin(opt.anti_ratio)) {
      spec.anti_pointers.push_back({b, static_cast<AntiKind>(uniform(0, 2))});
    }
  }
  return spec;
}

void break_chain(SynthHeap& heap, std::size_t chunk) {
  const BlockIndex h = heap.chunks.at(chunk).block_index - 1;
  for (std::size_t i = 0; i < kBlockSize; ++i) heap.bytes[h * kBlockSize + i] = i == 0 ? 1 : 0;
}

std::string annotation_with_defect(const SynthHeap& heap, FileCategory category, std::uint64_t seed) {
  nlohmann::json j = heap.annotation;
  std::mt19937_64 rng(seed);
  const char letter = static_cast<char>('A' + rng() % 3);
  const std::string base = std::string("KEY_") + letter;
  switch (category) {
    case FileCategory::CorrectComplete: break;
    case FileCategory::Broken: return "";
    case FileCategory::Incorrect: {
      const Address start = hex_str_to_int(j.at("HEAP_START").get<std::string>());
      j[base + "_ADDR"] = annotation_hex(start - 0x1000);
      break;
    }
    case FileCategory::MissingKey:
      j[base] = "";
      j[base + "_LEN"] = "0";
      j[base + "_REAL_LEN"] = "0";
      break;
    case FileCategory::IncompleteKey:
      j.erase(base + (rng() % 2 ? "_ADDR" : "_LEN"));
      break;
  }
  return j.dump(4);
}

void write_pair(const std::filesystem::path& dir, const std::string& file_id, const SynthHeap& heap,
                const std::string& annotation_text) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream raw(dir / (file_id + "-heap.raw"), std::ios::binary);
    raw.write(reinterpret_cast<const char*>(heap.bytes.data()), static_cast<std::streamsize>(heap.bytes.size()));
    if (!raw) throw IoError("cannot write " + (dir / (file_id + "-heap.raw")).string());
  }
  std::ofstream json(dir / (file_id + ".json"), std::ios::binary);
  json << annotation_text;
  if (!json) throw IoError("cannot write " + (dir / (file_id + ".json")).string());
}

}  // namespace mem2graph
