#include "mem2graph/chunk_parser.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "mem2graph/error.hpp"

namespace mem2graph {

MallocHeader parse_malloc_header(std::uint64_t value) noexcept {
  MallocHeader h;
  h.size = static_cast<std::size_t>(value & ~std::uint64_t{7});
  h.a = value & kFlagNonMainArena;
  h.m = value & kFlagIsMmapped;
  h.p = value & kFlagPrevInUse;
  return h;
}

MallocHeader parse_malloc_header(std::span<const std::uint8_t> block) {
  return parse_malloc_header(pointer_str_to_int(block));
}

std::uint64_t encode_malloc_header(const MallocHeader& h) noexcept {
  return static_cast<std::uint64_t>(h.size) | (h.a ? kFlagNonMainArena : 0) | (h.m ? kFlagIsMmapped : 0) |
         (h.p ? kFlagPrevInUse : 0);
}

std::size_t Chunk::member_count(const HeapDump& heap) const noexcept {
  if (block_index >= heap.block_count() || block_span() < 2) return 0;
  BlockIndex last = std::min(footer_index(), heap.block_count() - 1);
  return last - block_index + 1;
}

std::span<const std::uint8_t> Chunk::user_data(const HeapDump& heap) const noexcept {
  return heap.bytes().subspan(block_index * kBlockSize, member_count(heap) * kBlockSize);
}

std::string Chunk::describe() const {
  auto b = [](bool v) { return v ? "True" : "False"; };
  std::ostringstream os;
  os << "Chunk(block_index=" << block_index << ", size=" << header.size << ", flags=[A=" << b(header.a)
     << ", M=" << b(header.m) << ", P=" << b(header.p) << "])";
  return os.str();
}

std::vector<Chunk> parse_chunks(const HeapDump& heap) {
  std::vector<Chunk> chunks;
  const std::size_t n = heap.block_count();
  BlockIndex i = 0;
  while (i < n) {
    const std::uint64_t raw = heap.block_value(i);
    if (raw == 0) {
      ++i;
      continue;
    }
    const MallocHeader h = parse_malloc_header(raw);
    if (h.size < kMinChunkSize)
      throw BrokenChaining("header at block " + std::to_string(i) + " has size " + std::to_string(h.size));

    Chunk c;
    c.header = h;
    c.block_index = i + 1;
    c.address = heap.heap_start() + c.block_index * kBlockSize;

    const BlockIndex footer = c.footer_index();
    if (footer < n) c.correct_footer = (heap.block_value(footer) & ~std::uint64_t{7}) == h.size;

    const BlockIndex next = c.next_header_index();
    if (next < n) {
      c.is_in_use = parse_malloc_header(heap.block_value(next)).p;
    } else {
      c.is_in_use = false;
      c.is_zero_cropped = next > n;
    }
    chunks.push_back(std::move(c));
    i = next;
  }
  return chunks;
}

void annotate_chunk(Chunk& chunk, std::span<const std::pair<char, Address>> key_addresses,
                    std::optional<Address> ssh_struct_addr, std::optional<Address> session_state_addr) {
  auto guard = [&](const std::string& what) {
    if (!chunk.is_in_use)
      throw IntegrityError(what + " annotation on free chunk at 0x" + to_hex(chunk.address));
  };
  for (auto [letter, addr] : key_addresses) {
    if (addr != chunk.address) continue;
    guard(std::string("KEY_") + letter);
    if (std::find(chunk.key_letters.begin(), chunk.key_letters.end(), letter) == chunk.key_letters.end())
      chunk.key_letters.push_back(letter);
  }
  std::sort(chunk.key_letters.begin(), chunk.key_letters.end());
  if (ssh_struct_addr && *ssh_struct_addr == chunk.address) {
    guard("SSH_STRUCT");
    chunk.contains_ssh_struct = true;
  }
  if (session_state_addr && *session_state_addr == chunk.address) {
    guard("SESSION_STATE");
    chunk.contains_session_state = true;
  }
}

AnnotationMatch annotate_chunks(std::vector<Chunk>& chunks, const HeapDump& heap, const Annotation& ann) {
  std::vector<std::pair<char, Address>> keys;
  for (const auto& k : ann.present_keys()) keys.emplace_back(k.letter, k.addr);

  std::unordered_map<Address, std::size_t> by_address;
  std::unordered_map<Address, std::size_t> footers;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    by_address.emplace(chunks[i].address, i);
    if (chunks[i].footer_index() < heap.block_count())
      footers.emplace(block_index_to_address(heap, chunks[i].footer_index()), i);
  }

  AnnotationMatch match;
  auto visit = [&](Address addr) {
    auto it = by_address.find(addr);
    if (it != by_address.end()) {
      std::vector<std::pair<char, Address>> own;
      for (const auto& k : keys)
        if (k.second == addr) own.push_back(k);
      annotate_chunk(chunks[it->second], own,
                     ann.ssh_struct_addr == addr ? ann.ssh_struct_addr : std::nullopt,
                     ann.session_state_addr == addr ? ann.session_state_addr : std::nullopt);
      return;
    }
    match.unmatched.push_back(addr);
    if (footers.count(addr)) ++match.footer_hits;
  };

  std::vector<Address> targets;
  for (const auto& k : keys) targets.push_back(k.second);
  if (ann.ssh_struct_addr) targets.push_back(*ann.ssh_struct_addr);
  if (ann.session_state_addr) targets.push_back(*ann.session_state_addr);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (Address a : targets) visit(a);
  return match;
}

bool is_zero_only(const Chunk& chunk, const HeapDump& heap) noexcept {
  auto data = chunk.user_data(heap);
  return std::all_of(data.begin(), data.end(), [](std::uint8_t b) { return b == 0; });
}

void ParseStats::add_heap(const HeapDump& heap, const std::vector<Chunk>& cs, std::size_t footer_hits) {
  ++files;
  blocks += heap.block_count();
  footer_annotations += footer_hits;
  for (const auto& c : cs) {
    ++chunks;
    p_set += c.header.p;
    m_set += c.header.m;
    a_set += c.header.a;
    if (is_zero_only(c, heap)) ++zero_only;
    if (c.correct_footer) ++correct_footer;
    if (!c.is_in_use) {
      ++free_chunks;
      // Header plus members, whatever part of it the dump still holds.
      std::size_t in_heap = std::min(c.next_header_index(), heap.block_count()) - c.header_index();
      blocks_in_free += in_heap;
      if (c.correct_footer) ++free_correct_footer;
      if (c.is_annotated()) ++free_annotated;
    }
    if (c.is_annotated()) {
      ++annotated;
      if (c.is_in_use && c.correct_footer) {
        ++in_use_footer_annotated;
        if (c.is_key_chunk()) ++in_use_footer_key;
      }
    }
    if (c.is_key_chunk()) ++key_sizes[c.header.size];
  }
}

void ParseStats::merge(const ParseStats& o) {
  files += o.files;
  skipped_files += o.skipped_files;
  chunks += o.chunks;
  blocks += o.blocks;
  p_set += o.p_set;
  m_set += o.m_set;
  a_set += o.a_set;
  free_chunks += o.free_chunks;
  zero_only += o.zero_only;
  blocks_in_free += o.blocks_in_free;
  correct_footer += o.correct_footer;
  free_correct_footer += o.free_correct_footer;
  free_annotated += o.free_annotated;
  footer_annotations += o.footer_annotations;
  annotated += o.annotated;
  in_use_footer_annotated += o.in_use_footer_annotated;
  in_use_footer_key += o.in_use_footer_key;
  for (auto [size, count] : o.key_sizes) key_sizes[size] += count;
}

std::string ParseStats::report(bool corpus_layout) const {
  auto pct = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : 100.0 * double(a) / double(b); };
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : double(a) / double(b); };
  std::ostringstream os;
  os.precision(16);
  if (!corpus_layout) {
    os << "-----------> Statistics:\n"
       << "Total number of files: " << files << "\n"
       << "Total number of chunks: " << chunks << "\n"
       << "Total number of blocks: " << blocks << "\n"
       << "Total number of chunks with P=1: " << p_set << "\n"
       << "Total number of chunks with M=1: " << m_set << "\n"
       << "Total number of chunks with A=1: " << a_set << "\n"
       << "Total number of chunks only composed of zeros: " << zero_only << "\n";
    return os.str();
  }
  const std::size_t in_use = chunks - free_chunks;
  os << "------> Statistics:\n"
     << "Total number of parsed files: " << files << "\n"
     << "Total number of skipped files: " << skipped_files << "\n"
     << "Total number of chunks: " << chunks << "\n"
     << "Total number of blocks: " << blocks << "\n"
     << "Total number of chunks with P=1: " << p_set << "\n"
     << "Total number of chunks with M=1: " << m_set << "\n"
     << "Total number of chunks with A=1: " << a_set << "\n"
     << "Total number of free chunks: " << free_chunks << "\n"
     << "Total number of chunks only composed of zeros: " << zero_only << "\n"
     << "Total number of blocks in free chunks: " << blocks_in_free << "\n"
     << "Total number of chunks with correct footer value: " << correct_footer << "\n"
     << "Total number of chunks both free and with correct footer value: " << free_correct_footer << "\n"
     << "Total number of chunks free and annotated: " << free_annotated << "\n"
     << "Total number of potential footers with annotations (should be 0): " << footer_annotations << "\n"
     << "Total number of annotated chunks: " << annotated << "\n"
     << "Total number of chunks in use, with correct footer, and annotated: " << in_use_footer_annotated << "\n"
     << "Total number of chunks in use, with correct footer, and key annotated: " << in_use_footer_key << "\n"
     << "Percentage of free chunks: " << pct(free_chunks, chunks) << "%\n"
     << "Percentage of blocks in free chunks: " << pct(blocks_in_free, blocks) << "%\n"
     << "Percentage of free chunks with correct footer value: " << pct(free_correct_footer, free_chunks) << "%\n"
     << "Percentage of in-use chunks with correct footer value: "
     << pct(correct_footer - free_correct_footer, in_use) << "%\n"
     << "Average number of annoted chunks per file: " << ratio(annotated, files) << "\n"
     << "Average number of chunks in use with correct footer and annotated per file: "
     << ratio(in_use_footer_annotated, files) << "\n";
  os << "Set of sizes of key chunks: {";
  bool first = true;
  std::size_t total = 0;
  for (auto [size, count] : key_sizes) {
    os << (first ? "" : ", ") << size;
    first = false;
    total += count;
  }
  os << "}\n";
  os << "Sizes of key chunks with their number of occurences:\n";
  for (auto [size, count] : key_sizes) os << "Size: " << size << "  Number of occurences: " << count << "\n";
  os << "Number of sizes: " << total << "\n";
  return os.str();
}

}  // namespace mem2graph
