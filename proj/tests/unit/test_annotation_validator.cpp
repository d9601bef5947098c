#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "mem2graph/annotation_validator.hpp"
#include "mem2graph/synth.hpp"

using namespace mem2graph;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const HeapBounds k5070Bounds{fixtures::k5070HeapStart, 135176};

fs::path fresh_dir(const char* name) {
  auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("hex address check") {
  CHECK(is_hex_address_correct(json("56343a1a3170"), k5070Bounds));
  CHECK(!is_hex_address_correct(json("56343a1a3171"), k5070Bounds));  // misaligned
  CHECK(!is_hex_address_correct(json("56343a190000"), k5070Bounds));  // below start
  CHECK(!is_hex_address_correct(json("56343a1c0000"), k5070Bounds));  // past the end
  CHECK(!is_hex_address_correct(json("xyz"), k5070Bounds));
  CHECK(!is_hex_address_correct(json(5), k5070Bounds));
  CHECK(!is_hex_address_correct(json("56343a1a3170"), HeapBounds{std::nullopt, 135176}));
}

TEST_CASE("key entry outcomes") {
  auto j = json::parse(fixtures::k5070Json);
  CHECK(validate_key_entry('C', j, k5070Bounds) == KeyCounts{0, 0, 0});
  CHECK(validate_key_entry('E', j, k5070Bounds) == KeyCounts{0, 1, 0});

  auto partial = json::parse(fixtures::kPartialJson);
  HeapBounds pb{0x5589d41e0000, 135176};
  CHECK(validate_key_entry('C', partial, pb) == KeyCounts{0, 0, 1});

  auto bad = j;
  bad["KEY_A_ADDR"] = "56343a1a3171";
  CHECK(validate_key_entry('A', bad, k5070Bounds) == KeyCounts{1, 0, 0});
  bad = j;
  bad["KEY_A_LEN"] = "-4";
  CHECK(validate_key_entry('A', bad, k5070Bounds) == KeyCounts{1, 0, 0});
  bad = j;
  bad["KEY_A_LEN"] = "twelve";
  CHECK(validate_key_entry('A', bad, k5070Bounds) == KeyCounts{1, 0, 0});
  bad = j;
  bad["KEY_A_LEN"] = "16";
  std::vector<std::string> messages;
  CHECK(validate_key_entry('A', bad, k5070Bounds, &messages) == KeyCounts{1, 0, 0});
  CHECK(messages.size() == 1);
  bad = j;
  bad.erase("KEY_A_REAL_LEN");
  CHECK(validate_key_entry('A', bad, k5070Bounds) == KeyCounts{0, 0, 1});
  // LEN 0 with a non-empty value is still missing.
  bad = j;
  bad["KEY_A_LEN"] = "0";
  CHECK(validate_key_entry('A', bad, k5070Bounds) == KeyCounts{0, 1, 0});
}

TEST_CASE("5070 annotation: mandatory fields valid, E and F empty") {
  auto r = validate_annotation(json::parse(fixtures::k5070Json), 135176);
  CHECK(r.mandatory_present == std::array<bool, 3>{true, true, true});
  CHECK(r.all_mandatory_valid());
  CHECK(r.key_letters == 6);
  // KEY_E and KEY_F have empty values and LEN 0: counted as missing.
  CHECK(r.keys == KeyCounts{0, 2, 0});
  CHECK(categorize(r) == FileCategory::MissingKey);

  auto j = json::parse(fixtures::k5070Json);
  for (const char* k : {"KEY_E", "KEY_E_ADDR", "KEY_E_LEN", "KEY_E_REAL_LEN", "KEY_F", "KEY_F_ADDR", "KEY_F_LEN",
                        "KEY_F_REAL_LEN"})
    j.erase(k);
  auto clean = validate_annotation(j, 135176);
  CHECK(clean.keys == KeyCounts{0, 0, 0});
  CHECK(categorize(clean) == FileCategory::CorrectComplete);
}

TEST_CASE("annotation with values but no addresses") {
  auto r = validate_annotation(json::parse(fixtures::kPartialJson), 135176);
  CHECK(r.mandatory_present[0]);
  CHECK(!r.mandatory_present[1]);
  CHECK(r.mandatory_present[2]);
  CHECK(r.keys.incomplete >= 2);
  CHECK(categorize(r) == FileCategory::IncompleteKey);
}

TEST_CASE("empty object") {
  auto r = validate_annotation(json::object(), 0);
  CHECK(r.mandatory_present == std::array<bool, 3>{false, false, false});
  CHECK(r.key_letters == 0);
  CHECK(r.keys == KeyCounts{});
}

TEST_CASE("category precedence") {
  ValidationReport r;
  r.mandatory_present = {true, true, true};
  r.mandatory_valid = {true, true, true};
  CHECK(categorize(r) == FileCategory::CorrectComplete);
  r.keys.missing = 1;
  CHECK(categorize(r) == FileCategory::MissingKey);
  r.keys.incomplete = 1;
  CHECK(categorize(r) == FileCategory::IncompleteKey);
  r.keys.incorrect = 1;
  CHECK(categorize(r) == FileCategory::Incorrect);
  ValidationReport m;
  m.mandatory_present = {true, false, true};
  m.mandatory_valid = {true, false, true};
  CHECK(categorize(m) == FileCategory::IncompleteKey);
  m.mandatory_present = {true, true, true};
  CHECK(categorize(m) == FileCategory::Incorrect);
}

TEST_CASE("classify_file") {
  auto dir = fresh_dir("mem2graph_classify_file");
  auto heap = synth_heap(random_spec(3));
  write_pair(dir, "1-1", heap, heap.annotation.dump());
  CHECK(classify_file(dir / "1-1.json").category == FileCategory::CorrectComplete);
  std::ofstream(dir / "2-2.json") << "";
  CHECK(classify_file(dir / "2-2.json").category == FileCategory::Broken);
  std::ofstream(dir / "3-3.json") << "[1, 2]";
  CHECK(classify_file(dir / "3-3.json").category == FileCategory::Broken);
  // No RAW: every address is out of range.
  std::ofstream(dir / "4-4.json") << heap.annotation.dump();
  CHECK(classify_file(dir / "4-4.json").category == FileCategory::Incorrect);
  fs::remove_all(dir);
}

TEST_CASE("one complete pair") {
  auto dir = fresh_dir("mem2graph_one_pair");
  auto heap = synth_heap(random_spec(5));
  write_pair(dir / "Training" / "basic", "7-7", heap, heap.annotation.dump());
  auto clean = fs::temp_directory_path() / "mem2graph_one_pair_clean";
  fs::remove_all(clean);
  auto report = classify_corpus(dir, 1, clean);
  CHECK(report.json_files == 1);
  CHECK(report.count(FileCategory::CorrectComplete) == 1);
  CHECK(fs::exists(clean / "Training" / "basic" / "7-7.json"));
  CHECK(fs::exists(clean / "Training" / "basic" / "7-7-heap.raw"));
  CHECK(fs::exists(dir / "Training" / "basic" / "7-7.json"));  // copied, not moved
  CHECK(report.summary().find("Number of Correct and Complete Files: 1\n") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(clean);
}

TEST_CASE("drop_broken_chaining") {
  auto dir = fresh_dir("mem2graph_drop_broken");
  auto good = synth_heap(random_spec(11));
  auto bad = synth_heap(random_spec(12));
  break_chain(bad, bad.chunks.size() / 2);
  write_pair(dir, "1-1", good, good.annotation.dump());
  write_pair(dir, "2-2", bad, bad.annotation.dump());
  auto removed = drop_broken_chaining(dir);
  REQUIRE(removed.size() == 1);
  CHECK(removed[0].filename() == "2-2-heap.raw");
  CHECK(!fs::exists(dir / "2-2-heap.raw"));
  CHECK(!fs::exists(dir / "2-2.json"));
  CHECK(fs::exists(dir / "1-1-heap.raw"));
  fs::remove_all(dir);
}
