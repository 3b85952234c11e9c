#include <catch_amalgamated.hpp>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "locavqg/core/serialize.hpp"
#include "locavqg/core/types.hpp"
#include "locavqg/util/fs.hpp"
#include "locavqg/util/retry.hpp"
#include "locavqg/util/rng.hpp"
#include "locavqg/util/strings.hpp"

using namespace locavqg;

namespace {

std::string temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("locavqg_core_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("trim strips surrounding whitespace only") {
  CHECK(trim("  hello world \t\n") == "hello world");
  CHECK(trim("") == "");
  CHECK(trim(" \t ") == "");
  CHECK(trim("x") == "x");
}

TEST_CASE("to_lower folds ASCII and leaves other bytes alone") {
  CHECK(to_lower("MiXeD 42!") == "mixed 42!");
  CHECK(to_lower("caf\xc3\xa9") == "caf\xc3\xa9");
}

TEST_CASE("split keeps empty fields") {
  auto parts = split("a,,b,", ',');
  REQUIRE(parts.size() == 4);
  CHECK(parts[0] == "a");
  CHECK(parts[1] == "");
  CHECK(parts[2] == "b");
  CHECK(parts[3] == "");
}

TEST_CASE("flatten_newlines collapses newline runs to single spaces") {
  CHECK(flatten_newlines("a\nb") == "a b");
  CHECK(flatten_newlines("a\r\n\r\nb") == "a b");
  CHECK(flatten_newlines("plain") == "plain");
}

TEST_CASE("fnv1a is deterministic and seed-sensitive") {
  CHECK(fnv1a("abc") == fnv1a("abc"));
  CHECK(fnv1a("abc") != fnv1a("abd"));
  CHECK(fnv1a("abc") != fnv1a("abc", 7));
  CHECK(hex64(0x1234abcd) == "000000001234abcd");
}

TEST_CASE("normalize_text composes combining marks into Latin-1 forms") {
  // "e" + U+0301 -> U+00E9
  CHECK(normalize_text("caf\x65\xcc\x81") == "caf\xc3\xa9");
  // Already-composed text passes through untouched.
  CHECK(normalize_text("caf\xc3\xa9") == "caf\xc3\xa9");
  // Marks without a composition stay decomposed.
  CHECK(normalize_text("x\xcc\x84") == "x\xcc\x84");
  CHECK(kNormalizePolicy == std::string_view("nfc-latin1-v1"));
  CHECK_THROWS_AS(normalize_text("\xff\xfe"), std::runtime_error);
}

TEST_CASE("is_valid_utf8 flags truncated and malformed sequences") {
  CHECK(is_valid_utf8("plain ascii"));
  CHECK(is_valid_utf8("caf\xc3\xa9"));
  CHECK_FALSE(is_valid_utf8("\xc3"));
  CHECK_FALSE(is_valid_utf8("\x80"));
}

TEST_CASE("parse_double accepts numbers and rejects trailing junk") {
  REQUIRE(parse_double("40.4406"));
  CHECK(*parse_double("40.4406") == Catch::Approx(40.4406));
  CHECK(*parse_double("-1e3") == Catch::Approx(-1000.0));
  CHECK_FALSE(parse_double("12abc"));
  CHECK_FALSE(parse_double(""));
  CHECK_FALSE(parse_double("abc"));
}

TEST_CASE("rng helpers are deterministic under a fixed seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(rng_u64(a) == rng_u64(b));

  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    double d = rng_double(r);
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    CHECK(rng_index(r, 10) < 10);
  }
}

TEST_CASE("rng_shuffle produces a permutation") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  Rng r(3);
  auto shuffled = v;
  rng_shuffle(r, shuffled);
  CHECK(shuffled != v);
  auto sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == v);
}

TEST_CASE("rng_sample_indices returns k distinct in-range indices") {
  Rng r(11);
  auto idx = rng_sample_indices(r, 100, 10);
  REQUIRE(idx.size() == 10);
  std::set<size_t> uniq(idx.begin(), idx.end());
  CHECK(uniq.size() == 10);
  for (size_t i : idx) CHECK(i < 100);

  Rng r2(11);
  CHECK(rng_sample_indices(r2, 100, 10) == idx);
}

TEST_CASE("with_retries counts calls and stops on success") {
  RetryPolicy policy{3, 0.0};

  int calls = 0;
  auto ok = with_retries(policy, [&](std::string&) {
    ++calls;
    return true;
  });
  CHECK(ok.ok);
  CHECK(ok.calls == 1);
  CHECK(calls == 1);

  calls = 0;
  auto recovered = with_retries(policy, [&](std::string& err) {
    if (++calls < 3) {
      err = "boom";
      return false;
    }
    return true;
  });
  CHECK(recovered.ok);
  CHECK(recovered.calls == 3);

  calls = 0;
  auto failed = with_retries(policy, [&](std::string& err) {
    ++calls;
    err = "always down";
    return false;
  });
  CHECK_FALSE(failed.ok);
  CHECK(failed.calls == 3);
  CHECK(failed.error == "always down");
}

TEST_CASE("file round-trip and missing-file behavior") {
  std::string dir = temp_dir("fs");
  std::string path = dir + "/nested/deep/file.txt";
  write_file(path, "line1\nline2\n");
  CHECK(file_exists(path));
  CHECK(read_file(path) == "line1\nline2\n");
  CHECK_FALSE(file_exists(dir + "/nope.txt"));
  CHECK_THROWS_AS(read_file(dir + "/nope.txt"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("direction names round-trip") {
  for (Direction d : kDirections) {
    auto back = direction_from_name(direction_name(d));
    REQUIRE(back);
    CHECK(*back == d);
  }
  CHECK_FALSE(direction_from_name("up"));
  CHECK(direction_title(Direction::north) == "North");
}

TEST_CASE("DirectionalImages::from_entries reports duplicates and gaps") {
  std::vector<std::string> violations;
  auto imgs = DirectionalImages::from_entries(
      {{"north", "n.img"}, {"east", "e.img"}, {"south", "s.img"}, {"west", "w.img"}},
      violations);
  CHECK(violations.empty());
  CHECK(imgs.at(Direction::north) == "n.img");
  CHECK(imgs.at(Direction::west) == "w.img");

  violations.clear();
  DirectionalImages::from_entries({{"north", "a"}, {"north", "b"}, {"sideways", "c"}},
                                  violations);
  REQUIRE(violations.size() == 5);  // duplicate, unknown, 3 missing
}

TEST_CASE("task and question validation collect violations") {
  LocaVQGTask task;
  task.task_id = "t1";
  task.coordinate = {40.44, -79.99};
  for (Direction d : kDirections) task.images.at(d) = "img";
  CHECK(validate_task(task).ok());

  task.coordinate.latitude = 95.0;
  task.images.at(Direction::east).clear();
  auto report = validate_task(task);
  REQUIRE(report.violations.size() == 2);

  Question q;
  q.text = "Why is this street so lively?";
  q.engaging_score = 0.8;
  CHECK(validate_question(q).ok());
  q.engaging_score = 1.5;
  CHECK_FALSE(validate_question(q).ok());
  q.engaging_score.reset();
  q.text.clear();
  CHECK_FALSE(validate_question(q).ok());
}

namespace {

DatasetRecord sample_record() {
  DatasetRecord r;
  r.captioned.task.task_id = "pit-0001";
  r.captioned.task.coordinate = {40.4406, -79.9959};
  r.captioned.task.city = "Pittsburgh";
  for (Direction d : kDirections)
    r.captioned.task.images.at(d) = std::string(direction_name(d)) + ".img";
  r.captioned.captions = {"a city street with parked cars", "a row of brick storefronts",
                          "a tree-lined sidewalk", "a small park with benches"};
  r.captioned.address = "100 Penn Ave, Pittsburgh, USA";
  Question q;
  q.text = "Have you ever wondered why the park ended up right here?";
  q.engaging_score = 0.91;
  q.source = QuestionSource::llm;
  q.task_id = "pit-0001";
  r.questions.push_back(q);
  Question rej = q;
  rej.text = "In what year was the park first recorded?";
  rej.engaging_score = 0.12;
  r.rejected.push_back(rej);
  return r;
}

}  // namespace

TEST_CASE("record JSON round-trip preserves every field") {
  DatasetRecord r = sample_record();
  auto back = record_from_json(to_json(r));
  CHECK(back == r);

  std::string line = serialize_record(r);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(deserialize_record(line) == r);
}

TEST_CASE("serialize_record rejects invalid UTF-8") {
  DatasetRecord r = sample_record();
  r.questions[0].text = "broken \xc3 byte";
  CHECK_THROWS_AS(serialize_record(r), std::runtime_error);
}

TEST_CASE("validate_record enforces the header threshold on kept questions") {
  DatasetRecord r = sample_record();
  CHECK(validate_record(r, 0.5).ok());
  r.questions[0].engaging_score = 0.3;
  CHECK_FALSE(validate_record(r, 0.5).ok());
}

TEST_CASE("dataset header round-trips and rejects foreign lines") {
  DatasetHeader h;
  h.threshold = 0.6;
  h.filtered = true;
  h.generator = {{"llm", "stub"}, {"seed", 7}};
  h.policies = {{"token", "basic-v1"}};
  auto back = header_from_json(nlohmann::json::parse(serialize_header(h)));
  CHECK(back == h);
  CHECK_THROWS_AS(header_from_json(nlohmann::json{{"kind", "other"}}),
                  std::runtime_error);
}

TEST_CASE("dataset file write/read/write is byte-stable") {
  std::string dir = temp_dir("dataset");
  Dataset ds;
  ds.header.threshold = 0.5;
  ds.header.generator = {{"llm", "stub"}};
  ds.records.push_back(sample_record());
  ds.records.push_back(sample_record());
  ds.records[1].captioned.task.task_id = "pit-0002";

  std::string p1 = dir + "/a.jsonl", p2 = dir + "/b.jsonl";
  write_dataset(p1, ds);
  Dataset loaded = read_dataset(p1);
  CHECK(loaded.header == ds.header);
  REQUIRE(loaded.records.size() == 2);
  CHECK(loaded.records[0] == ds.records[0]);
  write_dataset(p2, loaded);
  CHECK(read_file(p1) == read_file(p2));
  std::filesystem::remove_all(dir);
}

TEST_CASE("read_dataset reports the offending line on parse errors") {
  std::string dir = temp_dir("badds");
  std::string path = dir + "/bad.jsonl";
  Dataset ds;
  ds.records.push_back(sample_record());
  write_dataset(path, ds);
  write_file(path, read_file(path) + "{not json\n");
  try {
    read_dataset(path);
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
