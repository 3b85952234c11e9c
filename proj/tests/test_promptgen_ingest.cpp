#include <catch_amalgamated.hpp>

#include <unistd.h>

#include <chrono>
#include <filesystem>

#include "locavqg/ingest/caption.hpp"
#include "locavqg/ingest/geocode.hpp"
#include "locavqg/ingest/manifest.hpp"
#include "locavqg/ingest/pipeline.hpp"
#include "locavqg/ingest/rate_limit.hpp"
#include "locavqg/promptgen/llm.hpp"
#include "locavqg/promptgen/parse.hpp"
#include "locavqg/promptgen/prompts.hpp"
#include "synthetic.hpp"

using namespace locavqg;
using namespace locavqg::promptgen;
using namespace locavqg::ingest;

namespace {

CaptionedTask sample_captioned() {
  CaptionedTask ct;
  ct.task.task_id = "t1";
  ct.task.coordinate = {40.44, -79.99};
  for (Direction d : kDirections) ct.task.images.at(d) = "img.png";
  ct.captions = {"a city street", "a brick wall", "a small park", "a tall tower"};
  ct.address = "100 Penn Ave, Pittsburgh, USA";
  return ct;
}

std::filesystem::path fresh_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("locavqg_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("chat prompt matches the template byte for byte") {
  auto [system_prompt, chat] = build_prompts(sample_captioned());
  CHECK(system_prompt ==
        "You are a tour guide and you are driving in a car with your tourists. "
        "You want to engage with them with any kind of information you have "
        "around you.");
  CHECK(chat ==
        "Here are some descriptions of your surroundings "
        "You are currently driving on 100 Penn Ave, Pittsburgh, USA. "
        "On your North, a city street. "
        "On your East, a brick wall. "
        "On your South, a small park. "
        "On your West, a tall tower. "
        "Based on those descriptions, please ask 10 engaging questions.");
}

TEST_CASE("prompt can omit the address and change the question count") {
  auto pair = build_prompts(sample_captioned(), false, 3);
  CHECK(pair.chat_prompt ==
        "Here are some descriptions of your surroundings "
        "On your North, a city street. "
        "On your East, a brick wall. "
        "On your South, a small park. "
        "On your West, a tall tower. "
        "Based on those descriptions, please ask 3 engaging questions.");
}

TEST_CASE("prompt builder flattens embedded newlines") {
  auto ct = sample_captioned();
  ct.captions[0] = "a city\nstreet\r\nwith cars";
  ct.address = "100 Penn Ave,\nPittsburgh, USA";
  auto pair = build_prompts(ct);
  CHECK(pair.chat_prompt.find("On your North, a city street with cars. ") !=
        std::string::npos);
  CHECK(pair.chat_prompt.find("driving on 100 Penn Ave, Pittsburgh, USA. ") !=
        std::string::npos);
  CHECK(pair.chat_prompt.find('\n') == std::string::npos);
}

TEST_CASE("parse_questions handles both enumerator styles and continuations") {
  std::string raw =
      "Sure! Here are your questions:\n"
      "1. What stands on the corner?\n"
      "2) Why is the bridge\n"
      "   painted green?\n"
      "\n"
      "10. What happened in 1920?\n";
  auto parsed = parse_questions(raw);
  CHECK_FALSE(parsed.unparseable);
  REQUIRE(parsed.questions.size() == 3);
  CHECK(parsed.questions[0] == "What stands on the corner?");
  CHECK(parsed.questions[1] == "Why is the bridge painted green?");
  CHECK(parsed.questions[2] == "What happened in 1920?");
  CHECK(parsed.raw == raw);
}

TEST_CASE("parse_questions flags responses with no enumerated items") {
  auto parsed = parse_questions("I could not think of any questions today.");
  CHECK(parsed.unparseable);
  CHECK(parsed.questions.empty());
  CHECK(parse_questions("").unparseable);
}

TEST_CASE("format_questions inverts parse_questions for single-line items") {
  std::vector<std::string> qs = {"First one?", "Second one?", "Third one?"};
  auto parsed = parse_questions(format_questions(qs));
  CHECK(parsed.questions == qs);
}

TEST_CASE("stub llm is deterministic and enumerable") {
  StubLlm llm(7);
  LlmClient::Request request{build_prompts(sample_captioned()), 0.7, 0.1, 10};
  auto a = llm.complete(request);
  auto b = llm.complete(request);
  CHECK(a.text == b.text);
  REQUIRE(a.tokens_used);
  auto parsed = parse_questions(a.text);
  CHECK(parsed.questions.size() == 10);

  StubLlm other(8);
  CHECK(other.complete(request).text != a.text);

  // Slot phrases come from the captions, so at least one appears verbatim.
  bool mentions_caption = false;
  for (const auto& q : parsed.questions)
    for (const auto& phrase : {"a city street", "a brick wall", "a small park",
                               "a tall tower", "100 Penn Ave"})
      if (q.find(phrase) != std::string::npos) mentions_caption = true;
  CHECK(mentions_caption);
}

TEST_CASE("llm config validates and fingerprints its settings") {
  LlmConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  LlmConfig bad = cfg;
  bad.temperature = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.max_questions = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.backend = "mystery";
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  LlmConfig other = cfg;
  other.temperature = 0.9;
  CHECK(cfg.fingerprint() != other.fingerprint());
  CHECK(cfg.fingerprint() == LlmConfig{}.fingerprint());
}

TEST_CASE("generate_raw retries failures and reports flagged exhaustion") {
  auto prompts = build_prompts(sample_captioned());
  LlmConfig cfg;
  cfg.retry = RetryPolicy{3, 0.0};

  FailingLlm twice(2);
  auto ok = generate_raw(prompts, cfg, twice);
  CHECK(ok.ok);
  CHECK(ok.calls == 3);
  CHECK(twice.calls() == 3);
  CHECK_FALSE(parse_questions(ok.text).unparseable);

  FailingLlm always(-1);
  auto failed = generate_raw(prompts, cfg, always);
  CHECK_FALSE(failed.ok);
  CHECK(failed.calls == 3);
  CHECK(always.calls() == 3);
  CHECK(failed.error == "simulated backend failure");
}

TEST_CASE("response cache short-circuits the second generation") {
  auto dir = fresh_dir("llm_cache");
  ResponseCache cache(dir.string());
  auto prompts = build_prompts(sample_captioned());
  LlmConfig cfg;

  FailingLlm client(0);  // never fails, counts calls
  auto first = generate_raw(prompts, cfg, client, &cache);
  CHECK(first.ok);
  CHECK_FALSE(first.from_cache);
  CHECK(client.calls() == 1);

  auto second = generate_raw(prompts, cfg, client, &cache);
  CHECK(second.ok);
  CHECK(second.from_cache);
  CHECK(second.text == first.text);
  CHECK(client.calls() == 1);

  // A different config fingerprint misses the cache.
  LlmConfig hotter = cfg;
  hotter.temperature = 1.3;
  CHECK(ResponseCache::key_for(prompts, hotter) !=
        ResponseCache::key_for(prompts, cfg));
  auto third = generate_raw(prompts, hotter, client, &cache);
  CHECK_FALSE(third.from_cache);
  CHECK(client.calls() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("geocode cache rounds keys and persists sorted") {
  GeocodeCache cache;
  GeoCoordinate a{40.4415001, -79.99};
  GeoCoordinate near_a{40.44150014, -79.99};  // same at 6 decimals
  CHECK(GeocodeCache::key_for(a) == "40.441500,-79.990000");
  CHECK(GeocodeCache::key_for(a) == GeocodeCache::key_for(near_a));

  cache.insert(a, "3 Oak St, Orlando, USA");
  cache.insert({41.0, -80.0}, "9 Elm St, New York, USA");
  CHECK(cache.size() == 2);
  REQUIRE(cache.lookup(near_a));
  CHECK(*cache.lookup(near_a) == "3 Oak St, Orlando, USA");

  auto dir = fresh_dir("geo_cache");
  auto path = (dir / "cache.tsv").string();
  cache.save(path);
  CHECK(read_file(path) ==
        "40.441500,-79.990000\t3 Oak St, Orlando, USA\n"
        "41.000000,-80.000000\t9 Elm St, New York, USA\n");

  GeocodeCache loaded;
  loaded.load(path);
  CHECK(loaded.size() == 2);
  CHECK(*loaded.lookup(a) == "3 Oak St, Orlando, USA");

  write_file(path, "no tab on this line\n");
  CHECK_THROWS_AS(loaded.load(path), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reverse_geocode goes through the cache and retries") {
  GeocodeCache cache;
  FixedGeocoder geocoder("77 Grant St, Pittsburgh, USA");
  GeoCoordinate c{40.44, -79.99};

  auto first = reverse_geocode(c, cache, geocoder);
  CHECK(first.ok);
  CHECK_FALSE(first.from_cache);
  CHECK(first.address == "77 Grant St, Pittsburgh, USA");
  CHECK(geocoder.calls() == 1);

  auto second = reverse_geocode(c, cache, geocoder);
  CHECK(second.ok);
  CHECK(second.from_cache);
  CHECK(geocoder.calls() == 1);

  GeoCoordinate bad{91.0, 0.0};
  auto rejected = reverse_geocode(bad, cache, geocoder);
  CHECK_FALSE(rejected.ok);
  CHECK(rejected.error == "coordinate out of range");
  CHECK(geocoder.calls() == 1);

  FixedGeocoder flaky("5 Main St, Orlando, USA", 2);
  auto retried = reverse_geocode({41.0, -80.0}, cache, flaky, RetryPolicy{3, 0.0});
  CHECK(retried.ok);
  CHECK(flaky.calls() == 3);

  FixedGeocoder dead("x", -1);
  auto exhausted = reverse_geocode({42.0, -80.0}, cache, dead, RetryPolicy{2, 0.0});
  CHECK_FALSE(exhausted.ok);
  CHECK(dead.calls() == 2);
  CHECK(exhausted.error == "simulated geocoder failure");
  CHECK_FALSE(cache.lookup({42.0, -80.0}));
}

TEST_CASE("stub geocoder is deterministic over the rounded coordinate") {
  StubGeocoder g;
  GeoCoordinate c{40.44, -79.99};
  auto a = g.reverse(c);
  CHECK(a == g.reverse({40.4400000049, -79.99}));
  CHECK(g.calls() == 2);
  CHECK(a.find(", USA") != std::string::npos);
  CHECK_THROWS_AS(StubGeocoder(std::vector<std::string>{}), std::invalid_argument);
}

TEST_CASE("caption_images is all four directions or nothing") {
  auto dir = fresh_dir("captions");
  auto tasks = testfix::write_stub_tasks(dir.string(), 1);
  StubCaptioner stub;

  auto ok = caption_images(tasks[0], stub);
  REQUIRE(ok.ok);
  for (Direction d : kDirections)
    CHECK_FALSE(ok.captions[static_cast<size_t>(d)].empty());
  // Same bytes caption the same.
  auto again = caption_images(tasks[0], stub);
  CHECK(again.captions == ok.captions);

  MappedCaptioner partial({{tasks[0].images.at(Direction::north), "a street"},
                           {tasks[0].images.at(Direction::east), "a wall"},
                           {tasks[0].images.at(Direction::south), "a park"}});
  auto failed = caption_images(tasks[0], partial);
  CHECK_FALSE(failed.ok);
  CHECK(failed.error.rfind("west:", 0) == 0);

  LocaVQGTask missing = tasks[0];
  missing.images.at(Direction::east) = dir.string() + "/nope.img";
  auto unreadable = caption_images(missing, stub);
  CHECK_FALSE(unreadable.ok);
  CHECK(unreadable.error.rfind("east:", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest parsing separates fatal rows from row errors") {
  std::string good =
      "# id\tlat\tlon\tN\tE\tS\tW\tcity\n"
      "\n"
      "t1\t40.44\t-79.99\tn.png\te.png\ts.png\tw.png\n"
      "t2\t28.53\t-81.38\tn.png\te.png\ts.png\tw.png\tOrlando\n";
  auto load = parse_manifest(good);
  CHECK(load.row_errors.empty());
  REQUIRE(load.tasks.size() == 2);
  CHECK(load.tasks[0].task_id == "t1");
  CHECK_FALSE(load.tasks[0].city);
  CHECK(load.tasks[0].coordinate.latitude == 40.44);
  CHECK(load.tasks[0].images.at(Direction::west) == "w.png");
  REQUIRE(load.tasks[1].city);
  CHECK(*load.tasks[1].city == "Orlando");

  std::string mixed =
      "t1\t40.44\t-79.99\tn.png\te.png\ts.png\tw.png\n"
      "t1\t40.45\t-79.99\tn.png\te.png\ts.png\tw.png\n"
      "t3\t95.0\t-79.99\tn.png\te.png\ts.png\tw.png\n"
      "t4\t40.46\t-79.99\tn.png\te.png\ts.png\n";
  auto partial = parse_manifest(mixed);
  CHECK(partial.tasks.size() == 1);
  REQUIRE(partial.row_errors.size() == 3);
  CHECK(partial.row_errors[0].line == 2);
  CHECK(partial.row_errors[0].message == "duplicate task_id");
  CHECK(partial.row_errors[1].message == "latitude out of range");
  CHECK(partial.row_errors[2].message == "missing direction west");

  CHECK_THROWS_WITH(parse_manifest("t1\t40.44\n"),
                    Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_WITH(parse_manifest("t1\tforty\t-79.99\tn\te\ts\tw\n"),
                    Catch::Matchers::ContainsSubstring("unparseable coordinate"));
}

TEST_CASE("load_manifest reads from disk") {
  auto dir = fresh_dir("manifest");
  auto path = (dir / "tasks.tsv").string();
  write_file(path, "t1\t40.44\t-79.99\tn.png\te.png\ts.png\tw.png\n");
  auto load = load_manifest(path);
  CHECK(load.tasks.size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ingest_tasks keeps manifest order and shares geocode calls") {
  auto dir = fresh_dir("ingest");
  auto tasks = testfix::write_stub_tasks(dir.string(), 6);
  // Two tasks share a rounded coordinate: one client call between them.
  tasks[5].coordinate = tasks[0].coordinate;
  // One task has an unreadable image and must fail, not abort the run.
  tasks[3].images.at(Direction::south) = dir.string() + "/missing.img";

  GeocodeCache cache;
  FixedGeocoder geocoder("700 Fifth Ave, Pittsburgh, USA");
  StubCaptioner captioner;
  IngestOptions options;
  options.workers = 3;
  options.retry = RetryPolicy{2, 0.0};

  auto result = ingest_tasks(tasks, cache, geocoder, captioner, options);
  CHECK(result.total() == 6);
  REQUIRE(result.captioned.size() == 5);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].task_id == "task-4");
  CHECK(result.failures[0].stage == "uncaptioned");
  CHECK(result.failures[0].reason.rfind("south:", 0) == 0);

  std::vector<std::string> ids;
  for (const auto& ct : result.captioned) ids.push_back(ct.task.task_id);
  CHECK(ids == std::vector<std::string>{"task-1", "task-2", "task-3", "task-5",
                                        "task-6"});
  CHECK(geocoder.calls() == 5);  // 6 tasks, one shared coordinate
  CHECK(cache.size() == 5);
  for (const auto& ct : result.captioned) {
    CHECK(ct.address == "700 Fifth Ave, Pittsburgh, USA");
    REQUIRE(ct.task.city);
    CHECK(*ct.task.city == "Pittsburgh");
    CHECK(validate_captioned(ct).ok());
  }

  // A rerun with a warm cache makes no client calls at all.
  auto rerun = ingest_tasks(tasks, cache, geocoder, captioner, options);
  CHECK(geocoder.calls() == 5);
  CHECK(rerun.captioned.size() == 5);

  IngestOptions bad;
  bad.workers = 0;
  CHECK_THROWS_AS(ingest_tasks(tasks, cache, geocoder, captioner, bad),
                  std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ingest_tasks respects a pre-assigned city") {
  auto dir = fresh_dir("ingest_city");
  auto tasks = testfix::write_stub_tasks(dir.string(), 1);
  tasks[0].city = "Orlando";
  GeocodeCache cache;
  FixedGeocoder geocoder("700 Fifth Ave, Pittsburgh, USA");
  StubCaptioner captioner;
  auto result = ingest_tasks(tasks, cache, geocoder, captioner);
  REQUIRE(result.captioned.size() == 1);
  CHECK(*result.captioned[0].task.city == "Orlando");
  std::filesystem::remove_all(dir);
}

TEST_CASE("token bucket throttles only when given a positive rate") {
  using Clock = std::chrono::steady_clock;

  TokenBucket unlimited(0.0);
  auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i) unlimited.acquire();
  CHECK(std::chrono::duration<double>(Clock::now() - t0).count() < 0.25);

  TokenBucket limited(100.0);  // burst 1: acquires 2..4 wait ~10 ms each
  auto t1 = Clock::now();
  for (int i = 0; i < 4; ++i) limited.acquire();
  double elapsed = std::chrono::duration<double>(Clock::now() - t1).count();
  CHECK(elapsed >= 0.02);
  CHECK(elapsed < 2.0);
}
