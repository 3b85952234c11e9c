#include <catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>

#include "locavqg/engage/checkpoint.hpp"
#include "locavqg/engage/classifier.hpp"
#include "locavqg/engage/corpus.hpp"
#include "locavqg/engage/scorer.hpp"
#include "locavqg/engage/train.hpp"
#include "synthetic.hpp"

using namespace locavqg;
using namespace locavqg::engage;

namespace {

double length_score(const std::string& s) {
  return static_cast<double>(s.size()) / 1000.0;
}

SplitCorpus small_corpus(int per_class, uint64_t seed) {
  return build_corpus(testfix::factoid_questions(per_class, seed),
                      testfix::engaging_questions(per_class, seed + 1), seed);
}

std::vector<Question> as_questions(const std::vector<std::string>& texts) {
  std::vector<Question> out;
  for (const auto& t : texts) {
    Question q;
    q.text = t;
    q.task_id = "t";
    out.push_back(q);
  }
  return out;
}

}  // namespace

TEST_CASE("scorer scoring is whitespace-trim invariant") {
  CallbackScorer scorer(length_score, 0.5);
  CHECK(scorer.score("  hello  ") == scorer.score("hello"));
  CHECK(scorer.score("\thello\n") == scorer.score("hello"));
  CHECK(scorer.threshold() == 0.5);
  CHECK_FALSE(scorer.accepts("hi"));
}

TEST_CASE("parse_question_lines drops blanks and trims") {
  auto qs = parse_question_lines("First question?\n\n  Second question?  \n");
  REQUIRE(qs.size() == 2);
  CHECK(qs[0] == "First question?");
  CHECK(qs[1] == "Second question?");
}

TEST_CASE("build_corpus splits deterministically with preserved labels") {
  auto corpus = small_corpus(50, 9);
  CHECK(corpus.size() == 100);
  CHECK(corpus.train.size() == 80);
  CHECK(corpus.val.size() == 10);
  CHECK(corpus.test.size() == 10);

  auto again = small_corpus(50, 9);
  for (size_t i = 0; i < corpus.train.size(); ++i) {
    CHECK(corpus.train[i].text == again.train[i].text);
    CHECK(corpus.train[i].label == again.train[i].label);
  }

  auto other_seed = small_corpus(50, 10);
  bool any_differs = false;
  for (size_t i = 0; i < corpus.train.size(); ++i)
    if (corpus.train[i].text != other_seed.train[i].text) any_differs = true;
  CHECK(any_differs);

  // Every engaging text carries the engaging label wherever it landed.
  auto engaging = testfix::engaging_questions(50, 10);
  std::vector<LabeledQuestion> all;
  all.insert(all.end(), corpus.train.begin(), corpus.train.end());
  all.insert(all.end(), corpus.val.begin(), corpus.val.end());
  all.insert(all.end(), corpus.test.begin(), corpus.test.end());
  size_t engaging_count = 0;
  for (const auto& q : all) {
    if (q.label == EngageLabel::engaging) {
      ++engaging_count;
      CHECK(q.origin == QuestionOrigin::mvqg);
    } else {
      CHECK(q.origin == QuestionOrigin::squad);
    }
  }
  CHECK(engaging_count == 50);
}

TEST_CASE("build_corpus validates inputs") {
  CHECK_THROWS_AS(build_corpus({}, {"x"}, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_corpus({"x"}, {}, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_corpus({" "}, {"x"}, 0), std::invalid_argument);
  SplitFractions bad{0.5, 0.1, 0.1};
  CHECK_THROWS_AS(build_corpus({"a"}, {"b"}, 0, bad), std::invalid_argument);
}

TEST_CASE("filter partitions questions and annotates scores") {
  CallbackScorer scorer(length_score, 0.03);
  auto questions = as_questions({"short?", std::string(60, 'a') + "?",
                                 "tiny?", std::string(40, 'b') + "?"});
  auto result = filter(scorer, questions);
  CHECK(result.kept.size() == 2);
  CHECK(result.rejected.size() == 2);
  // Order preserved within each part.
  CHECK(result.kept[0].text[0] == 'a');
  CHECK(result.kept[1].text[0] == 'b');
  CHECK(result.rejected[0].text == "short?");
  CHECK(result.rejected[1].text == "tiny?");
  for (const auto& q : result.kept) {
    REQUIRE(q.engaging_score);
    CHECK(*q.engaging_score >= 0.03);
  }
  for (const auto& q : result.rejected) {
    REQUIRE(q.engaging_score);
    CHECK(*q.engaging_score < 0.03);
  }

  auto stricter = filter(scorer, questions, 0.05);
  CHECK(stricter.kept.size() == 1);
}

TEST_CASE("lexical classifier separates the synthetic corpus") {
  auto corpus = small_corpus(200, 17);
  ClassifierTrainConfig cfg;
  cfg.backend = "lexical";
  cfg.epochs = 3;
  cfg.lr = 0.1;
  cfg.seed = 17;
  auto outcome = train_classifier(corpus, cfg);
  CHECK_FALSE(outcome.aborted);
  CHECK(outcome.encoder_id == "lexical-ngram-v1");
  REQUIRE(outcome.lexical);
  CHECK_FALSE(outcome.encoder);
  REQUIRE(outcome.epoch_losses.size() == 3);
  CHECK(outcome.epoch_losses.back() < outcome.epoch_losses.front());
  CHECK(outcome.accuracy.test >= 0.95);
  CHECK(outcome.accuracy.train >= 0.95);
}

TEST_CASE("encoder classifier trains end to end on a small corpus") {
  auto corpus = small_corpus(100, 23);
  ClassifierTrainConfig cfg;
  cfg.backend = "encoder";
  cfg.epochs = 10;
  cfg.lr = 2e-3;
  cfg.seed = 23;
  cfg.encoder.d_model = 16;
  cfg.encoder.n_heads = 2;
  cfg.encoder.ffn_dim = 32;
  cfg.encoder.max_len = 24;
  auto outcome = train_classifier(corpus, cfg);
  CHECK_FALSE(outcome.aborted);
  CHECK(outcome.encoder_id == "scratch-transformer-enc-v1");
  REQUIRE(outcome.encoder);
  CHECK(outcome.epoch_losses.size() == 10);
  CHECK(outcome.epoch_losses.back() < outcome.epoch_losses.front());
  CHECK(outcome.accuracy.test >= 0.8);
}

TEST_CASE("train_classifier validates its configuration and corpus") {
  auto corpus = small_corpus(10, 3);
  ClassifierTrainConfig cfg;
  cfg.backend = "nonsense";
  CHECK_THROWS_AS(train_classifier(corpus, cfg), std::invalid_argument);
  cfg.backend = "lexical";
  cfg.epochs = 0;
  CHECK_THROWS_AS(train_classifier(corpus, cfg), std::invalid_argument);
  cfg.epochs = 1;
  cfg.lr = 0.0;
  CHECK_THROWS_AS(train_classifier(corpus, cfg), std::invalid_argument);
  cfg.lr = 0.1;
  cfg.optimizer = "sgd";
  CHECK_THROWS_AS(train_classifier(corpus, cfg), std::invalid_argument);
  cfg.optimizer = "adam";

  SplitCorpus empty;
  CHECK_THROWS_AS(train_classifier(empty, cfg), std::invalid_argument);

  SplitCorpus one_label;
  one_label.train = {{"a?", EngageLabel::engaging, QuestionOrigin::mvqg}};
  CHECK_THROWS_AS(train_classifier(one_label, cfg), std::invalid_argument);
}

TEST_CASE("split_accuracy handles empty splits") {
  CallbackScorer scorer(length_score, 0.5);
  CHECK(split_accuracy(scorer, {}) == 0.0);
}

TEST_CASE("classifier thresholds must lie strictly inside (0, 1)") {
  CHECK_THROWS_AS(LexicalClassifier(16, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(LexicalClassifier(16, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(LexicalClassifier(1, 0.5), std::invalid_argument);
  LexicalClassifier ok(16, 0.5);
  ok.set_threshold(0.25);
  CHECK(ok.threshold() == 0.25);
}

TEST_CASE("lexical checkpoint round-trips scores bit-for-bit") {
  auto dir = std::filesystem::temp_directory_path() /
             ("locavqg_eng_lex_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);

  auto corpus = small_corpus(80, 29);
  ClassifierTrainConfig cfg;
  cfg.backend = "lexical";
  cfg.epochs = 2;
  cfg.lr = 0.1;
  cfg.lexical_dim = 1 << 12;
  auto outcome = train_classifier(corpus, cfg);

  save_classifier(dir.string(), *outcome.lexical, {{"seed", 29}});
  auto loaded = load_classifier(dir.string());
  CHECK(loaded.encoder_id == "lexical-ngram-v1");
  REQUIRE(loaded.lexical);
  CHECK(loaded.model->threshold() == outcome.lexical->threshold());
  for (const auto& q : corpus.test)
    CHECK(loaded.model->score(q.text) == outcome.model->score(q.text));

  auto config = nlohmann::json::parse(read_file(dir.string() + "/config.json"));
  CHECK(config.at("run").at("seed") == 29);
  std::filesystem::remove_all(dir);
}

TEST_CASE("encoder checkpoint round-trips scores bit-for-bit") {
  auto dir = std::filesystem::temp_directory_path() /
             ("locavqg_eng_enc_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);

  auto corpus = small_corpus(30, 31);
  ClassifierTrainConfig cfg;
  cfg.backend = "encoder";
  cfg.epochs = 1;
  cfg.lr = 1e-3;
  cfg.encoder.d_model = 16;
  cfg.encoder.n_heads = 2;
  cfg.encoder.ffn_dim = 32;
  auto outcome = train_classifier(corpus, cfg);

  save_classifier(dir.string(), *outcome.encoder);
  auto loaded = load_classifier(dir.string());
  CHECK(loaded.encoder_id == "scratch-transformer-enc-v1");
  REQUIRE(loaded.encoder);
  for (const auto& q : corpus.test)
    CHECK(loaded.model->score(q.text) == outcome.model->score(q.text));

  // A tampered tokenizer is an integrity failure, not a silent mismatch.
  write_file(dir.string() + "/tokenizer.txt", "<pad>\n<bos>\n<eos>\n<unk>\nzz\n");
  CHECK_THROWS_AS(load_classifier(dir.string()), std::runtime_error);

  auto config = nlohmann::json::parse(read_file(dir.string() + "/config.json"));
  config["backend"] = "mystery";
  write_file(dir.string() + "/config.json", config.dump(2) + "\n");
  CHECK_THROWS_AS(load_classifier(dir.string()), std::runtime_error);
  std::filesystem::remove_all(dir);
}
