#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/util/rng.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::engage {

enum class EngageLabel { non_engaging = 0, engaging = 1 };

enum class QuestionOrigin { squad, mvqg, synthetic };

inline std::string origin_name(QuestionOrigin o) {
  switch (o) {
    case QuestionOrigin::squad: return "squad";
    case QuestionOrigin::mvqg: return "mvqg";
    case QuestionOrigin::synthetic: return "synthetic";
  }
  return "synthetic";
}

struct LabeledQuestion {
  std::string text;
  EngageLabel label = EngageLabel::non_engaging;
  QuestionOrigin origin = QuestionOrigin::synthetic;
};

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void validate() const {
    if (train <= 0.0 || val < 0.0 || test < 0.0 ||
        std::abs(train + val + test - 1.0) > 1e-9)
      throw std::invalid_argument("split fractions must be positive and sum to 1");
  }
};

struct SplitCorpus {
  std::vector<LabeledQuestion> train;
  std::vector<LabeledQuestion> val;
  std::vector<LabeledQuestion> test;

  size_t size() const { return train.size() + val.size() + test.size(); }
};

// Labels come from the source list: negatives (QA-style) vs positives
// (engagement-style). Shuffle and split sizes are fully determined by the
// seed; train takes floor(n*f_train) items, val the next floor(n*f_val),
// test the remainder.
inline SplitCorpus build_corpus(const std::vector<std::string>& negatives,
                                const std::vector<std::string>& positives,
                                uint64_t seed,
                                SplitFractions fractions = {},
                                QuestionOrigin negative_origin = QuestionOrigin::squad,
                                QuestionOrigin positive_origin = QuestionOrigin::mvqg) {
  if (negatives.empty()) throw std::invalid_argument("build_corpus: negatives empty");
  if (positives.empty()) throw std::invalid_argument("build_corpus: positives empty");
  fractions.validate();

  std::vector<LabeledQuestion> all;
  all.reserve(negatives.size() + positives.size());
  for (const auto& q : negatives) {
    if (trim(q).empty()) throw std::invalid_argument("build_corpus: empty question text");
    all.push_back({q, EngageLabel::non_engaging, negative_origin});
  }
  for (const auto& q : positives) {
    if (trim(q).empty()) throw std::invalid_argument("build_corpus: empty question text");
    all.push_back({q, EngageLabel::engaging, positive_origin});
  }

  Rng rng(seed);
  rng_shuffle(rng, all);

  size_t n = all.size();
  auto n_train = static_cast<size_t>(static_cast<double>(n) * fractions.train);
  auto n_val = static_cast<size_t>(static_cast<double>(n) * fractions.val);

  SplitCorpus out;
  out.train.assign(all.begin(), all.begin() + static_cast<ptrdiff_t>(n_train));
  out.val.assign(all.begin() + static_cast<ptrdiff_t>(n_train),
                 all.begin() + static_cast<ptrdiff_t>(n_train + n_val));
  out.test.assign(all.begin() + static_cast<ptrdiff_t>(n_train + n_val), all.end());
  return out;
}

// One question per line; blank lines skipped.
inline std::vector<std::string> parse_question_lines(const std::string& content) {
  std::vector<std::string> out;
  for (const auto& line : split(content, '\n')) {
    std::string t = trim(line);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace locavqg::engage
