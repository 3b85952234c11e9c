#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "locavqg/metrics/tokenize.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::metrics {

// Questions shorter than three tokens land in this reserved type bucket.
inline constexpr const char* kShortTypeBucket = "<short>";

struct CorpusStats {
  size_t question_count = 0;
  size_t sentence_count = 0;
  size_t vocab_size = 0;        // distinct case-folded tokens
  double avg_sentence_length = 0.0;  // tokens per sentence
  double avg_question_length = 0.0;  // tokens per question
  std::string token_policy;
  std::string sentence_policy;
};

inline CorpusStats corpus_stats(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("corpus_stats: empty corpus");
  CorpusStats stats;
  stats.token_policy = kTokenPolicy;
  stats.sentence_policy = kSentencePolicy;
  stats.question_count = corpus.size();
  std::unordered_set<std::string> vocab;
  long long question_tokens = 0, sentence_tokens = 0;
  for (const auto& question : corpus) {
    auto tokens = tokenize(question);
    question_tokens += static_cast<long long>(tokens.size());
    for (auto& t : tokens) vocab.insert(std::move(t));
    for (const auto& sentence : split_sentences(question)) {
      auto st = tokenize(sentence);
      if (st.empty()) continue;
      ++stats.sentence_count;
      sentence_tokens += static_cast<long long>(st.size());
    }
  }
  stats.vocab_size = vocab.size();
  stats.avg_question_length =
      static_cast<double>(question_tokens) / static_cast<double>(corpus.size());
  stats.avg_sentence_length =
      stats.sentence_count > 0
          ? static_cast<double>(sentence_tokens) / static_cast<double>(stats.sentence_count)
          : 0.0;
  return stats;
}

struct QuestionTypes {
  // leading case-folded trigram -> count, descending by count (ties: lexicographic)
  std::vector<std::pair<std::string, size_t>> counts;
  size_t distinct_types = 0;  // excludes the <short> bucket
};

inline QuestionTypes question_types(const std::vector<std::string>& corpus) {
  std::unordered_map<std::string, size_t> counts;
  for (const auto& question : corpus) {
    auto tokens = tokenize(question);
    if (tokens.size() < 3) {
      ++counts[kShortTypeBucket];
      continue;
    }
    ++counts[tokens[0] + " " + tokens[1] + " " + tokens[2]];
  }
  QuestionTypes out;
  out.counts.assign(counts.begin(), counts.end());
  std::sort(out.counts.begin(), out.counts.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [type, count] : out.counts)
    if (type != kShortTypeBucket) ++out.distinct_types;
  return out;
}

inline std::vector<std::pair<std::string, size_t>> frequent_words(
    const std::vector<std::string>& corpus, const Stopwords& stopwords, size_t k) {
  std::unordered_map<std::string, size_t> counts;
  for (const auto& question : corpus)
    for (auto& token : tokenize(question))
      if (!stopwords.count(token)) ++counts[token];
  std::vector<std::pair<std::string, size_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

using Lexicon = std::unordered_set<std::string>;

inline Lexicon load_lexicon(const std::string& file_content) {
  Lexicon out;
  for (const auto& line : split(file_content, '\n')) {
    std::string w = trim(line);
    if (w.empty() || w[0] == '#') continue;
    out.insert(to_lower(w));
  }
  return out;
}

// Fraction of corpus tokens (case-folded) present in the abstract-term lexicon.
inline double abstract_term_ratio(const std::vector<std::string>& corpus,
                                  const Lexicon& lexicon) {
  long long total = 0, hits = 0;
  for (const auto& question : corpus)
    for (const auto& token : tokenize(question)) {
      ++total;
      if (lexicon.count(token)) ++hits;
    }
  if (total == 0) return 0.0;
  return static_cast<double>(hits) / static_cast<double>(total);
}

// word -> minimum taxonomy depth of its noun senses.
using LexicalHierarchy = std::unordered_map<std::string, int>;

inline LexicalHierarchy load_hierarchy(const std::string& file_content) {
  LexicalHierarchy out;
  for (const auto& line : split(file_content, '\n')) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cols = split(t, '\t');
    if (cols.size() != 2) throw std::runtime_error("hierarchy: bad line: " + t);
    auto depth = parse_double(cols[1]);
    if (!depth) throw std::runtime_error("hierarchy: bad depth: " + t);
    auto [it, inserted] = out.emplace(to_lower(trim(cols[0])), static_cast<int>(*depth));
    if (!inserted) it->second = std::min(it->second, static_cast<int>(*depth));
  }
  return out;
}

// Mean taxonomy depth over noun-token occurrences. Noun policy
// "hierarchy-membership-v1": a token counts as a noun iff the hierarchy
// lists it. Throws when the corpus has no noun tokens at all.
inline double term_depth(const std::vector<std::string>& corpus,
                         const LexicalHierarchy& hierarchy) {
  if (hierarchy.empty()) throw std::invalid_argument("term_depth: empty hierarchy");
  long long noun_tokens = 0;
  long long depth_sum = 0;
  for (const auto& question : corpus)
    for (const auto& token : tokenize(question)) {
      auto it = hierarchy.find(token);
      if (it == hierarchy.end()) continue;
      ++noun_tokens;
      depth_sum += it->second;
    }
  if (noun_tokens == 0) throw std::runtime_error("term_depth: no noun tokens");
  return static_cast<double>(depth_sum) / static_cast<double>(noun_tokens);
}

}  // namespace locavqg::metrics
