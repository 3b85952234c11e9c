#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "locavqg/metrics/tokenize.hpp"

namespace locavqg::metrics {

// N-gram counting for BLEU/ROUGE. Grams are token sequences joined with a
// separator byte that cannot occur inside a basic-v1 token.
namespace detail {

inline constexpr char kGramSep = '\x1f';

inline std::unordered_map<std::string, int> ngram_counts(
    const std::vector<std::string>& tokens, int n) {
  std::unordered_map<std::string, int> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (int k = 1; k < n; ++k) {
      gram.push_back(kGramSep);
      gram += tokens[i + k];
    }
    ++counts[gram];
  }
  return counts;
}

}  // namespace detail

// Clipped n-gram matches against the per-gram maximum across references,
// plus the candidate n-gram total.
struct NgramMatch {
  long long matched = 0;
  long long total = 0;
};

inline NgramMatch clipped_matches(const std::vector<std::string>& candidate,
                                  const std::vector<std::vector<std::string>>& references,
                                  int n) {
  auto cand = detail::ngram_counts(candidate, n);
  std::unordered_map<std::string, int> best_ref;
  for (const auto& ref : references)
    for (const auto& [gram, count] : detail::ngram_counts(ref, n))
      best_ref[gram] = std::max(best_ref[gram], count);
  NgramMatch m;
  for (const auto& [gram, count] : cand) {
    m.total += count;
    auto it = best_ref.find(gram);
    if (it != best_ref.end()) m.matched += std::min(count, it->second);
  }
  return m;
}

// Closest reference length to the candidate length; ties go to the shorter.
inline size_t closest_ref_length(size_t cand_len,
                                 const std::vector<std::vector<std::string>>& references) {
  size_t best = references.front().size();
  for (const auto& ref : references) {
    auto diff = [cand_len](size_t len) {
      return len > cand_len ? len - cand_len : cand_len - len;
    };
    if (diff(ref.size()) < diff(best) ||
        (diff(ref.size()) == diff(best) && ref.size() < best))
      best = ref.size();
  }
  return best;
}

// BLEU-4 on pre-tokenized text: geometric mean of modified n-gram precisions
// with a brevity penalty. Smoothing is add-one on orders 2..4 only, so
// identical sentences still score 1.0 and token-disjoint pairs score 0.0.
// Smoothing policy id: "addone-n2plus".
inline double bleu4_tokens(const std::vector<std::string>& candidate,
                           const std::vector<std::vector<std::string>>& references) {
  if (references.empty()) throw std::invalid_argument("bleu4: no references");
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    NgramMatch m = clipped_matches(candidate, references, n);
    double p;
    if (n == 1) {
      p = m.total > 0 ? static_cast<double>(m.matched) / m.total : 0.0;
    } else {
      p = static_cast<double>(m.matched + 1) / static_cast<double>(m.total + 1);
    }
    if (p <= 0.0) return 0.0;
    log_sum += 0.25 * std::log(p);
  }
  size_t r = closest_ref_length(candidate.size(), references);
  double bp = candidate.size() >= r
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(r) / candidate.size());
  return bp * std::exp(log_sum);
}

inline double bleu4(const std::string& candidate,
                    const std::vector<std::string>& references) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(tokenize(r));
  return bleu4_tokens(tokenize(candidate), refs);
}

// Corpus-level BLEU-4: counts and lengths accumulated over all pairs before
// the final formula (same smoothing and brevity-penalty conventions).
inline double bleu4_corpus(const std::vector<std::string>& candidates,
                           const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size() || candidates.empty())
    throw std::invalid_argument("bleu4_corpus: size mismatch or empty input");
  long long matched[5] = {0, 0, 0, 0, 0};
  long long total[5] = {0, 0, 0, 0, 0};
  long long cand_len = 0, ref_len = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto cand = tokenize(candidates[i]);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[i]) refs.push_back(tokenize(r));
    if (refs.empty()) throw std::invalid_argument("bleu4_corpus: no references");
    for (int n = 1; n <= 4; ++n) {
      NgramMatch m = clipped_matches(cand, refs, n);
      matched[n] += m.matched;
      total[n] += m.total;
    }
    cand_len += static_cast<long long>(cand.size());
    ref_len += static_cast<long long>(closest_ref_length(cand.size(), refs));
  }
  if (cand_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    double p = n == 1 ? (total[n] > 0 ? static_cast<double>(matched[n]) / total[n] : 0.0)
                      : static_cast<double>(matched[n] + 1) / static_cast<double>(total[n] + 1);
    if (p <= 0.0) return 0.0;
    log_sum += 0.25 * std::log(p);
  }
  double bp = cand_len >= ref_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(ref_len) / cand_len);
  return bp * std::exp(log_sum);
}

// ROUGE-2 on pre-tokenized text: bigram F1 against each reference, best
// reference taken. A candidate or reference without bigrams contributes 0.
inline double rouge2_tokens(const std::vector<std::string>& candidate,
                            const std::vector<std::vector<std::string>>& references) {
  if (references.empty()) throw std::invalid_argument("rouge2: no references");
  auto cand = detail::ngram_counts(candidate, 2);
  long long cand_total = 0;
  for (const auto& [gram, count] : cand) cand_total += count;
  double best = 0.0;
  for (const auto& ref : references) {
    auto refc = detail::ngram_counts(ref, 2);
    long long ref_total = 0, matched = 0;
    for (const auto& [gram, count] : refc) ref_total += count;
    for (const auto& [gram, count] : cand) {
      auto it = refc.find(gram);
      if (it != refc.end()) matched += std::min(count, it->second);
    }
    if (cand_total == 0 || ref_total == 0) continue;
    double p = static_cast<double>(matched) / cand_total;
    double r = static_cast<double>(matched) / ref_total;
    double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    best = std::max(best, f);
  }
  return best;
}

inline double rouge2(const std::string& candidate,
                     const std::vector<std::string>& references) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(tokenize(r));
  return rouge2_tokens(tokenize(candidate), refs);
}

// Corpus-level ROUGE-2: mean of per-candidate scores.
inline double rouge2_corpus(const std::vector<std::string>& candidates,
                            const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size() || candidates.empty())
    throw std::invalid_argument("rouge2_corpus: size mismatch or empty input");
  double sum = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i)
    sum += rouge2(candidates[i], references[i]);
  return sum / candidates.size();
}

}  // namespace locavqg::metrics
