#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "locavqg/engage/scorer.hpp"
#include "locavqg/qgen/examples.hpp"
#include "locavqg/qgen/model.hpp"
#include "locavqg/util/rng.hpp"

namespace locavqg::qgen {

struct DecodeConfig {
  enum class Kind { greedy, nucleus };
  Kind kind = Kind::nucleus;
  double top_p = 0.9;
  double temperature = 1.0;
  int max_new_tokens = 48;
};

namespace detail {

// Specials other than <eos> are never emitted.
inline bool blocked_id(int id) {
  return id == nn::Tokenizer::kPad || id == nn::Tokenizer::kBos ||
         id == nn::Tokenizer::kUnk;
}

inline int argmax_allowed(const Eigen::RowVectorXd& row) {
  int best = nn::Tokenizer::kEos;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < row.size(); ++i) {
    if (blocked_id(i)) continue;
    if (row(i) > best_v) { best_v = row(i); best = i; }
  }
  return best;
}

// Smallest-prefix nucleus sample over softmax(row / temperature).
inline int nucleus_sample(const Eigen::RowVectorXd& row, double top_p,
                          double temperature, Rng& rng) {
  Eigen::ArrayXd z = row.transpose().array() / temperature;
  for (int i = 0; i < z.size(); ++i)
    if (blocked_id(i)) z(i) = -1e30;
  double m = z.maxCoeff();
  Eigen::ArrayXd p = (z - m).exp();
  p /= p.sum();

  std::vector<int> order(static_cast<size_t>(p.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (p(a) != p(b)) return p(a) > p(b);
    return a < b;
  });

  double cum = 0.0;
  size_t keep = 0;
  while (keep < order.size()) {
    cum += p(order[keep]);
    ++keep;
    if (cum >= top_p) break;
  }
  double u = rng_double(rng) * cum;
  double acc = 0.0;
  for (size_t i = 0; i < keep; ++i) {
    acc += p(order[i]);
    if (u < acc) return order[i];
  }
  return order[keep - 1];
}

}  // namespace detail

// Autoregressive decode; the full prefix is re-run each step (fine at the
// model sizes used here). Returns generated ids without specials.
inline std::vector<int> decode_ids(QGModel& model, const std::vector<int>& src,
                                   const DecodeConfig& cfg, Rng& rng) {
  if (cfg.kind == DecodeConfig::Kind::nucleus &&
      (cfg.top_p <= 0.0 || cfg.top_p > 1.0))
    throw std::invalid_argument("decode: top_p must be in (0, 1]");
  std::vector<int> dec_in{nn::Tokenizer::kBos};
  std::vector<int> out;
  int limit = std::min(cfg.max_new_tokens, model.net->config().max_len - 1);
  for (int step = 0; step < limit; ++step) {
    nn::Matrix logits = model.net->forward_logits(src, dec_in);
    Eigen::RowVectorXd row = logits.row(logits.rows() - 1);
    int next = cfg.kind == DecodeConfig::Kind::greedy
                   ? detail::argmax_allowed(row)
                   : detail::nucleus_sample(row, cfg.top_p, cfg.temperature, rng);
    if (next == nn::Tokenizer::kEos) break;
    out.push_back(next);
    dec_in.push_back(next);
  }
  return out;
}

struct GenerateOutcome {
  Question question;
  bool empty_after_retry = false;  // decode produced no tokens twice
};

inline std::vector<int> encode_src(const QGModel& model, const CaptionedTask& ct,
                                   bool include_address) {
  auto src = model.tokenizer.encode(build_input_text(ct, include_address));
  if (src.empty()) src.push_back(nn::Tokenizer::kUnk);
  int max_len = model.net->config().max_len;
  if (static_cast<int>(src.size()) > max_len) src.resize(max_len);
  return src;
}

// One question for one task. An empty decode is retried once (the sampler
// state has advanced, so a sampling retry can differ); a second empty result
// is flagged rather than hidden.
inline GenerateOutcome generate(QGModel& model, const CaptionedTask& ct,
                                const DecodeConfig& cfg, uint64_t seed,
                                QuestionSource source = QuestionSource::student,
                                bool include_address = true) {
  auto src = encode_src(model, ct, include_address);
  Rng rng(seed);
  GenerateOutcome out;
  std::string text = model.tokenizer.decode(decode_ids(model, src, cfg, rng));
  if (text.empty()) {
    text = model.tokenizer.decode(decode_ids(model, src, cfg, rng));
    out.empty_after_retry = text.empty();
  }
  out.question.text = text;
  out.question.source = source;
  out.question.task_id = ct.task.task_id;
  return out;
}

struct FilteredOutcome {
  Question question;
  int attempts = 0;
  bool fallback = false;  // no attempt met the threshold; best one returned
  std::vector<double> attempt_scores;
};

// Sample-score-retry loop: draws up to max_attempts candidates and returns
// the first one the scorer accepts, else the best-scoring one flagged as a
// fallback. Requires a sampling decode so attempts can differ.
inline FilteredOutcome filtered_generate(QGModel& model, const engage::Scorer& scorer,
                                         const CaptionedTask& ct,
                                         const DecodeConfig& cfg, uint64_t seed,
                                         int max_attempts = 10,
                                         QuestionSource source = QuestionSource::student,
                                         bool include_address = true) {
  if (max_attempts < 1)
    throw std::invalid_argument("filtered_generate: max_attempts must be >= 1");
  if (cfg.kind != DecodeConfig::Kind::nucleus && max_attempts > 1)
    throw std::invalid_argument(
        "filtered_generate: retries need a sampling decode, got greedy");

  auto src = encode_src(model, ct, include_address);
  Rng rng(seed);
  FilteredOutcome out;
  std::string best_text;
  double best_score = -1.0;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::string text = model.tokenizer.decode(decode_ids(model, src, cfg, rng));
    double score = scorer.score(text);
    out.attempt_scores.push_back(score);
    ++out.attempts;
    if (score > best_score) { best_score = score; best_text = text; }
    if (score >= scorer.threshold()) {
      best_text = text;
      best_score = score;
      break;
    }
  }
  out.fallback = best_score < scorer.threshold();
  out.question.text = best_text;
  out.question.engaging_score = best_score;
  out.question.source = source;
  out.question.task_id = ct.task.task_id;
  return out;
}

// Teacher-generated hard targets for the sequence-level distillation arm.
inline std::vector<QGExample> teacher_outputs(QGModel& teacher,
                                              const std::vector<QGExample>& examples,
                                              uint64_t seed) {
  DecodeConfig cfg;
  cfg.kind = DecodeConfig::Kind::greedy;
  std::vector<QGExample> out;
  Rng rng(seed);
  for (const auto& ex : examples) {
    auto src = teacher.tokenizer.encode(ex.input_text);
    if (src.empty()) src.push_back(nn::Tokenizer::kUnk);
    int max_len = teacher.net->config().max_len;
    if (static_cast<int>(src.size()) > max_len) src.resize(max_len);
    std::string text = teacher.tokenizer.decode(decode_ids(teacher, src, cfg, rng));
    if (!text.empty()) out.push_back({ex.task_id, ex.input_text, text});
  }
  return out;
}

}  // namespace locavqg::qgen
