#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/engage/classifier.hpp"
#include "locavqg/engage/corpus.hpp"

namespace locavqg::engage {

struct ClassifierTrainConfig {
  int epochs = 10;
  double lr = 1e-5;
  std::string optimizer = "adam";  // encoder backend; lexical always uses sgd
  SplitFractions fractions;
  uint64_t seed = 0;
  std::string backend = "encoder";  // "encoder" | "lexical"
  double threshold = 0.5;
  int batch_size = 16;
  double clip_norm = 1.0;
  EncoderConfig encoder;
  int lexical_dim = 1 << 16;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("classifier: epochs must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("classifier: lr must be positive");
    if (backend != "encoder" && backend != "lexical")
      throw std::invalid_argument("classifier: unknown backend '" + backend + "'");
    if (optimizer != "adam")
      throw std::invalid_argument("classifier: unknown optimizer '" + optimizer + "'");
    fractions.validate();
  }
};

struct AccuracyReport {
  double train = 0.0;
  double val = 0.0;   // 0 when the split is empty
  double test = 0.0;
};

struct ClassifierOutcome {
  std::shared_ptr<Scorer> model;
  std::shared_ptr<EncoderClassifier> encoder;  // set for the encoder backend
  std::shared_ptr<LexicalClassifier> lexical;  // set for the lexical backend
  std::string encoder_id;
  std::vector<double> epoch_losses;
  AccuracyReport accuracy;
  bool aborted = false;
  std::string abort_reason;
};

inline double split_accuracy(const Scorer& scorer, const std::vector<LabeledQuestion>& split) {
  if (split.empty()) return 0.0;
  size_t correct = 0;
  for (const auto& q : split) {
    bool predicted = scorer.accepts(q.text);
    if (predicted == (q.label == EngageLabel::engaging)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

namespace detail {

inline void require_both_labels(const std::vector<LabeledQuestion>& train) {
  bool pos = false, neg = false;
  for (const auto& q : train) {
    if (q.label == EngageLabel::engaging) pos = true;
    else neg = true;
  }
  if (!pos || !neg)
    throw std::invalid_argument("train_classifier: train split must contain both labels");
}

inline ClassifierOutcome train_encoder(const SplitCorpus& corpus,
                                       const ClassifierTrainConfig& cfg) {
  std::vector<std::string> texts;
  texts.reserve(corpus.train.size());
  for (const auto& q : corpus.train) texts.push_back(q.text);
  auto tokenizer = nn::Tokenizer::build(texts, cfg.encoder.max_vocab);

  ClassifierOutcome out;
  out.encoder = std::make_shared<EncoderClassifier>(cfg.encoder, tokenizer,
                                                    cfg.seed, cfg.threshold);
  out.model = out.encoder;
  out.encoder_id = std::string(EncoderClassifier::kEncoderId);

  auto& params = out.encoder->params();
  nn::Adam opt(cfg.lr);
  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<nn::Matrix> snap;
    for (auto* p : params.all()) snap.push_back(p->value);
    std::vector<size_t> order(corpus.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng_shuffle(order_rng, order);

    double epoch_loss = 0.0;
    for (size_t at = 0; at < order.size();) {
      size_t batch_n = std::min<size_t>(cfg.batch_size, order.size() - at);
      for (size_t b = 0; b < batch_n; ++b, ++at) {
        const LabeledQuestion& q = corpus.train[order[at]];
        nn::Graph g;
        nn::Var logits = out.encoder->forward(g, out.encoder->encode_text(trim(q.text)), true);
        nn::Var loss = nn::cross_entropy(g, logits, {static_cast<int>(q.label)});
        double v = loss->value(0, 0);
        if (!std::isfinite(v)) {
          auto all = params.all();
          for (size_t i = 0; i < all.size(); ++i) all[i]->value = snap[i];
          params.zero_grad();
          out.aborted = true;
          out.abort_reason = "non-finite loss at epoch " + std::to_string(epoch + 1);
          out.accuracy = {split_accuracy(*out.model, corpus.train),
                          split_accuracy(*out.model, corpus.val),
                          split_accuracy(*out.model, corpus.test)};
          return out;
        }
        epoch_loss += v;
        g.backward(nn::scale(g, loss, 1.0 / static_cast<double>(batch_n)));
      }
      opt.step(params, cfg.clip_norm);
    }
    out.epoch_losses.push_back(epoch_loss / static_cast<double>(corpus.train.size()));
  }

  out.accuracy = {split_accuracy(*out.model, corpus.train),
                  split_accuracy(*out.model, corpus.val),
                  split_accuracy(*out.model, corpus.test)};
  return out;
}

inline ClassifierOutcome train_lexical(const SplitCorpus& corpus,
                                       const ClassifierTrainConfig& cfg) {
  ClassifierOutcome out;
  out.lexical = std::make_shared<LexicalClassifier>(cfg.lexical_dim, cfg.threshold);
  out.model = out.lexical;
  out.encoder_id = std::string(LexicalClassifier::kEncoderId);

  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(corpus.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng_shuffle(order_rng, order);
    double epoch_loss = 0.0;
    for (size_t i : order) {
      const LabeledQuestion& q = corpus.train[i];
      epoch_loss += out.lexical->sgd_step(trim(q.text),
                                          static_cast<int>(q.label), cfg.lr);
    }
    double mean = epoch_loss / static_cast<double>(corpus.train.size());
    if (!std::isfinite(mean)) {
      out.aborted = true;
      out.abort_reason = "non-finite loss at epoch " + std::to_string(epoch + 1);
      break;
    }
    out.epoch_losses.push_back(mean);
  }

  out.accuracy = {split_accuracy(*out.model, corpus.train),
                  split_accuracy(*out.model, corpus.val),
                  split_accuracy(*out.model, corpus.test)};
  return out;
}

}  // namespace detail

inline ClassifierOutcome train_classifier(const SplitCorpus& corpus,
                                          const ClassifierTrainConfig& cfg) {
  cfg.validate();
  if (corpus.train.empty()) throw std::invalid_argument("train_classifier: empty train split");
  detail::require_both_labels(corpus.train);
  return cfg.backend == "encoder" ? detail::train_encoder(corpus, cfg)
                                  : detail::train_lexical(corpus, cfg);
}

struct FilterResult {
  std::vector<Question> kept;
  std::vector<Question> rejected;
};

// Scores every question and partitions by the threshold; order is preserved
// within each part and each question carries its score out.
inline FilterResult filter(const Scorer& scorer, const std::vector<Question>& questions,
                           double threshold) {
  FilterResult out;
  for (Question q : questions) {
    double s = scorer.score(q.text);
    q.engaging_score = s;
    (s >= threshold ? out.kept : out.rejected).push_back(std::move(q));
  }
  return out;
}

inline FilterResult filter(const Scorer& scorer, const std::vector<Question>& questions) {
  return filter(scorer, questions, scorer.threshold());
}

}  // namespace locavqg::engage
