#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "locavqg/core/types.hpp"
#include "locavqg/engage/corpus.hpp"
#include "locavqg/engage/scorer.hpp"
#include "locavqg/nn/params.hpp"
#include "locavqg/nn/tokenizer.hpp"
#include "locavqg/nn/transformer.hpp"
#include "locavqg/util/fs.hpp"

namespace locavqg::engage {

// Transformer encoder trained from scratch: token embeddings + pre-LN
// self-attention blocks + mean pooling + 2-way head. Stands in for the
// paper-scale pretrained encoder at desk scale.
struct EncoderConfig {
  int d_model = 32;
  int n_heads = 2;
  int ffn_dim = 64;
  int layers = 1;
  int max_len = 64;
  size_t max_vocab = 8000;
};

class EncoderClassifier : public Scorer {
 public:
  static constexpr std::string_view kEncoderId = "scratch-transformer-enc-v1";

  EncoderClassifier(EncoderConfig cfg, nn::Tokenizer tokenizer, uint64_t seed,
                    double threshold = 0.5)
      : cfg_(cfg), tokenizer_(std::move(tokenizer)), threshold_(threshold) {
    if (cfg_.d_model % cfg_.n_heads != 0)
      throw std::invalid_argument("encoder: d_model must be divisible by n_heads");
    set_threshold(threshold);
    Rng rng(seed);
    auto V = static_cast<Eigen::Index>(tokenizer_.vocab_size());
    auto D = static_cast<Eigen::Index>(cfg_.d_model);
    auto F = static_cast<Eigen::Index>(cfg_.ffn_dim);
    params_.create("embed.tok", nn::normal_init(rng, V, D, 0.02));
    for (int l = 0; l < cfg_.layers; ++l) {
      std::string p = "enc" + std::to_string(l);
      params_.create(p + ".ln1.g", nn::Matrix::Ones(1, D));
      params_.create(p + ".ln1.b", nn::Matrix::Zero(1, D));
      for (const char* part : {".q", ".k", ".v", ".o"}) {
        params_.create(p + ".self" + part + ".w", nn::xavier_init(rng, D, D));
        params_.create(p + ".self" + part + ".b", nn::Matrix::Zero(1, D));
      }
      params_.create(p + ".ln2.g", nn::Matrix::Ones(1, D));
      params_.create(p + ".ln2.b", nn::Matrix::Zero(1, D));
      params_.create(p + ".ffn1.w", nn::xavier_init(rng, D, F));
      params_.create(p + ".ffn1.b", nn::Matrix::Zero(1, F));
      params_.create(p + ".ffn2.w", nn::xavier_init(rng, F, D));
      params_.create(p + ".ffn2.b", nn::Matrix::Zero(1, D));
    }
    params_.create("lnf.g", nn::Matrix::Ones(1, D));
    params_.create("lnf.b", nn::Matrix::Zero(1, D));
    params_.create("head.w", nn::xavier_init(rng, D, 2));
    params_.create("head.b", nn::Matrix::Zero(1, 2));
    positions_ = nn::sinusoidal_positions(cfg_.max_len, cfg_.d_model);
  }

  double threshold() const override { return threshold_; }

  void set_threshold(double t) {
    if (t <= 0.0 || t >= 1.0)
      throw std::invalid_argument("classifier threshold must be in (0, 1)");
    threshold_ = t;
  }

  std::vector<int> encode_text(const std::string& text) const {
    auto ids = tokenizer_.encode(text);
    if (ids.empty()) ids.push_back(nn::Tokenizer::kUnk);
    if (static_cast<int>(ids.size()) > cfg_.max_len) ids.resize(cfg_.max_len);
    return ids;
  }

  // Logits (1 x 2): column 1 is the engaging class.
  nn::Var forward(nn::Graph& g, const std::vector<int>& ids, bool train) {
    auto wrap = [&](const std::string& name) -> nn::Var {
      nn::Parameter& p = params_.at(name);
      return train ? g.param(p) : g.constant(p.value);
    };
    nn::Var x = nn::embedding_rows(g, wrap("embed.tok"), ids);
    x = nn::scale(g, x, std::sqrt(static_cast<double>(cfg_.d_model)));
    x = nn::add(g, x, g.constant(positions_.topRows(static_cast<Eigen::Index>(ids.size()))));
    int dh = cfg_.d_model / cfg_.n_heads;
    for (int l = 0; l < cfg_.layers; ++l) {
      std::string p = "enc" + std::to_string(l);
      nn::Var n1 = nn::layer_norm_rows(g, x, wrap(p + ".ln1.g"), wrap(p + ".ln1.b"));
      nn::Var q = nn::add_rowvec(g, nn::matmul(g, n1, wrap(p + ".self.q.w")), wrap(p + ".self.q.b"));
      nn::Var k = nn::add_rowvec(g, nn::matmul(g, n1, wrap(p + ".self.k.w")), wrap(p + ".self.k.b"));
      nn::Var v = nn::add_rowvec(g, nn::matmul(g, n1, wrap(p + ".self.v.w")), wrap(p + ".self.v.b"));
      std::vector<nn::Var> heads;
      for (int h = 0; h < cfg_.n_heads; ++h) {
        nn::Var qh = nn::slice_cols(g, q, h * dh, dh);
        nn::Var kh = nn::slice_cols(g, k, h * dh, dh);
        nn::Var vh = nn::slice_cols(g, v, h * dh, dh);
        nn::Var scores = nn::scale(g, nn::matmul_nt(g, qh, kh), 1.0 / std::sqrt(double(dh)));
        heads.push_back(nn::matmul(g, nn::softmax_rows(g, scores), vh));
      }
      nn::Var att = nn::add_rowvec(g, nn::matmul(g, nn::concat_cols(g, heads), wrap(p + ".self.o.w")),
                                   wrap(p + ".self.o.b"));
      x = nn::add(g, x, att);
      nn::Var n2 = nn::layer_norm_rows(g, x, wrap(p + ".ln2.g"), wrap(p + ".ln2.b"));
      nn::Var h1 = nn::relu(g, nn::add_rowvec(g, nn::matmul(g, n2, wrap(p + ".ffn1.w")), wrap(p + ".ffn1.b")));
      nn::Var h2 = nn::add_rowvec(g, nn::matmul(g, h1, wrap(p + ".ffn2.w")), wrap(p + ".ffn2.b"));
      x = nn::add(g, x, h2);
    }
    x = nn::layer_norm_rows(g, x, wrap("lnf.g"), wrap("lnf.b"));
    x = nn::mean_rows(g, x);
    return nn::add_rowvec(g, nn::matmul(g, x, wrap("head.w")), wrap("head.b"));
  }

  nn::ParamStore& params() { return params_; }
  const nn::Tokenizer& tokenizer() const { return tokenizer_; }
  const EncoderConfig& config() const { return cfg_; }

 protected:
  double score_clean(const std::string& question) const override {
    auto* self = const_cast<EncoderClassifier*>(this);
    nn::Graph g;
    nn::Matrix logits = self->forward(g, encode_text(question), /*train=*/false)->value;
    nn::Matrix p = nn::softmax_rows_value(logits);
    return p(0, 1);
  }

 private:
  EncoderConfig cfg_;
  nn::Tokenizer tokenizer_;
  nn::ParamStore params_;
  nn::Matrix positions_;
  double threshold_;
};

// Logistic regression over signed-hashed token uni/bigrams. Non-paper
// fallback for environments without the encoder; flagged by its id.
class LexicalClassifier : public Scorer {
 public:
  static constexpr std::string_view kEncoderId = "lexical-ngram-v1";

  explicit LexicalClassifier(int dim = 1 << 16, double threshold = 0.5)
      : dim_(dim), weights_(Eigen::VectorXd::Zero(dim)), bias_(0.0) {
    if (dim < 2) throw std::invalid_argument("lexical classifier: dim must be >= 2");
    set_threshold(threshold);
  }

  double threshold() const override { return threshold_; }

  void set_threshold(double t) {
    if (t <= 0.0 || t >= 1.0)
      throw std::invalid_argument("classifier threshold must be in (0, 1)");
    threshold_ = t;
  }

  // Sparse feature list: (index, +1/-1) per unigram and bigram occurrence.
  std::vector<std::pair<int, double>> features(const std::string& text) const {
    std::vector<std::pair<int, double>> out;
    auto words = nn::Tokenizer::words(to_lower(text));
    auto push = [&](const std::string& gram) {
      uint64_t h = fnv1a(gram);
      out.emplace_back(static_cast<int>(h % static_cast<uint64_t>(dim_)),
                       (h >> 63) ? 1.0 : -1.0);
    };
    for (size_t i = 0; i < words.size(); ++i) {
      push(words[i]);
      if (i + 1 < words.size()) push(words[i] + "\x1f" + words[i + 1]);
    }
    return out;
  }

  double raw_score(const std::string& text) const {
    double z = bias_;
    for (const auto& [idx, val] : features(text)) z += weights_(idx) * val;
    return 1.0 / (1.0 + std::exp(-z));
  }

  // One SGD pass over (text, label); returns the example's log loss.
  double sgd_step(const std::string& text, int label, double lr) {
    auto feats = features(text);
    double z = bias_;
    for (const auto& [idx, val] : feats) z += weights_(idx) * val;
    double p = 1.0 / (1.0 + std::exp(-z));
    double g = p - static_cast<double>(label);
    for (const auto& [idx, val] : feats) weights_(idx) -= lr * g * val;
    bias_ -= lr * g;
    double safe = label == 1 ? std::max(p, 1e-12) : std::max(1.0 - p, 1e-12);
    return -std::log(safe);
  }

  Eigen::VectorXd& weights() { return weights_; }
  double& bias() { return bias_; }
  int dim() const { return dim_; }

 protected:
  double score_clean(const std::string& question) const override {
    return raw_score(question);
  }

 private:
  int dim_;
  Eigen::VectorXd weights_;
  double bias_;
  double threshold_;
};

}  // namespace locavqg::engage
