#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/nn/graph.hpp"
#include "locavqg/nn/params.hpp"

namespace locavqg::nn {

struct TransformerConfig {
  int vocab_size = 0;
  int d_model = 32;
  int n_heads = 2;
  int ffn_dim = 64;
  int enc_layers = 2;
  int dec_layers = 2;
  int max_len = 64;

  bool operator==(const TransformerConfig&) const = default;
};

inline Matrix sinusoidal_positions(int len, int d_model) {
  Matrix pe(len, d_model);
  for (int pos = 0; pos < len; ++pos)
    for (int i = 0; i < d_model; ++i) {
      double angle = pos / std::pow(10000.0, 2.0 * (i / 2) / d_model);
      pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

// Pre-LN encoder-decoder transformer with a shared token embedding for both
// sides and an untied output projection. No dropout: training is fully
// deterministic given the seed.
class Seq2SeqTransformer {
 public:
  Seq2SeqTransformer(TransformerConfig cfg, uint64_t seed) : cfg_(cfg) {
    if (cfg_.vocab_size <= 0) throw std::invalid_argument("vocab_size must be > 0");
    if (cfg_.d_model % cfg_.n_heads != 0)
      throw std::invalid_argument("d_model must be divisible by n_heads");
    Rng rng(seed);
    auto linear = [&](const std::string& name, int in, int out) {
      params_.create(name + ".w", xavier_init(rng, in, out));
      params_.create(name + ".b", Matrix::Zero(1, out));
    };
    auto norm = [&](const std::string& name) {
      params_.create(name + ".g", Matrix::Ones(1, cfg_.d_model));
      params_.create(name + ".b", Matrix::Zero(1, cfg_.d_model));
    };
    auto attn = [&](const std::string& name) {
      linear(name + ".q", cfg_.d_model, cfg_.d_model);
      linear(name + ".k", cfg_.d_model, cfg_.d_model);
      linear(name + ".v", cfg_.d_model, cfg_.d_model);
      linear(name + ".o", cfg_.d_model, cfg_.d_model);
    };
    params_.create("embed.tok", normal_init(rng, cfg_.vocab_size, cfg_.d_model, 0.02));
    for (int l = 0; l < cfg_.enc_layers; ++l) {
      std::string p = "enc" + std::to_string(l);
      norm(p + ".ln1");
      attn(p + ".self");
      norm(p + ".ln2");
      linear(p + ".ffn1", cfg_.d_model, cfg_.ffn_dim);
      linear(p + ".ffn2", cfg_.ffn_dim, cfg_.d_model);
    }
    norm("enc.lnf");
    for (int l = 0; l < cfg_.dec_layers; ++l) {
      std::string p = "dec" + std::to_string(l);
      norm(p + ".ln1");
      attn(p + ".self");
      norm(p + ".ln2");
      attn(p + ".cross");
      norm(p + ".ln3");
      linear(p + ".ffn1", cfg_.d_model, cfg_.ffn_dim);
      linear(p + ".ffn2", cfg_.ffn_dim, cfg_.d_model);
    }
    norm("dec.lnf");
    linear("out", cfg_.d_model, cfg_.vocab_size);
    positions_ = sinusoidal_positions(cfg_.max_len, cfg_.d_model);
  }

  const TransformerConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Teacher-forced forward pass: returns decoder logits (dec_len x vocab).
  // With train=false, parameters enter the graph as constants so no gradient
  // work is done.
  Var forward(Graph& g, const std::vector<int>& src_ids,
              const std::vector<int>& dec_in_ids, bool train) {
    check_ids(src_ids);
    check_ids(dec_in_ids);
    auto wrap = [&](const std::string& name) -> Var {
      Parameter& p = params_.at(name);
      return train ? g.param(p) : g.constant(p.value);
    };
    Var memory = encode(g, src_ids, wrap);
    return decode(g, memory, dec_in_ids, wrap);
  }

  // Convenience no-grad forward; used for teacher logits and decoding.
  Matrix forward_logits(const std::vector<int>& src_ids,
                        const std::vector<int>& dec_in_ids) {
    Graph g;
    return forward(g, src_ids, dec_in_ids, /*train=*/false)->value;
  }

 private:
  template <typename Wrap>
  Var embed(Graph& g, const std::vector<int>& ids, Wrap& wrap) {
    Var tok = wrap("embed.tok");
    Var x = embedding_rows(g, tok, ids);
    x = scale(g, x, std::sqrt(static_cast<double>(cfg_.d_model)));
    Matrix pe = positions_.topRows(static_cast<Eigen::Index>(ids.size()));
    return add(g, x, g.constant(pe));
  }

  template <typename Wrap>
  Var attention(Graph& g, const std::string& prefix, const Var& q_in,
                const Var& kv_in, const Matrix* mask, Wrap& wrap) {
    int dh = cfg_.d_model / cfg_.n_heads;
    Var q = add_rowvec(g, matmul(g, q_in, wrap(prefix + ".q.w")), wrap(prefix + ".q.b"));
    Var k = add_rowvec(g, matmul(g, kv_in, wrap(prefix + ".k.w")), wrap(prefix + ".k.b"));
    Var v = add_rowvec(g, matmul(g, kv_in, wrap(prefix + ".v.w")), wrap(prefix + ".v.b"));
    std::vector<Var> heads;
    heads.reserve(cfg_.n_heads);
    for (int h = 0; h < cfg_.n_heads; ++h) {
      Var qh = slice_cols(g, q, h * dh, dh);
      Var kh = slice_cols(g, k, h * dh, dh);
      Var vh = slice_cols(g, v, h * dh, dh);
      Var scores = scale(g, matmul_nt(g, qh, kh), 1.0 / std::sqrt(double(dh)));
      if (mask) scores = add(g, scores, g.constant(*mask));
      Var weights = softmax_rows(g, scores);
      heads.push_back(matmul(g, weights, vh));
    }
    Var cat = concat_cols(g, heads);
    return add_rowvec(g, matmul(g, cat, wrap(prefix + ".o.w")), wrap(prefix + ".o.b"));
  }

  template <typename Wrap>
  Var ffn(Graph& g, const std::string& prefix, const Var& x, Wrap& wrap) {
    Var h = add_rowvec(g, matmul(g, x, wrap(prefix + ".ffn1.w")), wrap(prefix + ".ffn1.b"));
    h = relu(g, h);
    return add_rowvec(g, matmul(g, h, wrap(prefix + ".ffn2.w")), wrap(prefix + ".ffn2.b"));
  }

  template <typename Wrap>
  Var encode(Graph& g, const std::vector<int>& src_ids, Wrap& wrap) {
    Var x = embed(g, src_ids, wrap);
    for (int l = 0; l < cfg_.enc_layers; ++l) {
      std::string p = "enc" + std::to_string(l);
      Var n1 = layer_norm_rows(g, x, wrap(p + ".ln1.g"), wrap(p + ".ln1.b"));
      x = add(g, x, attention(g, p + ".self", n1, n1, nullptr, wrap));
      Var n2 = layer_norm_rows(g, x, wrap(p + ".ln2.g"), wrap(p + ".ln2.b"));
      x = add(g, x, ffn(g, p, n2, wrap));
    }
    return layer_norm_rows(g, x, wrap("enc.lnf.g"), wrap("enc.lnf.b"));
  }

  template <typename Wrap>
  Var decode(Graph& g, const Var& memory, const std::vector<int>& dec_in_ids,
             Wrap& wrap) {
    auto len = static_cast<Eigen::Index>(dec_in_ids.size());
    Matrix causal = Matrix::Zero(len, len);
    for (Eigen::Index r = 0; r < len; ++r)
      for (Eigen::Index c = r + 1; c < len; ++c) causal(r, c) = -1e9;
    Var x = embed(g, dec_in_ids, wrap);
    for (int l = 0; l < cfg_.dec_layers; ++l) {
      std::string p = "dec" + std::to_string(l);
      Var n1 = layer_norm_rows(g, x, wrap(p + ".ln1.g"), wrap(p + ".ln1.b"));
      x = add(g, x, attention(g, p + ".self", n1, n1, &causal, wrap));
      Var n2 = layer_norm_rows(g, x, wrap(p + ".ln2.g"), wrap(p + ".ln2.b"));
      x = add(g, x, attention(g, p + ".cross", n2, memory, nullptr, wrap));
      Var n3 = layer_norm_rows(g, x, wrap(p + ".ln3.g"), wrap(p + ".ln3.b"));
      x = add(g, x, ffn(g, p, n3, wrap));
    }
    x = layer_norm_rows(g, x, wrap("dec.lnf.g"), wrap("dec.lnf.b"));
    return add_rowvec(g, matmul(g, x, wrap("out.w")), wrap("out.b"));
  }

  void check_ids(const std::vector<int>& ids) const {
    if (ids.empty()) throw std::invalid_argument("transformer: empty id sequence");
    if (static_cast<int>(ids.size()) > cfg_.max_len)
      throw std::invalid_argument("transformer: sequence longer than max_len");
    for (int id : ids)
      if (id < 0 || id >= cfg_.vocab_size)
        throw std::invalid_argument("transformer: token id out of range");
  }

  TransformerConfig cfg_;
  ParamStore params_;
  Matrix positions_;
};

}  // namespace locavqg::nn
