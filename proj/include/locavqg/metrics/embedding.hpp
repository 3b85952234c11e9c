#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locavqg/metrics/tokenize.hpp"
#include "locavqg/util/rng.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::metrics {

// Whole-sentence embedding backend.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual std::string id() const = 0;
  virtual Eigen::VectorXd embed(const std::string& text) = 0;
};

// Per-token embedding backend (BERTScore-style greedy matching).
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual std::string id() const = 0;
  virtual Eigen::MatrixXd embed_tokens(const std::vector<std::string>& tokens) = 0;
};

// Deterministic offline embedder: each distinct token maps to a pseudo-random
// unit vector seeded by its hash, so distinct tokens are near-orthogonal.
// Not a paper checkpoint; the id makes that visible in every report.
class HashedTokenEmbedder : public TokenEmbedder {
 public:
  explicit HashedTokenEmbedder(int dim = 64) : dim_(dim) {}

  std::string id() const override { return "hashed-token-v1/d" + std::to_string(dim_); }

  Eigen::VectorXd token_vector(const std::string& token) const {
    Rng rng(fnv1a(token));
    Eigen::VectorXd v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = rng_normal(rng);
    double norm = v.norm();
    if (norm > 0) v /= norm;
    return v;
  }

  Eigen::MatrixXd embed_tokens(const std::vector<std::string>& tokens) override {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(tokens.size()), dim_);
    for (size_t i = 0; i < tokens.size(); ++i)
      m.row(static_cast<Eigen::Index>(i)) = token_vector(tokens[i]).transpose();
    return m;
  }

 private:
  int dim_;
};

// Hashed bag-of-words sentence encoder, L2-normalized.
class HashedBowEncoder : public SentenceEncoder {
 public:
  explicit HashedBowEncoder(int dim = 256) : dim_(dim) {}

  std::string id() const override { return "hashed-bow-v1/d" + std::to_string(dim_); }

  Eigen::VectorXd embed(const std::string& text) override {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    for (const auto& token : tokenize(text)) {
      uint64_t h = fnv1a(token);
      int idx = static_cast<int>(h % static_cast<uint64_t>(dim_));
      double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
      v(idx) += sign;
    }
    double norm = v.norm();
    if (norm > 0) v /= norm;
    return v;
  }

 private:
  int dim_;
};

inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

enum class EmbeddingBackendKind { bertscore, bleurt };

inline std::string_view embedding_backend_name(EmbeddingBackendKind k) {
  return k == EmbeddingBackendKind::bertscore ? "bertscore" : "bleurt";
}

struct EmbeddingScore {
  bool available = false;
  double value = 0.0;
  std::string backend;       // "bertscore" | "bleurt"
  std::string checkpoint;    // embedder/checkpoint id the value came from
  std::string note;          // set when unavailable
};

namespace detail {

// Greedy-matching F1 between two token embedding matrices (rows = tokens).
inline double greedy_match_f1(const Eigen::MatrixXd& cand, const Eigen::MatrixXd& ref) {
  if (cand.rows() == 0 || ref.rows() == 0) return 0.0;
  Eigen::MatrixXd sim = cand * ref.transpose();  // rows are unit vectors
  double precision = sim.rowwise().maxCoeff().mean();
  double recall = sim.colwise().maxCoeff().mean();
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

// Registry of available embedding backends. BLEURT is a learned regression
// model with no offline scorer here, so it stays unavailable unless a future
// adapter supplies one.
struct EmbeddingBackends {
  std::shared_ptr<TokenEmbedder> bertscore_embedder;  // null = unavailable

  static EmbeddingBackends offline_stub() {
    EmbeddingBackends b;
    b.bertscore_embedder = std::make_shared<HashedTokenEmbedder>();
    return b;
  }
  static EmbeddingBackends none() { return EmbeddingBackends{}; }
};

// Best score across references; reported with the checkpoint id. A missing
// checkpoint yields an explicit unavailable marker, never a silent zero.
inline EmbeddingScore embedding_score(const std::string& candidate,
                                      const std::vector<std::string>& references,
                                      EmbeddingBackendKind backend,
                                      const EmbeddingBackends& backends) {
  EmbeddingScore out;
  out.backend = std::string(embedding_backend_name(backend));
  if (references.empty()) throw std::invalid_argument("embedding_score: no references");
  if (backend == EmbeddingBackendKind::bleurt) {
    out.note = "no BLEURT checkpoint adapter available";
    return out;
  }
  if (!backends.bertscore_embedder) {
    out.note = "bertscore embedder checkpoint not available";
    return out;
  }
  auto& embedder = *backends.bertscore_embedder;
  auto cand_tokens = tokenize(candidate);
  Eigen::MatrixXd cand = embedder.embed_tokens(cand_tokens);
  double best = -1.0;
  for (const auto& r : references) {
    Eigen::MatrixXd ref = embedder.embed_tokens(tokenize(r));
    best = std::max(best, detail::greedy_match_f1(cand, ref));
  }
  out.available = true;
  out.value = best;
  out.checkpoint = embedder.id();
  return out;
}

struct PairwiseCosine {
  bool available = false;
  double value = 0.0;
  std::string encoder_id;
  size_t sampled = 0;
  std::string note;
};

// Mean cosine similarity over all unordered pairs within a seeded sample.
inline PairwiseCosine pairwise_cosine(const std::vector<std::string>& corpus,
                                      SentenceEncoder* encoder, size_t sample_size,
                                      uint64_t seed) {
  PairwiseCosine out;
  if (!encoder) {
    out.note = "sentence encoder not available";
    return out;
  }
  if (sample_size < 2) throw std::invalid_argument("pairwise_cosine: sample_size < 2");
  Rng rng(seed);
  auto indices = rng_sample_indices(rng, corpus.size(), std::min(sample_size, corpus.size()));
  if (indices.size() < 2) throw std::invalid_argument("pairwise_cosine: corpus too small");
  std::vector<Eigen::VectorXd> embeddings;
  embeddings.reserve(indices.size());
  for (size_t i : indices) embeddings.push_back(encoder->embed(corpus[i]));
  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < embeddings.size(); ++i)
    for (size_t j = i + 1; j < embeddings.size(); ++j) {
      sum += cosine_similarity(embeddings[i], embeddings[j]);
      ++pairs;
    }
  out.available = true;
  out.value = sum / static_cast<double>(pairs);
  out.encoder_id = encoder->id();
  out.sampled = indices.size();
  return out;
}

}  // namespace locavqg::metrics
