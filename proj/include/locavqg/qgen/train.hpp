#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/nn/params.hpp"
#include "locavqg/qgen/decode.hpp"
#include "locavqg/qgen/examples.hpp"
#include "locavqg/qgen/loss.hpp"
#include "locavqg/qgen/model.hpp"
#include "locavqg/util/rng.hpp"

namespace locavqg::qgen {

struct EncodedExample {
  std::vector<int> src;
  std::vector<int> dec_in;   // <bos> t1 .. tn
  std::vector<int> targets;  // t1 .. tn <eos>
};

// Truncates to the model window; target keeps room for <bos>/<eos>.
inline EncodedExample encode_example(const nn::Tokenizer& tk, const QGExample& ex,
                                     int max_len) {
  EncodedExample enc;
  enc.src = tk.encode(ex.input_text);
  if (enc.src.empty()) enc.src.push_back(nn::Tokenizer::kUnk);
  if (static_cast<int>(enc.src.size()) > max_len) enc.src.resize(max_len);

  std::vector<int> tgt = tk.encode(ex.target_text);
  if (static_cast<int>(tgt.size()) > max_len - 1) tgt.resize(max_len - 1);
  enc.dec_in.push_back(nn::Tokenizer::kBos);
  enc.dec_in.insert(enc.dec_in.end(), tgt.begin(), tgt.end());
  enc.targets = tgt;
  enc.targets.push_back(nn::Tokenizer::kEos);
  return enc;
}

struct TrainConfig {
  int epochs = 20;
  double lr = 1e-4;
  int batch_size = 8;
  double clip_norm = 1.0;
  uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_losses;  // mean per-example loss
  bool aborted = false;
  std::string abort_reason;
};

struct DistillConfig {
  double alpha = 0.5;
  double temperature = 2.0;
  TrainConfig train;
  // Sequence-level arm: the teacher's own greedy outputs join the pool as
  // extra hard targets.
  bool sequence_level = false;
};

namespace detail {

inline std::vector<Matrix> snapshot(nn::ParamStore& params) {
  std::vector<Matrix> out;
  for (auto* p : params.all()) out.push_back(p->value);
  return out;
}

inline void restore(nn::ParamStore& params, const std::vector<Matrix>& snap) {
  auto all = params.all();
  for (size_t i = 0; i < all.size(); ++i) all[i]->value = snap[i];
}

// Shared epoch loop. `example_loss` builds the scalar loss node for one
// example inside the given graph. A non-finite loss aborts training and
// rolls the parameters back to the last completed epoch.
template <typename LossFn>
TrainReport run_epochs(QGModel& model, const std::vector<EncodedExample>& encoded,
                       const TrainConfig& cfg, LossFn&& example_loss) {
  if (encoded.empty()) throw std::invalid_argument("train: no examples");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

  nn::Adam opt(cfg.lr);
  Rng order_rng(cfg.seed);
  TrainReport report;
  auto& params = model.net->params();
  params.zero_grad();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto snap = snapshot(params);
    std::vector<size_t> order(encoded.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng_shuffle(order_rng, order);

    double epoch_loss = 0.0;
    for (size_t at = 0; at < order.size();) {
      size_t batch_n = std::min<size_t>(cfg.batch_size, order.size() - at);
      double batch_loss = 0.0;
      for (size_t b = 0; b < batch_n; ++b, ++at) {
        const EncodedExample& ex = encoded[order[at]];
        nn::Graph g;
        nn::Var loss = example_loss(g, ex);
        double v = loss->value(0, 0);
        if (!std::isfinite(v)) {
          restore(params, snap);
          params.zero_grad();
          report.aborted = true;
          report.abort_reason = "non-finite loss at epoch " + std::to_string(epoch + 1) +
                                "; restored previous epoch weights";
          return report;
        }
        batch_loss += v;
        nn::Var scaled = nn::scale(g, loss, 1.0 / static_cast<double>(batch_n));
        g.backward(scaled);
      }
      opt.step(params, cfg.clip_norm);
      epoch_loss += batch_loss;
    }
    report.epoch_losses.push_back(epoch_loss / static_cast<double>(encoded.size()));
  }
  return report;
}

}  // namespace detail

// Mean per-example hard cross-entropy on held-out data, no gradients.
inline double eval_loss(QGModel& model, const std::vector<QGExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("eval_loss: no examples");
  double total = 0.0;
  for (const auto& ex : examples) {
    EncodedExample enc = encode_example(model.tokenizer, ex, model.net->config().max_len);
    nn::Graph g;
    nn::Var logits = model.net->forward(g, enc.src, enc.dec_in, /*train=*/false);
    total += nn::cross_entropy(g, logits, enc.targets)->value(0, 0);
  }
  return total / static_cast<double>(examples.size());
}

// Plain teacher-forced finetuning with hard cross-entropy.
inline TrainReport finetune(QGModel& model, const std::vector<QGExample>& examples,
                            const TrainConfig& cfg) {
  std::vector<EncodedExample> encoded;
  encoded.reserve(examples.size());
  for (const auto& ex : examples)
    encoded.push_back(encode_example(model.tokenizer, ex, model.net->config().max_len));
  return detail::run_epochs(model, encoded, cfg, [&](nn::Graph& g, const EncodedExample& ex) {
    nn::Var logits = model.net->forward(g, ex.src, ex.dec_in, /*train=*/true);
    return nn::cross_entropy(g, logits, ex.targets);
  });
}

// Logit-level distillation: the student matches the teacher's softened
// distribution at every teacher-forced position while still seeing the hard
// targets. With alpha = 1 this reduces exactly to finetune().
inline TrainReport distill(QGModel& teacher, QGModel& student,
                           const std::vector<QGExample>& examples,
                           const DistillConfig& cfg) {
  if (teacher.tokenizer.fingerprint() != student.tokenizer.fingerprint())
    throw std::invalid_argument("distill: teacher and student tokenizers differ");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw std::invalid_argument("distill: alpha must be in [0, 1]");
  if (!(cfg.temperature > 0.0))
    throw std::invalid_argument("distill: temperature must be positive");

  int max_len = std::min(teacher.net->config().max_len, student.net->config().max_len);
  std::vector<QGExample> pool = examples;
  if (cfg.sequence_level) {
    auto extra = teacher_outputs(teacher, examples, cfg.train.seed);
    pool.insert(pool.end(), extra.begin(), extra.end());
  }
  std::vector<EncodedExample> encoded;
  encoded.reserve(pool.size());
  for (const auto& ex : pool)
    encoded.push_back(encode_example(student.tokenizer, ex, max_len));

  return detail::run_epochs(student, encoded, cfg.train,
                            [&](nn::Graph& g, const EncodedExample& ex) {
    nn::Var logits = student.net->forward(g, ex.src, ex.dec_in, /*train=*/true);
    if (cfg.alpha >= 1.0) return nn::cross_entropy(g, logits, ex.targets);
    Matrix teacher_logits = teacher.net->forward_logits(ex.src, ex.dec_in);
    return distillation_loss_node(g, logits, teacher_logits, ex.targets,
                                  cfg.alpha, cfg.temperature);
  });
}

}  // namespace locavqg::qgen
