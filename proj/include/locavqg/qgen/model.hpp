#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "locavqg/nn/params.hpp"
#include "locavqg/nn/tokenizer.hpp"
#include "locavqg/nn/transformer.hpp"
#include "locavqg/util/fs.hpp"

namespace locavqg::qgen {

// Capacity tiers are presets over the same architecture; "tiny" is the
// distillation student of interest and "base"/"large" give progressively
// roomier teachers.
inline nn::TransformerConfig tier_config(const std::string& tier, int vocab_size,
                                         int max_len = 64) {
  nn::TransformerConfig c;
  c.vocab_size = vocab_size;
  c.max_len = max_len;
  if (tier == "tiny") {
    c.d_model = 32; c.n_heads = 2; c.ffn_dim = 64; c.enc_layers = 2; c.dec_layers = 2;
  } else if (tier == "base") {
    c.d_model = 64; c.n_heads = 4; c.ffn_dim = 128; c.enc_layers = 3; c.dec_layers = 3;
  } else if (tier == "large") {
    c.d_model = 96; c.n_heads = 4; c.ffn_dim = 192; c.enc_layers = 4; c.dec_layers = 4;
  } else {
    throw std::invalid_argument("tier_config: unknown tier '" + tier + "'");
  }
  return c;
}

struct QGModel {
  std::string tier;  // "tiny", "base", "large", or "custom"
  nn::Tokenizer tokenizer;
  std::shared_ptr<nn::Seq2SeqTransformer> net;

  int vocab_size() const { return tokenizer.vocab_size(); }
};

inline QGModel make_model(const std::string& tier, nn::Tokenizer tokenizer,
                          uint64_t seed, int max_len = 64) {
  QGModel m;
  m.tier = tier;
  m.tokenizer = std::move(tokenizer);
  auto config = tier_config(tier, m.tokenizer.vocab_size(), max_len);
  m.net = std::make_shared<nn::Seq2SeqTransformer>(config, seed);
  return m;
}

inline QGModel make_model(nn::TransformerConfig config, nn::Tokenizer tokenizer,
                          uint64_t seed) {
  if (config.vocab_size != tokenizer.vocab_size())
    throw std::invalid_argument("make_model: config vocab does not match tokenizer");
  QGModel m;
  m.tier = "custom";
  m.tokenizer = std::move(tokenizer);
  m.net = std::make_shared<nn::Seq2SeqTransformer>(config, seed);
  return m;
}

// Checkpoint layout: config.json + tokenizer.txt + weights.bin under one
// directory. `manifest` carries run provenance (seeds, training config) and
// is stored verbatim.
inline void save_model(const std::string& dir, const QGModel& model,
                       const nlohmann::json& manifest = {}) {
  const auto& c = model.net->config();
  nlohmann::json config{
      {"tier", model.tier},
      {"vocab_size", c.vocab_size},
      {"d_model", c.d_model},
      {"n_heads", c.n_heads},
      {"ffn_dim", c.ffn_dim},
      {"enc_layers", c.enc_layers},
      {"dec_layers", c.dec_layers},
      {"max_len", c.max_len},
      {"tokenizer_fingerprint", model.tokenizer.fingerprint()},
  };
  if (!manifest.is_null() && !manifest.empty()) config["run"] = manifest;
  write_file(dir + "/config.json", config.dump(2) + "\n");
  write_file(dir + "/tokenizer.txt", model.tokenizer.serialize());
  model.net->params().save(dir + "/weights.bin");
}

inline QGModel load_model(const std::string& dir) {
  auto config = nlohmann::json::parse(read_file(dir + "/config.json"));
  QGModel m;
  m.tier = config.at("tier").get<std::string>();
  m.tokenizer = nn::Tokenizer::deserialize(read_file(dir + "/tokenizer.txt"));
  if (config.at("tokenizer_fingerprint").get<std::string>() != m.tokenizer.fingerprint())
    throw std::runtime_error("load_model: tokenizer does not match checkpoint config");
  nn::TransformerConfig c;
  c.vocab_size = config.at("vocab_size").get<int>();
  c.d_model = config.at("d_model").get<int>();
  c.n_heads = config.at("n_heads").get<int>();
  c.ffn_dim = config.at("ffn_dim").get<int>();
  c.enc_layers = config.at("enc_layers").get<int>();
  c.dec_layers = config.at("dec_layers").get<int>();
  c.max_len = config.at("max_len").get<int>();
  if (c.vocab_size != m.tokenizer.vocab_size())
    throw std::runtime_error("load_model: vocab size mismatch");
  m.net = std::make_shared<nn::Seq2SeqTransformer>(c, 0);
  m.net->params().load(dir + "/weights.bin");
  return m;
}

}  // namespace locavqg::qgen
