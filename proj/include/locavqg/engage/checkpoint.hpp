#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "locavqg/engage/classifier.hpp"
#include "locavqg/util/fs.hpp"

namespace locavqg::engage {

struct LoadedClassifier {
  std::shared_ptr<Scorer> model;
  std::shared_ptr<EncoderClassifier> encoder;
  std::shared_ptr<LexicalClassifier> lexical;
  std::string encoder_id;
};

inline void save_classifier(const std::string& dir, EncoderClassifier& model,
                            const nlohmann::json& manifest = {}) {
  const auto& c = model.config();
  nlohmann::json config{
      {"backend", "encoder"},
      {"encoder_id", std::string(EncoderClassifier::kEncoderId)},
      {"threshold", model.threshold()},
      {"d_model", c.d_model},
      {"n_heads", c.n_heads},
      {"ffn_dim", c.ffn_dim},
      {"layers", c.layers},
      {"max_len", c.max_len},
      {"max_vocab", c.max_vocab},
      {"tokenizer_fingerprint", model.tokenizer().fingerprint()},
  };
  if (!manifest.is_null() && !manifest.empty()) config["run"] = manifest;
  write_file(dir + "/config.json", config.dump(2) + "\n");
  write_file(dir + "/tokenizer.txt", model.tokenizer().serialize());
  model.params().save(dir + "/weights.bin");
}

inline void save_classifier(const std::string& dir, LexicalClassifier& model,
                            const nlohmann::json& manifest = {}) {
  nlohmann::json config{
      {"backend", "lexical"},
      {"encoder_id", std::string(LexicalClassifier::kEncoderId)},
      {"threshold", model.threshold()},
      {"dim", model.dim()},
  };
  if (!manifest.is_null() && !manifest.empty()) config["run"] = manifest;
  write_file(dir + "/config.json", config.dump(2) + "\n");
  nn::ParamStore store;
  nn::Matrix w = model.weights();
  store.create("w", std::move(w));
  store.create("b", nn::Matrix::Constant(1, 1, model.bias()));
  store.save(dir + "/weights.bin");
}

inline LoadedClassifier load_classifier(const std::string& dir) {
  auto config = nlohmann::json::parse(read_file(dir + "/config.json"));
  std::string backend = config.at("backend").get<std::string>();
  LoadedClassifier out;
  out.encoder_id = config.at("encoder_id").get<std::string>();
  double threshold = config.at("threshold").get<double>();

  if (backend == "encoder") {
    EncoderConfig c;
    c.d_model = config.at("d_model").get<int>();
    c.n_heads = config.at("n_heads").get<int>();
    c.ffn_dim = config.at("ffn_dim").get<int>();
    c.layers = config.at("layers").get<int>();
    c.max_len = config.at("max_len").get<int>();
    c.max_vocab = config.at("max_vocab").get<size_t>();
    auto tokenizer = nn::Tokenizer::deserialize(read_file(dir + "/tokenizer.txt"));
    if (config.at("tokenizer_fingerprint").get<std::string>() != tokenizer.fingerprint())
      throw std::runtime_error("load_classifier: tokenizer does not match config");
    out.encoder = std::make_shared<EncoderClassifier>(c, std::move(tokenizer), 0, threshold);
    out.encoder->params().load(dir + "/weights.bin");
    out.model = out.encoder;
  } else if (backend == "lexical") {
    int dim = config.at("dim").get<int>();
    out.lexical = std::make_shared<LexicalClassifier>(dim, threshold);
    nn::ParamStore store;
    store.create("w", nn::Matrix::Zero(dim, 1));
    store.create("b", nn::Matrix::Zero(1, 1));
    store.load(dir + "/weights.bin");
    out.lexical->weights() = store.at("w").value.col(0);
    out.lexical->bias() = store.at("b").value(0, 0);
    out.model = out.lexical;
  } else {
    throw std::runtime_error("load_classifier: unknown backend '" + backend + "'");
  }
  return out;
}

}  // namespace locavqg::engage
