#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "locavqg/engage/train.hpp"
#include "locavqg/promptgen/llm.hpp"
#include "locavqg/qgen/decode.hpp"
#include "locavqg/qgen/train.hpp"
#include "locavqg/util/fs.hpp"

namespace locavqg::pipeline {

// Everything a run needs, loadable from a JSON config file and overridable
// by CLI flags. API keys are never part of this (environment variables only).
struct PipelineConfig {
  // paths
  std::string manifest_path;
  std::string geocode_cache_path;
  std::string llm_cache_dir;
  std::string dataset_path;
  std::string classifier_dir;
  std::string teacher_dir;
  std::string model_dir;
  std::string out_dir = ".";

  // backend selections
  std::string llm_backend = "stub";        // stub | remote-llm
  std::string captioner_backend = "stub";  // stub | remote-model
  std::string geocoder_backend = "stub";   // stub | remote-geocoder
  std::string classifier_backend = "encoder";  // encoder | lexical

  // hyperparameters
  double temperature = 0.7;
  double presence_penalty = 0.1;
  int llm_questions = 10;
  double threshold = 0.5;
  int classifier_epochs = 10;
  double classifier_lr = 1e-5;
  int qgen_epochs = 20;
  double qgen_lr = 1e-4;
  int questions_per_task = 5;
  double distill_alpha = 0.5;
  double distill_temperature = 2.0;
  bool sequence_level = false;
  std::string tier = "tiny";
  double top_p = 0.9;
  int max_attempts = 10;

  // seeds and ablation flags
  uint64_t seed = 0;
  bool include_address = true;
  bool filter_dataset = true;
  bool filter_inference = true;
  double dataset_fraction = 1.0;

  int workers = 4;

  void validate() const {
    if (dataset_fraction <= 0.0 || dataset_fraction > 1.0)
      throw std::invalid_argument("config: dataset_fraction must be in (0, 1]");
    if (threshold <= 0.0 || threshold >= 1.0)
      throw std::invalid_argument("config: threshold must be in (0, 1)");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (max_attempts < 1) throw std::invalid_argument("config: max_attempts must be >= 1");
  }

  promptgen::LlmConfig llm_config() const {
    promptgen::LlmConfig c;
    c.backend = llm_backend;
    c.temperature = temperature;
    c.presence_penalty = presence_penalty;
    c.max_questions = llm_questions;
    c.seed = seed;
    return c;
  }

  engage::ClassifierTrainConfig classifier_config() const {
    engage::ClassifierTrainConfig c;
    c.epochs = classifier_epochs;
    c.lr = classifier_lr;
    c.seed = seed;
    c.backend = classifier_backend;
    c.threshold = threshold;
    return c;
  }

  qgen::TrainConfig qgen_config() const {
    qgen::TrainConfig c;
    c.epochs = qgen_epochs;
    c.lr = qgen_lr;
    c.seed = seed;
    return c;
  }

  qgen::DistillConfig distill_config() const {
    qgen::DistillConfig c;
    c.alpha = distill_alpha;
    c.temperature = distill_temperature;
    c.train = qgen_config();
    c.sequence_level = sequence_level;
    return c;
  }

  qgen::DecodeConfig decode_config() const {
    qgen::DecodeConfig c;
    c.kind = qgen::DecodeConfig::Kind::nucleus;
    c.top_p = top_p;
    return c;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{
        {"manifest_path", manifest_path},
        {"geocode_cache_path", geocode_cache_path},
        {"llm_cache_dir", llm_cache_dir},
        {"dataset_path", dataset_path},
        {"classifier_dir", classifier_dir},
        {"teacher_dir", teacher_dir},
        {"model_dir", model_dir},
        {"out_dir", out_dir},
        {"llm_backend", llm_backend},
        {"captioner_backend", captioner_backend},
        {"geocoder_backend", geocoder_backend},
        {"classifier_backend", classifier_backend},
        {"temperature", temperature},
        {"presence_penalty", presence_penalty},
        {"llm_questions", llm_questions},
        {"threshold", threshold},
        {"classifier_epochs", classifier_epochs},
        {"classifier_lr", classifier_lr},
        {"qgen_epochs", qgen_epochs},
        {"qgen_lr", qgen_lr},
        {"questions_per_task", questions_per_task},
        {"distill_alpha", distill_alpha},
        {"distill_temperature", distill_temperature},
        {"sequence_level", sequence_level},
        {"tier", tier},
        {"top_p", top_p},
        {"max_attempts", max_attempts},
        {"seed", seed},
        {"include_address", include_address},
        {"filter_dataset", filter_dataset},
        {"filter_inference", filter_inference},
        {"dataset_fraction", dataset_fraction},
        {"workers", workers},
    };
  }

  static PipelineConfig from_json(const nlohmann::json& j) {
    PipelineConfig c;
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("manifest_path", c.manifest_path);
    get("geocode_cache_path", c.geocode_cache_path);
    get("llm_cache_dir", c.llm_cache_dir);
    get("dataset_path", c.dataset_path);
    get("classifier_dir", c.classifier_dir);
    get("teacher_dir", c.teacher_dir);
    get("model_dir", c.model_dir);
    get("out_dir", c.out_dir);
    get("llm_backend", c.llm_backend);
    get("captioner_backend", c.captioner_backend);
    get("geocoder_backend", c.geocoder_backend);
    get("classifier_backend", c.classifier_backend);
    get("temperature", c.temperature);
    get("presence_penalty", c.presence_penalty);
    get("llm_questions", c.llm_questions);
    get("threshold", c.threshold);
    get("classifier_epochs", c.classifier_epochs);
    get("classifier_lr", c.classifier_lr);
    get("qgen_epochs", c.qgen_epochs);
    get("qgen_lr", c.qgen_lr);
    get("questions_per_task", c.questions_per_task);
    get("distill_alpha", c.distill_alpha);
    get("distill_temperature", c.distill_temperature);
    get("sequence_level", c.sequence_level);
    get("tier", c.tier);
    get("top_p", c.top_p);
    get("max_attempts", c.max_attempts);
    get("seed", c.seed);
    get("include_address", c.include_address);
    get("filter_dataset", c.filter_dataset);
    get("filter_inference", c.filter_inference);
    get("dataset_fraction", c.dataset_fraction);
    get("workers", c.workers);
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    return from_json(nlohmann::json::parse(read_file(path)));
  }
};

}  // namespace locavqg::pipeline
