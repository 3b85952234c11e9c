#pragma once

#include <memory>
#include <string>
#include <vector>

#include "locavqg/core/serialize.hpp"
#include "locavqg/engage/train.hpp"
#include "locavqg/ingest/pipeline.hpp"
#include "locavqg/metrics/tokenize.hpp"
#include "locavqg/pipeline/config.hpp"
#include "locavqg/promptgen/llm.hpp"
#include "locavqg/promptgen/parse.hpp"

namespace locavqg::pipeline {

struct GenDatasetReport {
  size_t tasks_total = 0;
  size_t tasks_succeeded = 0;
  std::vector<ingest::TaskFailure> failures;
  size_t questions_generated = 0;
  size_t questions_kept = 0;
  size_t questions_rejected = 0;

  nlohmann::json to_json() const {
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& f : failures)
      fails.push_back({{"task_id", f.task_id}, {"stage", f.stage}, {"reason", f.reason}});
    return nlohmann::json{
        {"tasks_total", tasks_total},
        {"tasks_succeeded", tasks_succeeded},
        {"failures", fails},
        {"questions_generated", questions_generated},
        {"questions_kept", questions_kept},
        {"questions_rejected", questions_rejected},
    };
  }
};

struct GenDatasetResult {
  Dataset dataset;
  GenDatasetReport report;
};

// ingest -> prompt -> LLM -> parse -> filter, per task. Per-task failures
// are collected, never fatal; the caller decides what zero successes means.
// With filter_dataset off every parsed question is kept (scores are still
// annotated when a scorer is supplied).
inline GenDatasetResult gen_dataset(const std::vector<LocaVQGTask>& tasks,
                                    ingest::GeocodeCache& cache,
                                    ingest::GeocodeClient& geocoder,
                                    ingest::Captioner& captioner,
                                    promptgen::LlmClient& llm,
                                    const engage::Scorer* scorer,
                                    const PipelineConfig& config,
                                    promptgen::ResponseCache* response_cache = nullptr) {
  config.validate();
  if (config.filter_dataset && !scorer)
    throw std::invalid_argument("gen_dataset: filter_dataset requires a scorer");

  GenDatasetResult out;
  out.report.tasks_total = tasks.size();

  ingest::IngestOptions ingest_options;
  ingest_options.workers = config.workers;
  auto ingested = ingest::ingest_tasks(tasks, cache, geocoder, captioner, ingest_options);
  out.report.failures = ingested.failures;

  promptgen::LlmConfig llm_config = config.llm_config();
  llm_config.validate();

  for (const auto& ct : ingested.captioned) {
    auto prompts = promptgen::build_prompts(ct, config.include_address,
                                            llm_config.max_questions);
    auto raw = promptgen::generate_raw(prompts, llm_config, llm, response_cache);
    if (!raw.ok) {
      out.report.failures.push_back({ct.task.task_id, "ungenerated", raw.error});
      continue;
    }
    auto parsed = promptgen::parse_questions(raw.text, llm_config.max_questions);
    if (parsed.unparseable) {
      out.report.failures.push_back({ct.task.task_id, "unparseable",
                                     "no questions found in response"});
      continue;
    }

    DatasetRecord record;
    record.captioned = ct;
    std::vector<Question> questions;
    for (const auto& text : parsed.questions) {
      Question q;
      q.text = text;
      q.source = QuestionSource::llm;
      q.task_id = ct.task.task_id;
      questions.push_back(std::move(q));
    }
    out.report.questions_generated += questions.size();

    if (scorer && config.filter_dataset) {
      auto filtered = engage::filter(*scorer, questions, config.threshold);
      record.questions = std::move(filtered.kept);
      record.rejected = std::move(filtered.rejected);
    } else {
      if (scorer)
        for (auto& q : questions) q.engaging_score = scorer->score(q.text);
      record.questions = std::move(questions);
    }
    out.report.questions_kept += record.questions.size();
    out.report.questions_rejected += record.rejected.size();
    out.dataset.records.push_back(std::move(record));
  }

  out.report.tasks_succeeded = out.dataset.records.size();

  out.dataset.header.threshold = config.threshold;
  out.dataset.header.filtered = config.filter_dataset && scorer;
  out.dataset.header.generator = {
      {"llm_backend", llm.id()},
      {"captioner_backend", captioner.id()},
      {"geocoder_backend", geocoder.id()},
      {"temperature", llm_config.temperature},
      {"presence_penalty", llm_config.presence_penalty},
      {"max_questions", llm_config.max_questions},
      {"include_address", config.include_address},
      {"seed", config.seed},
  };
  out.dataset.header.policies = {
      {"tokenize", std::string(metrics::kTokenPolicy)},
      {"sentences", std::string(metrics::kSentencePolicy)},
      {"normalize", std::string(kNormalizePolicy)},
  };
  return out;
}

}  // namespace locavqg::pipeline
