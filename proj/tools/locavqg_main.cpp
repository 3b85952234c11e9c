#include <chrono>
#include <ctime>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "locavqg/bench/latency.hpp"
#include "locavqg/bench/runners.hpp"
#include "locavqg/core/serialize.hpp"
#include "locavqg/engage/checkpoint.hpp"
#include "locavqg/engage/train.hpp"
#include "locavqg/ingest/http_geocode.hpp"
#include "locavqg/ingest/manifest.hpp"
#include "locavqg/ingest/pipeline.hpp"
#include "locavqg/metrics/corpus_stats.hpp"
#include "locavqg/metrics/embedding.hpp"
#include "locavqg/metrics/overlap.hpp"
#include "locavqg/metrics/report.hpp"
#include "locavqg/pipeline/config.hpp"
#include "locavqg/pipeline/gen_dataset.hpp"
#include "locavqg/promptgen/http_llm.hpp"
#include "locavqg/qgen/decode.hpp"
#include "locavqg/qgen/train.hpp"

namespace {

using nlohmann::json;
using locavqg::pipeline::PipelineConfig;

std::vector<std::string> g_argv;

// Exit codes: 0 success, 1 usage, 2 partial failure with report, 3 total failure.
struct CommandError : std::runtime_error {
  int code;
  CommandError(int code, const std::string& message)
      : std::runtime_error(message), code(code) {}
};

std::string iso_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_file(const std::string& path, const std::string& what,
                  const std::string& producer) {
  if (path.empty())
    throw CommandError(1, what + " path not set (flag or config file)");
  if (locavqg::file_exists(path)) return;
  std::string msg = what + " not found at '" + path + "'";
  if (!producer.empty()) msg += "; produce it with `locavqg " + producer + "` first";
  throw CommandError(3, msg);
}

void require_checkpoint(const std::string& dir, const std::string& what,
                        const std::string& producer) {
  if (dir.empty())
    throw CommandError(1, what + " directory not set (flag or config file)");
  if (locavqg::file_exists(dir + "/config.json")) return;
  throw CommandError(3, what + " not found at '" + dir +
                            "' (no config.json); produce it with `locavqg " +
                            producer + "` first");
}

// Timestamps live only here, never in data artifacts.
void write_run_manifest(const std::string& path, const std::string& command,
                        const PipelineConfig& config, json report) {
  json j{{"command", command},
         {"argv", g_argv},
         {"timestamp", iso_timestamp()},
         {"seed", config.seed},
         {"config", config.to_json()},
         {"report", std::move(report)}};
  locavqg::write_file(path, j.dump(2) + "\n");
}

PipelineConfig base_config(const std::optional<std::string>& path) {
  if (!path) return {};
  if (!locavqg::file_exists(*path))
    throw CommandError(1, "config file not found: " + *path);
  return PipelineConfig::load(*path);
}

template <typename T, typename U>
void apply(const std::optional<T>& flag, U& field) {
  if (flag) field = static_cast<U>(*flag);
}

// Deterministic stand-in scorer for stub pipelines: a hash of the normalized
// text mapped to [0, 1). Not a trained model; real runs load a checkpoint.
double stub_engaging_score(const std::string& question) {
  uint64_t h = locavqg::fnv1a(locavqg::to_lower(question));
  return static_cast<double>((h >> 11) % 1000003ull) / 1000003.0;
}

constexpr const char* kStubScorerId = "hash-stub-v1";

struct ScorerHandle {
  std::shared_ptr<locavqg::engage::Scorer> scorer;
  std::string id;
};

ScorerHandle load_scorer(const std::string& classifier_dir, double threshold,
                         bool threshold_overridden) {
  require_checkpoint(classifier_dir, "classifier checkpoint", "train-classifier");
  auto loaded = locavqg::engage::load_classifier(classifier_dir);
  if (threshold_overridden) {
    if (loaded.encoder) loaded.encoder->set_threshold(threshold);
    if (loaded.lexical) loaded.lexical->set_threshold(threshold);
  }
  return {loaded.model, loaded.encoder_id};
}

ScorerHandle make_scorer(const std::string& classifier_dir, double threshold,
                         bool threshold_overridden) {
  if (!classifier_dir.empty())
    return load_scorer(classifier_dir, threshold, threshold_overridden);
  return {std::make_shared<locavqg::engage::CallbackScorer>(&stub_engaging_score, threshold),
          kStubScorerId};
}

std::unique_ptr<locavqg::ingest::GeocodeClient> make_geocoder(const std::string& backend) {
  if (backend == "stub") return std::make_unique<locavqg::ingest::StubGeocoder>();
  if (backend == "remote-geocoder")
    return std::make_unique<locavqg::ingest::HttpGeocoder>();
  throw CommandError(1, "unknown geocoder backend '" + backend +
                            "' (expected stub or remote-geocoder)");
}

std::unique_ptr<locavqg::ingest::Captioner> make_captioner(const std::string& backend,
                                                           const std::string& map_path) {
  if (backend == "stub") return std::make_unique<locavqg::ingest::StubCaptioner>();
  if (backend == "mapped") {
    require_file(map_path, "caption map (--caption-map)", "");
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& line : locavqg::split(locavqg::read_file(map_path), '\n')) {
      if (locavqg::trim(line).empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw CommandError(1, "caption map line needs ref<TAB>caption: " + line);
      entries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return std::make_unique<locavqg::ingest::MappedCaptioner>(std::move(entries));
  }
  throw CommandError(1, "unknown captioner backend '" + backend +
                            "' (expected stub or mapped; no offline remote captioner exists)");
}

std::unique_ptr<locavqg::promptgen::LlmClient> make_llm(const PipelineConfig& cfg,
                                                        const std::string& host,
                                                        const std::string& path,
                                                        const std::string& model) {
  if (cfg.llm_backend == "stub")
    return std::make_unique<locavqg::promptgen::StubLlm>(cfg.seed);
  if (cfg.llm_backend == "remote-llm")
    return std::make_unique<locavqg::promptgen::HttpLlm>(host, path, model);
  throw CommandError(1, "unknown llm backend '" + cfg.llm_backend +
                            "' (expected stub or remote-llm)");
}

std::vector<locavqg::LocaVQGTask> load_tasks(const std::string& manifest_path) {
  require_file(manifest_path, "task manifest", "");
  auto loaded = locavqg::ingest::load_manifest(manifest_path);
  for (const auto& err : loaded.row_errors)
    std::cerr << "warning: manifest line " << err.line << " (" << err.task_id
              << "): " << err.message << "\n";
  if (loaded.tasks.empty())
    throw CommandError(3, "manifest '" + manifest_path + "' has no valid tasks");
  return loaded.tasks;
}

std::vector<locavqg::CaptionedTask> read_captioned_jsonl(const std::string& path) {
  require_file(path, "captioned task file", "ingest");
  std::vector<locavqg::CaptionedTask> out;
  for (const auto& line : locavqg::split(locavqg::read_file(path), '\n')) {
    if (locavqg::trim(line).empty()) continue;
    out.push_back(locavqg::captioned_from_json(json::parse(line)));
  }
  if (out.empty()) throw CommandError(3, "no captioned tasks in " + path);
  return out;
}

// Task sources accepted by infer/bench: a dataset, an ingest output, or a raw
// manifest captioned on the fly with stub backends.
std::vector<locavqg::CaptionedTask> gather_tasks(const std::string& dataset_path,
                                                 const std::string& captioned_path,
                                                 const std::string& manifest_path,
                                                 int workers) {
  int sources = (!dataset_path.empty()) + (!captioned_path.empty()) +
                (!manifest_path.empty());
  if (sources != 1)
    throw CommandError(1, "pass exactly one of --dataset, --captioned, --manifest");
  if (!dataset_path.empty()) {
    require_file(dataset_path, "dataset", "gen-dataset");
    auto ds = locavqg::read_dataset(dataset_path);
    std::vector<locavqg::CaptionedTask> out;
    for (const auto& rec : ds.records) out.push_back(rec.captioned);
    if (out.empty()) throw CommandError(3, "dataset has no records: " + dataset_path);
    return out;
  }
  if (!captioned_path.empty()) return read_captioned_jsonl(captioned_path);
  auto tasks = load_tasks(manifest_path);
  locavqg::ingest::GeocodeCache cache;
  locavqg::ingest::StubGeocoder geocoder;
  locavqg::ingest::StubCaptioner captioner;
  locavqg::ingest::IngestOptions options;
  options.workers = workers;
  auto result = locavqg::ingest::ingest_tasks(tasks, cache, geocoder, captioner, options);
  for (const auto& f : result.failures)
    std::cerr << "warning: task " << f.task_id << " " << f.stage << ": " << f.reason << "\n";
  if (result.captioned.empty())
    throw CommandError(3, "no task in the manifest could be captioned");
  return result.captioned;
}

std::vector<locavqg::DatasetRecord> apply_fraction(std::vector<locavqg::DatasetRecord> records,
                                                   double fraction, uint64_t seed) {
  if (fraction >= 1.0) return records;
  size_t keep = std::max<size_t>(
      1, static_cast<size_t>(std::llround(fraction * static_cast<double>(records.size()))));
  locavqg::Rng rng(seed);
  auto picks = locavqg::rng_sample_indices(rng, records.size(), keep);
  std::sort(picks.begin(), picks.end());
  std::vector<locavqg::DatasetRecord> out;
  out.reserve(picks.size());
  for (size_t i : picks) out.push_back(std::move(records[i]));
  return out;
}

json failures_json(const std::vector<locavqg::ingest::TaskFailure>& failures) {
  json j = json::array();
  for (const auto& f : failures)
    j.push_back({{"task_id", f.task_id}, {"stage", f.stage}, {"reason", f.reason}});
  return j;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOpts {
  std::optional<std::string> config, manifest, geocode_cache, out;
  std::optional<std::string> geocoder = {}, captioner = {}, caption_map = {};
  std::optional<int> workers;
  std::optional<double> geocode_rps;
  std::optional<uint64_t> seed;
};

int cmd_ingest(const IngestOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  apply(o.manifest, cfg.manifest_path);
  apply(o.geocode_cache, cfg.geocode_cache_path);
  apply(o.geocoder, cfg.geocoder_backend);
  apply(o.captioner, cfg.captioner_backend);
  apply(o.workers, cfg.workers);
  apply(o.seed, cfg.seed);
  cfg.validate();
  std::string out_path = o.out.value_or(cfg.out_dir + "/captioned.jsonl");

  auto tasks = load_tasks(cfg.manifest_path);
  locavqg::ingest::GeocodeCache cache;
  if (!cfg.geocode_cache_path.empty() && locavqg::file_exists(cfg.geocode_cache_path))
    cache.load(cfg.geocode_cache_path);
  auto geocoder = make_geocoder(cfg.geocoder_backend);
  auto captioner = make_captioner(cfg.captioner_backend, o.caption_map.value_or(""));

  locavqg::ingest::IngestOptions options;
  options.workers = cfg.workers;
  options.geocode_rps = o.geocode_rps.value_or(0.0);
  auto result = locavqg::ingest::ingest_tasks(tasks, cache, *geocoder, *captioner, options);

  std::ostringstream lines;
  for (const auto& ct : result.captioned) lines << locavqg::to_json(ct).dump() << "\n";
  locavqg::write_file(out_path, lines.str());
  if (!cfg.geocode_cache_path.empty()) cache.save(cfg.geocode_cache_path);

  json report{{"tasks_total", result.total()},
              {"captioned", result.captioned.size()},
              {"failures", failures_json(result.failures)},
              {"geocode_cache_entries", cache.size()},
              {"out", out_path}};
  write_run_manifest(out_path + ".run.json", "ingest", cfg, report);
  std::cout << "ingest: " << result.captioned.size() << "/" << result.total()
            << " tasks captioned -> " << out_path << "\n";
  for (const auto& f : result.failures)
    std::cerr << "failed task " << f.task_id << " (" << f.stage << "): " << f.reason << "\n";
  if (result.captioned.empty()) return 3;
  return result.failures.empty() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// gen-dataset

struct GenDatasetOpts {
  std::optional<std::string> config, manifest, geocode_cache, llm_cache, out, classifier;
  std::optional<std::string> llm, geocoder, captioner, caption_map;
  std::optional<std::string> llm_host, llm_path, llm_model;
  std::optional<double> temperature, presence_penalty, threshold;
  std::optional<int> questions, workers;
  std::optional<uint64_t> seed;
  bool no_filter = false;
  bool no_address = false;
};

int cmd_gen_dataset(const GenDatasetOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  apply(o.manifest, cfg.manifest_path);
  apply(o.geocode_cache, cfg.geocode_cache_path);
  apply(o.llm_cache, cfg.llm_cache_dir);
  apply(o.out, cfg.dataset_path);
  apply(o.classifier, cfg.classifier_dir);
  apply(o.llm, cfg.llm_backend);
  apply(o.geocoder, cfg.geocoder_backend);
  apply(o.captioner, cfg.captioner_backend);
  apply(o.temperature, cfg.temperature);
  apply(o.presence_penalty, cfg.presence_penalty);
  apply(o.threshold, cfg.threshold);
  apply(o.questions, cfg.llm_questions);
  apply(o.workers, cfg.workers);
  apply(o.seed, cfg.seed);
  if (o.no_filter) cfg.filter_dataset = false;
  if (o.no_address) cfg.include_address = false;
  cfg.validate();
  if (cfg.dataset_path.empty())
    throw CommandError(1, "dataset output path not set (--out or config dataset_path)");

  auto tasks = load_tasks(cfg.manifest_path);
  locavqg::ingest::GeocodeCache cache;
  if (!cfg.geocode_cache_path.empty() && locavqg::file_exists(cfg.geocode_cache_path))
    cache.load(cfg.geocode_cache_path);
  auto geocoder = make_geocoder(cfg.geocoder_backend);
  auto captioner = make_captioner(cfg.captioner_backend, o.caption_map.value_or(""));
  auto llm = make_llm(cfg, o.llm_host.value_or("https://api.openai.com"),
                      o.llm_path.value_or("/v1/chat/completions"),
                      o.llm_model.value_or("gpt-4"));
  std::optional<locavqg::promptgen::ResponseCache> response_cache;
  if (!cfg.llm_cache_dir.empty()) response_cache.emplace(cfg.llm_cache_dir);

  ScorerHandle scorer;
  if (cfg.filter_dataset || !cfg.classifier_dir.empty())
    scorer = make_scorer(cfg.classifier_dir, cfg.threshold, o.threshold.has_value());

  auto result = locavqg::pipeline::gen_dataset(
      tasks, cache, *geocoder, *captioner, *llm, scorer.scorer.get(), cfg,
      response_cache ? &*response_cache : nullptr);

  locavqg::write_dataset(cfg.dataset_path, result.dataset);
  if (!cfg.geocode_cache_path.empty()) cache.save(cfg.geocode_cache_path);

  json report = result.report.to_json();
  report["scorer"] = scorer.scorer ? scorer.id : "none";
  report["out"] = cfg.dataset_path;
  write_run_manifest(cfg.dataset_path + ".run.json", "gen-dataset", cfg, report);

  std::cout << "gen-dataset: " << result.report.tasks_succeeded << "/"
            << result.report.tasks_total << " tasks, " << result.report.questions_kept
            << " questions kept, " << result.report.questions_rejected
            << " rejected -> " << cfg.dataset_path << "\n";
  for (const auto& f : result.report.failures)
    std::cerr << "failed task " << f.task_id << " (" << f.stage << "): " << f.reason << "\n";
  if (result.report.tasks_succeeded == 0) return 3;
  return result.report.failures.empty() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// train-classifier

struct TrainClassifierOpts {
  std::optional<std::string> config, negatives, positives, out, backend;
  std::optional<int> epochs;
  std::optional<double> lr, threshold;
  std::optional<uint64_t> seed;
};

int cmd_train_classifier(const TrainClassifierOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  apply(o.out, cfg.classifier_dir);
  apply(o.backend, cfg.classifier_backend);
  apply(o.epochs, cfg.classifier_epochs);
  apply(o.lr, cfg.classifier_lr);
  apply(o.threshold, cfg.threshold);
  apply(o.seed, cfg.seed);
  cfg.validate();
  if (cfg.classifier_dir.empty())
    throw CommandError(1, "classifier output dir not set (--out or config classifier_dir)");
  if (!o.negatives || !o.positives)
    throw CommandError(1, "train-classifier needs --negatives and --positives files");
  require_file(*o.negatives, "negative question corpus", "");
  require_file(*o.positives, "positive question corpus", "");

  auto negatives = locavqg::engage::parse_question_lines(locavqg::read_file(*o.negatives));
  auto positives = locavqg::engage::parse_question_lines(locavqg::read_file(*o.positives));
  auto corpus = locavqg::engage::build_corpus(negatives, positives, cfg.seed);
  auto outcome = locavqg::engage::train_classifier(corpus, cfg.classifier_config());

  json report{{"encoder_id", outcome.encoder_id},
              {"epoch_losses", outcome.epoch_losses},
              {"accuracy", {{"train", outcome.accuracy.train},
                            {"val", outcome.accuracy.val},
                            {"test", outcome.accuracy.test}}},
              {"corpus", {{"negatives", negatives.size()},
                          {"positives", positives.size()},
                          {"train", corpus.train.size()},
                          {"val", corpus.val.size()},
                          {"test", corpus.test.size()}}},
              {"aborted", outcome.aborted}};
  if (outcome.aborted) report["abort_reason"] = outcome.abort_reason;

  if (outcome.encoder)
    locavqg::engage::save_classifier(cfg.classifier_dir, *outcome.encoder, report);
  else
    locavqg::engage::save_classifier(cfg.classifier_dir, *outcome.lexical, report);
  write_run_manifest(cfg.classifier_dir + "/run.json", "train-classifier", cfg, report);

  std::cout << "train-classifier: accuracy train=" << outcome.accuracy.train
            << " val=" << outcome.accuracy.val << " test=" << outcome.accuracy.test
            << " -> " << cfg.classifier_dir << "\n";
  if (outcome.aborted) {
    std::cerr << "training aborted: " << outcome.abort_reason << "\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train / distill

struct TrainOpts {
  std::optional<std::string> config, dataset, out, tier;
  std::optional<int> epochs, questions_per_task, max_vocab;
  std::optional<double> lr, fraction;
  std::optional<uint64_t> seed;
  bool no_address = false;
};

struct PreparedExamples {
  std::vector<locavqg::qgen::QGExample> examples;
  size_t records_used = 0;
  size_t skipped_tasks = 0;
};

PreparedExamples prepare_examples(const PipelineConfig& cfg) {
  require_file(cfg.dataset_path, "dataset", "gen-dataset");
  auto ds = locavqg::read_dataset(cfg.dataset_path);
  auto records = apply_fraction(std::move(ds.records), cfg.dataset_fraction, cfg.seed);
  auto ts = locavqg::qgen::build_training_set(records, cfg.questions_per_task, cfg.seed,
                                              cfg.include_address);
  if (ts.examples.empty())
    throw CommandError(3, "dataset '" + cfg.dataset_path +
                              "' has no usable questions; regenerate it with "
                              "`locavqg gen-dataset`");
  return {std::move(ts.examples), records.size(), ts.skipped_task_ids.size()};
}

json train_report_json(const PreparedExamples& prep, const locavqg::qgen::TrainReport& report) {
  json j{{"examples", prep.examples.size()},
         {"records_used", prep.records_used},
         {"skipped_tasks", prep.skipped_tasks},
         {"epoch_losses", report.epoch_losses},
         {"aborted", report.aborted}};
  if (report.aborted) j["abort_reason"] = report.abort_reason;
  return j;
}

int cmd_train(const TrainOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  apply(o.dataset, cfg.dataset_path);
  apply(o.out, cfg.teacher_dir);
  apply(o.tier, cfg.tier);
  apply(o.epochs, cfg.qgen_epochs);
  apply(o.lr, cfg.qgen_lr);
  apply(o.questions_per_task, cfg.questions_per_task);
  apply(o.fraction, cfg.dataset_fraction);
  apply(o.seed, cfg.seed);
  if (o.no_address) cfg.include_address = false;
  cfg.validate();
  if (cfg.teacher_dir.empty())
    throw CommandError(1, "model output dir not set (--out or config teacher_dir)");

  auto prep = prepare_examples(cfg);
  std::vector<std::string> texts;
  texts.reserve(prep.examples.size() * 2);
  for (const auto& ex : prep.examples) {
    texts.push_back(ex.input_text);
    texts.push_back(ex.target_text);
  }
  auto tokenizer =
      locavqg::nn::Tokenizer::build(texts, static_cast<size_t>(o.max_vocab.value_or(8000)));
  auto model = locavqg::qgen::make_model(cfg.tier, std::move(tokenizer), cfg.seed);
  auto report = locavqg::qgen::finetune(model, prep.examples, cfg.qgen_config());

  json manifest = train_report_json(prep, report);
  locavqg::qgen::save_model(cfg.teacher_dir, model, manifest);
  write_run_manifest(cfg.teacher_dir + "/run.json", "train", cfg, manifest);

  std::cout << "train: " << prep.examples.size() << " examples, tier " << cfg.tier;
  if (!report.epoch_losses.empty())
    std::cout << ", final loss " << report.epoch_losses.back();
  std::cout << " -> " << cfg.teacher_dir << "\n";
  if (report.aborted) {
    std::cerr << "training aborted: " << report.abort_reason << "\n";
    return 2;
  }
  return 0;
}

struct DistillOpts {
  TrainOpts train;
  std::optional<std::string> teacher;
  std::optional<double> alpha, temperature;
  bool sequence_level = false;
};

int cmd_distill(const DistillOpts& o) {
  PipelineConfig cfg = base_config(o.train.config);
  apply(o.train.dataset, cfg.dataset_path);
  apply(o.train.out, cfg.model_dir);
  apply(o.teacher, cfg.teacher_dir);
  apply(o.train.tier, cfg.tier);
  apply(o.train.epochs, cfg.qgen_epochs);
  apply(o.train.lr, cfg.qgen_lr);
  apply(o.train.questions_per_task, cfg.questions_per_task);
  apply(o.train.fraction, cfg.dataset_fraction);
  apply(o.train.seed, cfg.seed);
  apply(o.alpha, cfg.distill_alpha);
  apply(o.temperature, cfg.distill_temperature);
  if (o.sequence_level) cfg.sequence_level = true;
  if (o.train.no_address) cfg.include_address = false;
  cfg.validate();
  if (cfg.model_dir.empty())
    throw CommandError(1, "student output dir not set (--out or config model_dir)");
  require_checkpoint(cfg.teacher_dir, "teacher checkpoint", "train");

  auto teacher = locavqg::qgen::load_model(cfg.teacher_dir);
  auto prep = prepare_examples(cfg);
  auto student = locavqg::qgen::make_model(cfg.tier, teacher.tokenizer, cfg.seed);
  auto report = locavqg::qgen::distill(teacher, student, prep.examples, cfg.distill_config());

  json manifest = train_report_json(prep, report);
  manifest["teacher"] = cfg.teacher_dir;
  manifest["alpha"] = cfg.distill_alpha;
  manifest["soft_temperature"] = cfg.distill_temperature;
  manifest["sequence_level"] = cfg.sequence_level;
  locavqg::qgen::save_model(cfg.model_dir, student, manifest);
  write_run_manifest(cfg.model_dir + "/run.json", "distill", cfg, manifest);

  std::cout << "distill: " << prep.examples.size() << " examples, alpha "
            << cfg.distill_alpha << ", T " << cfg.distill_temperature;
  if (!report.epoch_losses.empty())
    std::cout << ", final loss " << report.epoch_losses.back();
  std::cout << " -> " << cfg.model_dir << "\n";
  if (report.aborted) {
    std::cerr << "distillation aborted: " << report.abort_reason << "\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// infer

struct InferOpts {
  std::optional<std::string> config, model, dataset, captioned, manifest, out, classifier;
  std::optional<int> max_attempts, limit, workers;
  std::optional<double> top_p, threshold;
  std::optional<uint64_t> seed;
  bool filtered = false, no_filter = false, greedy = false, no_address = false;
};

int cmd_infer(const InferOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  apply(o.model, cfg.model_dir);
  apply(o.dataset, cfg.dataset_path);
  apply(o.classifier, cfg.classifier_dir);
  apply(o.max_attempts, cfg.max_attempts);
  apply(o.top_p, cfg.top_p);
  apply(o.threshold, cfg.threshold);
  apply(o.workers, cfg.workers);
  apply(o.seed, cfg.seed);
  if (o.filtered) cfg.filter_inference = true;
  if (o.no_filter) cfg.filter_inference = false;
  if (o.no_address) cfg.include_address = false;
  cfg.validate();
  if (o.filtered && o.no_filter)
    throw CommandError(1, "--filtered and --no-filter are mutually exclusive");
  std::string out_path = o.out.value_or(cfg.out_dir + "/questions.jsonl");

  require_checkpoint(cfg.model_dir, "generator checkpoint", "train (or distill)");
  auto model = locavqg::qgen::load_model(cfg.model_dir);

  locavqg::qgen::DecodeConfig decode = cfg.decode_config();
  if (o.greedy) decode.kind = locavqg::qgen::DecodeConfig::Kind::greedy;
  if (cfg.filter_inference && decode.kind == locavqg::qgen::DecodeConfig::Kind::greedy &&
      cfg.max_attempts > 1)
    throw CommandError(1, "filtered inference retries need sampling; drop --greedy or "
                          "set --max-attempts 1");

  ScorerHandle scorer;
  if (cfg.filter_inference) {
    if (cfg.classifier_dir.empty())
      throw CommandError(1, "filtered inference needs --classifier <dir>; train one "
                            "with `locavqg train-classifier` (or pass --no-filter)");
    scorer = load_scorer(cfg.classifier_dir, cfg.threshold, o.threshold.has_value());
  } else if (!cfg.classifier_dir.empty()) {
    scorer = load_scorer(cfg.classifier_dir, cfg.threshold, o.threshold.has_value());
  }

  auto tasks = gather_tasks(o.dataset ? cfg.dataset_path : "", o.captioned.value_or(""),
                            o.manifest.value_or(""), cfg.workers);
  size_t limit = o.limit && *o.limit > 0 ? static_cast<size_t>(*o.limit) : tasks.size();
  if (tasks.size() > limit) tasks.resize(limit);

  std::ostringstream lines;
  size_t fallbacks = 0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    uint64_t task_seed = cfg.seed + i;
    json line{{"task_id", tasks[i].task.task_id}, {"source", "student"}};
    if (cfg.filter_inference) {
      auto out = locavqg::qgen::filtered_generate(model, *scorer.scorer, tasks[i], decode,
                                                  task_seed, cfg.max_attempts,
                                                  locavqg::QuestionSource::student,
                                                  cfg.include_address);
      line["question"] = out.question.text;
      line["engaging_score"] = *out.question.engaging_score;
      line["attempts"] = out.attempts;
      line["fallback"] = out.fallback;
      if (out.fallback) ++fallbacks;
    } else {
      auto out = locavqg::qgen::generate(model, tasks[i], decode, task_seed,
                                         locavqg::QuestionSource::student,
                                         cfg.include_address);
      line["question"] = out.question.text;
      if (scorer.scorer) line["engaging_score"] = scorer.scorer->score(out.question.text);
      if (out.empty_after_retry) line["empty_after_retry"] = true;
    }
    lines << line.dump() << "\n";
  }
  locavqg::write_file(out_path, lines.str());

  json report{{"tasks", tasks.size()},
              {"filtered", cfg.filter_inference},
              {"fallbacks", fallbacks},
              {"scorer", scorer.scorer ? scorer.id : "none"},
              {"decode", decode.kind == locavqg::qgen::DecodeConfig::Kind::greedy
                             ? "greedy"
                             : "nucleus"},
              {"out", out_path}};
  write_run_manifest(out_path + ".run.json", "infer", cfg, report);
  std::cout << "infer: " << tasks.size() << " questions"
            << (cfg.filter_inference ? " (filtered, " + std::to_string(fallbacks) +
                                           " fallbacks)"
                                     : "")
            << " -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::optional<std::string> config, candidates, references, out, embedding;
};

int cmd_eval(const EvalOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  cfg.validate();
  if (!o.candidates) throw CommandError(1, "eval needs --candidates (infer output)");
  require_file(*o.candidates, "candidate questions", "infer");
  std::string references_path = o.references.value_or(cfg.dataset_path);
  require_file(references_path, "reference dataset", "gen-dataset");
  std::string out_path = o.out.value_or(cfg.out_dir + "/eval.json");
  std::string embedding = o.embedding.value_or("stub");
  if (embedding != "stub" && embedding != "none")
    throw CommandError(1, "unknown embedding backend '" + embedding +
                              "' (expected stub or none)");

  auto ds = locavqg::read_dataset(references_path);
  std::map<std::string, std::vector<std::string>> refs_by_task;
  for (const auto& rec : ds.records)
    for (const auto& q : rec.questions)
      refs_by_task[rec.captioned.task.task_id].push_back(q.text);

  std::vector<std::string> candidates;
  std::vector<std::vector<std::string>> references;
  size_t skipped = 0;
  for (const auto& line : locavqg::split(locavqg::read_file(*o.candidates), '\n')) {
    if (locavqg::trim(line).empty()) continue;
    json j = json::parse(line);
    std::string task_id = j.at("task_id").get<std::string>();
    auto it = refs_by_task.find(task_id);
    if (it == refs_by_task.end() || it->second.empty()) {
      std::cerr << "warning: no references for task " << task_id << ", skipped\n";
      ++skipped;
      continue;
    }
    candidates.push_back(j.at("question").get<std::string>());
    references.push_back(it->second);
  }
  if (candidates.empty())
    throw CommandError(3, "no candidate had references in '" + references_path +
                              "'; check the dataset or rerun `locavqg gen-dataset`");

  locavqg::metrics::MetricReport report;
  json token_cfg{{"tokenize", std::string(locavqg::metrics::kTokenPolicy)}};
  report.set("bleu4", locavqg::metrics::bleu4_corpus(candidates, references), token_cfg);
  report.set("rouge2", locavqg::metrics::rouge2_corpus(candidates, references), token_cfg);

  auto backends = embedding == "stub" ? locavqg::metrics::EmbeddingBackends::offline_stub()
                                      : locavqg::metrics::EmbeddingBackends::none();
  auto first = locavqg::metrics::embedding_score(
      candidates[0], references[0], locavqg::metrics::EmbeddingBackendKind::bertscore,
      backends);
  if (first.available) {
    double sum = first.value;
    for (size_t i = 1; i < candidates.size(); ++i)
      sum += locavqg::metrics::embedding_score(
                 candidates[i], references[i],
                 locavqg::metrics::EmbeddingBackendKind::bertscore, backends)
                 .value;
    report.set("bertscore", sum / static_cast<double>(candidates.size()),
               json{{"checkpoint", first.checkpoint}});
  } else {
    report.set_unavailable("bertscore", first.note);
  }
  auto bleurt = locavqg::metrics::embedding_score(
      candidates[0], references[0], locavqg::metrics::EmbeddingBackendKind::bleurt,
      backends);
  report.set_unavailable("bleurt", bleurt.note);

  report.write(out_path);
  json run_report{{"candidates", candidates.size()},
                  {"skipped_no_reference", skipped},
                  {"out", out_path}};
  write_run_manifest(out_path + ".run.json", "eval", cfg, run_report);
  std::cout << "eval: " << candidates.size() << " candidates, bleu4="
            << report.at("bleu4").value << " rouge2=" << report.at("rouge2").value
            << " -> " << out_path << "\n";
  return skipped == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// stats

struct StatsOpts {
  std::optional<std::string> config, dataset, questions, out;
  std::optional<std::string> stopwords, abstract_terms, hierarchy, encoder;
  std::optional<int> top_k, sample_size;
  std::optional<uint64_t> seed;
};

int cmd_stats(const StatsOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  apply(o.dataset, cfg.dataset_path);
  apply(o.seed, cfg.seed);
  cfg.validate();
  std::string out_path = o.out.value_or(cfg.out_dir + "/stats.json");
  size_t top_k = static_cast<size_t>(o.top_k.value_or(20));
  size_t sample_size = static_cast<size_t>(o.sample_size.value_or(500));
  std::string encoder = o.encoder.value_or("stub");
  if (encoder != "stub" && encoder != "none")
    throw CommandError(1, "unknown sentence encoder '" + encoder +
                              "' (expected stub or none)");

  std::vector<std::string> corpus;
  if (o.questions) {
    require_file(*o.questions, "question file", "");
    corpus = locavqg::engage::parse_question_lines(locavqg::read_file(*o.questions));
  } else {
    require_file(cfg.dataset_path, "dataset", "gen-dataset");
    auto ds = locavqg::read_dataset(cfg.dataset_path);
    for (const auto& rec : ds.records)
      for (const auto& q : rec.questions) corpus.push_back(q.text);
  }
  if (corpus.empty()) throw CommandError(3, "no questions to analyze");

  auto cs = locavqg::metrics::corpus_stats(corpus);
  json token_cfg{{"tokenize", cs.token_policy}, {"sentences", cs.sentence_policy}};

  locavqg::metrics::MetricReport report;
  report.set("question_count", static_cast<double>(cs.question_count), token_cfg);
  report.set("sentence_count", static_cast<double>(cs.sentence_count), token_cfg);
  report.set("vocab_size", static_cast<double>(cs.vocab_size), token_cfg);
  report.set("avg_question_length", cs.avg_question_length, token_cfg);
  report.set("avg_sentence_length", cs.avg_sentence_length, token_cfg);

  auto types = locavqg::metrics::question_types(corpus);
  report.set("distinct_question_types", static_cast<double>(types.distinct_types),
             token_cfg);

  json frequent = json::array();
  if (o.stopwords) {
    require_file(*o.stopwords, "stopword list", "");
    auto stopwords = locavqg::metrics::load_lexicon(locavqg::read_file(*o.stopwords));
    for (const auto& [word, count] :
         locavqg::metrics::frequent_words(corpus, stopwords, top_k))
      frequent.push_back({{"word", word}, {"count", count}});
  }

  if (o.abstract_terms) {
    require_file(*o.abstract_terms, "abstract-term lexicon", "");
    auto lexicon = locavqg::metrics::load_lexicon(locavqg::read_file(*o.abstract_terms));
    report.set("abstract_term_ratio",
               locavqg::metrics::abstract_term_ratio(corpus, lexicon),
               json{{"lexicon", *o.abstract_terms}});
  } else {
    report.set_unavailable("abstract_term_ratio", "pass --abstract-terms <file>");
  }

  if (o.hierarchy) {
    require_file(*o.hierarchy, "noun-depth hierarchy", "");
    auto hierarchy = locavqg::metrics::load_hierarchy(locavqg::read_file(*o.hierarchy));
    report.set("mean_term_depth", locavqg::metrics::term_depth(corpus, hierarchy),
               json{{"hierarchy", *o.hierarchy}});
  } else {
    report.set_unavailable("mean_term_depth", "pass --hierarchy <file>");
  }

  if (encoder == "stub" && corpus.size() >= 2) {
    locavqg::metrics::HashedBowEncoder bow;
    auto pc = locavqg::metrics::pairwise_cosine(corpus, &bow, sample_size, cfg.seed);
    report.set("pairwise_cosine", pc.value,
               json{{"encoder", pc.encoder_id}, {"sampled", pc.sampled}, {"seed", cfg.seed}});
  } else if (encoder == "none") {
    report.set_unavailable("pairwise_cosine", "sentence encoder disabled (--encoder none)");
  } else {
    report.set_unavailable("pairwise_cosine", "corpus too small to sample pairs");
  }

  json out{{"metrics", report.to_json()}, {"frequent_words", frequent}};
  json type_list = json::array();
  for (size_t i = 0; i < types.counts.size() && i < top_k; ++i)
    type_list.push_back({{"type", types.counts[i].first},
                         {"count", types.counts[i].second}});
  out["question_types"] = type_list;
  locavqg::write_file(out_path, out.dump(2) + "\n");

  write_run_manifest(out_path + ".run.json", "stats", cfg,
                     json{{"questions", corpus.size()}, {"out", out_path}});
  std::cout << "stats: " << corpus.size() << " questions, vocab " << cs.vocab_size
            << " -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
  std::optional<std::string> config, model, dataset, captioned, manifest, out, classifier;
  std::optional<int> trials, warmup, max_attempts, attempts, workers;
  std::optional<double> top_p, load_ms, infer_ms, post_filter_ms, threshold;
  std::optional<uint64_t> seed;
  bool sleep_stub = false, filtered = false, no_address = false;
};

int cmd_bench(const BenchOpts& o) {
  PipelineConfig cfg = base_config(o.config);
  apply(o.model, cfg.model_dir);
  apply(o.classifier, cfg.classifier_dir);
  apply(o.max_attempts, cfg.max_attempts);
  apply(o.top_p, cfg.top_p);
  apply(o.threshold, cfg.threshold);
  apply(o.workers, cfg.workers);
  apply(o.seed, cfg.seed);
  if (o.no_address) cfg.include_address = false;
  cfg.validate();
  std::string out_path = o.out.value_or(cfg.out_dir + "/bench.json");
  int trials = o.trials.value_or(50);
  int warmup = o.warmup.value_or(3);

  std::unique_ptr<locavqg::bench::ModelRunner> runner;
  ScorerHandle scorer;
  if (o.sleep_stub) {
    runner = std::make_unique<locavqg::bench::SleepRunner>(
        o.load_ms.value_or(0.0), o.infer_ms.value_or(50.0),
        o.post_filter_ms.value_or(0.0), o.attempts.value_or(1));
  } else {
    require_checkpoint(cfg.model_dir, "generator checkpoint", "train (or distill)");
    if (o.filtered) {
      if (cfg.classifier_dir.empty())
        throw CommandError(1, "bench --filtered needs --classifier <dir>; train one "
                              "with `locavqg train-classifier`");
      scorer = load_scorer(cfg.classifier_dir, cfg.threshold, o.threshold.has_value());
    }
    runner = std::make_unique<locavqg::bench::QGenRunner>(
        cfg.model_dir, scorer.scorer, cfg.decode_config(), cfg.seed, cfg.max_attempts,
        cfg.include_address);
  }

  std::vector<locavqg::CaptionedTask> tasks;
  if (o.dataset || o.captioned || o.manifest) {
    tasks = gather_tasks(o.dataset.value_or(""), o.captioned.value_or(""),
                         o.manifest.value_or(""), cfg.workers);
  } else if (o.sleep_stub) {
    locavqg::CaptionedTask ct;
    ct.task.task_id = "bench-stub";
    ct.task.coordinate = {40.4433, -79.9436};
    for (locavqg::Direction d : locavqg::kDirections) {
      ct.task.images.at(d) = "bench-stub.jpg";
      ct.caption(d) = "a quiet city street with parked cars";
    }
    ct.address = "1250 Penn Ave, Pittsburgh, PA 15222, USA";
    tasks.push_back(std::move(ct));
  } else {
    throw CommandError(1, "bench needs a task source: --dataset, --captioned, or --manifest");
  }

  auto report = locavqg::bench::measure(*runner, tasks, trials, warmup);
  locavqg::write_file(out_path, report.to_json().dump(2) + "\n");
  write_run_manifest(out_path + ".run.json", "bench", cfg,
                     json{{"model", report.model},
                          {"trials", trials},
                          {"warmup", warmup},
                          {"mean_inference_seconds", report.mean_inference_seconds()},
                          {"out", out_path}});
  std::cout << "bench: " << report.model << ", mean inference "
            << report.mean_inference_seconds() * 1000.0 << " ms over " << trials
            << " trials -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int dispatch(const std::function<int()>& body) {
  try {
    return body();
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

void add_config_flag(CLI::App* cmd, std::optional<std::string>& target) {
  cmd->add_option("--config", target, "JSON config file; flags override its values");
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) g_argv.emplace_back(argv[i]);

  CLI::App app{"Location-aware visual question generation toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  auto ingest_opts = std::make_shared<IngestOpts>();
  auto* ingest = app.add_subcommand("ingest", "Geocode and caption a task manifest");
  add_config_flag(ingest, ingest_opts->config);
  ingest->add_option("--manifest", ingest_opts->manifest, "task manifest TSV");
  ingest->add_option("--geocode-cache", ingest_opts->geocode_cache,
                     "persistent geocode cache file");
  ingest->add_option("--out", ingest_opts->out, "captioned task JSONL output");
  ingest->add_option("--geocoder", ingest_opts->geocoder, "stub | remote-geocoder");
  ingest->add_option("--captioner", ingest_opts->captioner, "stub | mapped");
  ingest->add_option("--caption-map", ingest_opts->caption_map,
                     "ref<TAB>caption file for the mapped captioner");
  ingest->add_option("--geocode-rps", ingest_opts->geocode_rps,
                     "geocoder rate limit, requests/second (0 = unlimited)");
  ingest->add_option("--workers", ingest_opts->workers, "parallel workers");
  ingest->add_option("--seed", ingest_opts->seed, "run seed");
  ingest->callback([ingest_opts, &rc] { rc = dispatch([&] { return cmd_ingest(*ingest_opts); }); });

  auto gen_opts = std::make_shared<GenDatasetOpts>();
  auto* gen = app.add_subcommand("gen-dataset",
                                 "Generate the question dataset from a manifest");
  add_config_flag(gen, gen_opts->config);
  gen->add_option("--manifest", gen_opts->manifest, "task manifest TSV");
  gen->add_option("--geocode-cache", gen_opts->geocode_cache, "geocode cache file");
  gen->add_option("--llm-cache", gen_opts->llm_cache, "LLM response cache dir");
  gen->add_option("--out", gen_opts->out, "dataset output path");
  gen->add_option("--classifier", gen_opts->classifier,
                  "engagingness classifier checkpoint dir (default: hash stub)");
  gen->add_option("--llm", gen_opts->llm, "stub | remote-llm");
  gen->add_option("--llm-host", gen_opts->llm_host, "remote LLM host");
  gen->add_option("--llm-path", gen_opts->llm_path, "remote LLM endpoint path");
  gen->add_option("--llm-model", gen_opts->llm_model, "remote LLM model name");
  gen->add_option("--geocoder", gen_opts->geocoder, "stub | remote-geocoder");
  gen->add_option("--captioner", gen_opts->captioner, "stub | mapped");
  gen->add_option("--caption-map", gen_opts->caption_map, "mapped captioner file");
  gen->add_option("--temperature", gen_opts->temperature, "LLM sampling temperature");
  gen->add_option("--presence-penalty", gen_opts->presence_penalty, "LLM presence penalty");
  gen->add_option("--questions", gen_opts->questions, "questions requested per task");
  gen->add_option("--threshold", gen_opts->threshold, "engagingness threshold");
  gen->add_flag("--no-filter", gen_opts->no_filter, "keep all parsed questions");
  gen->add_flag("--no-address", gen_opts->no_address, "omit the address from prompts");
  gen->add_option("--workers", gen_opts->workers, "parallel workers");
  gen->add_option("--seed", gen_opts->seed, "run seed");
  gen->callback([gen_opts, &rc] { rc = dispatch([&] { return cmd_gen_dataset(*gen_opts); }); });

  auto clf_opts = std::make_shared<TrainClassifierOpts>();
  auto* clf = app.add_subcommand("train-classifier",
                                 "Train the engagingness classifier");
  add_config_flag(clf, clf_opts->config);
  clf->add_option("--negatives", clf_opts->negatives,
                  "non-engaging questions, one per line");
  clf->add_option("--positives", clf_opts->positives, "engaging questions, one per line");
  clf->add_option("--out", clf_opts->out, "checkpoint output dir");
  clf->add_option("--backend", clf_opts->backend, "encoder | lexical");
  clf->add_option("--epochs", clf_opts->epochs, "training epochs");
  clf->add_option("--lr", clf_opts->lr, "learning rate");
  clf->add_option("--threshold", clf_opts->threshold, "decision threshold");
  clf->add_option("--seed", clf_opts->seed, "run seed");
  clf->callback(
      [clf_opts, &rc] { rc = dispatch([&] { return cmd_train_classifier(*clf_opts); }); });

  auto add_train_flags = [](CLI::App* cmd, TrainOpts& t) {
    cmd->add_option("--dataset", t.dataset, "training dataset path");
    cmd->add_option("--tier", t.tier, "model size: tiny | base | large");
    cmd->add_option("--epochs", t.epochs, "training epochs");
    cmd->add_option("--lr", t.lr, "learning rate");
    cmd->add_option("--questions-per-task", t.questions_per_task,
                    "target questions sampled per task");
    cmd->add_option("--dataset-fraction", t.fraction,
                    "train on a seeded fraction of the records");
    cmd->add_option("--max-vocab", t.max_vocab, "tokenizer vocabulary cap");
    cmd->add_flag("--no-address", t.no_address, "omit the address from model inputs");
    cmd->add_option("--seed", t.seed, "run seed");
  };

  auto train_opts = std::make_shared<TrainOpts>();
  auto* train = app.add_subcommand("train", "Finetune a question generator on a dataset");
  add_config_flag(train, train_opts->config);
  train->add_option("--out", train_opts->out, "checkpoint output dir");
  add_train_flags(train, *train_opts);
  train->callback([train_opts, &rc] { rc = dispatch([&] { return cmd_train(*train_opts); }); });

  auto distill_opts = std::make_shared<DistillOpts>();
  auto* distill = app.add_subcommand("distill",
                                     "Distill a teacher checkpoint into a smaller student");
  add_config_flag(distill, distill_opts->train.config);
  distill->add_option("--teacher", distill_opts->teacher, "teacher checkpoint dir");
  distill->add_option("--out", distill_opts->train.out, "student checkpoint output dir");
  distill->add_option("--alpha", distill_opts->alpha,
                      "hard-target weight in the distillation loss");
  distill->add_option("--soft-temperature", distill_opts->temperature,
                      "soft-label temperature");
  distill->add_flag("--sequence-level", distill_opts->sequence_level,
                    "add teacher generations as extra hard targets");
  add_train_flags(distill, distill_opts->train);
  distill->callback(
      [distill_opts, &rc] { rc = dispatch([&] { return cmd_distill(*distill_opts); }); });

  auto infer_opts = std::make_shared<InferOpts>();
  auto* infer = app.add_subcommand("infer", "Generate questions from a checkpoint");
  add_config_flag(infer, infer_opts->config);
  infer->add_option("--model", infer_opts->model, "generator checkpoint dir");
  infer->add_option("--dataset", infer_opts->dataset, "take tasks from this dataset");
  infer->add_option("--captioned", infer_opts->captioned,
                    "take tasks from an ingest output JSONL");
  infer->add_option("--manifest", infer_opts->manifest,
                    "take tasks from a manifest (stub ingest)");
  infer->add_option("--out", infer_opts->out, "question JSONL output");
  infer->add_option("--classifier", infer_opts->classifier, "classifier checkpoint dir");
  infer->add_flag("--filtered", infer_opts->filtered,
                  "classifier-filtered decoding (sample until accepted)");
  infer->add_flag("--no-filter", infer_opts->no_filter, "plain single-sample decoding");
  infer->add_flag("--greedy", infer_opts->greedy, "greedy decode instead of nucleus");
  infer->add_option("--max-attempts", infer_opts->max_attempts,
                    "retry budget for filtered decoding");
  infer->add_option("--top-p", infer_opts->top_p, "nucleus sampling mass");
  infer->add_option("--threshold", infer_opts->threshold, "override classifier threshold");
  infer->add_option("--limit", infer_opts->limit, "cap the number of tasks (0 = all)");
  infer->add_flag("--no-address", infer_opts->no_address, "omit the address from inputs");
  infer->add_option("--workers", infer_opts->workers, "parallel workers for stub ingest");
  infer->add_option("--seed", infer_opts->seed, "run seed");
  infer->callback([infer_opts, &rc] { rc = dispatch([&] { return cmd_infer(*infer_opts); }); });

  auto eval_opts = std::make_shared<EvalOpts>();
  auto* eval = app.add_subcommand("eval", "Score candidate questions against references");
  add_config_flag(eval, eval_opts->config);
  eval->add_option("--candidates", eval_opts->candidates, "infer output JSONL");
  eval->add_option("--references", eval_opts->references, "reference dataset path");
  eval->add_option("--out", eval_opts->out, "metric report output");
  eval->add_option("--embedding", eval_opts->embedding,
                   "embedding backend: stub | none");
  eval->callback([eval_opts, &rc] { rc = dispatch([&] { return cmd_eval(*eval_opts); }); });

  auto stats_opts = std::make_shared<StatsOpts>();
  auto* stats = app.add_subcommand("stats", "Corpus statistics and diversity metrics");
  add_config_flag(stats, stats_opts->config);
  stats->add_option("--dataset", stats_opts->dataset, "dataset to analyze");
  stats->add_option("--questions", stats_opts->questions,
                    "plain question file (one per line) instead of a dataset");
  stats->add_option("--out", stats_opts->out, "stats report output");
  stats->add_option("--stopwords", stats_opts->stopwords, "stopword list file");
  stats->add_option("--abstract-terms", stats_opts->abstract_terms,
                    "abstract-term lexicon file");
  stats->add_option("--hierarchy", stats_opts->hierarchy,
                    "word<TAB>depth noun hierarchy file");
  stats->add_option("--encoder", stats_opts->encoder, "sentence encoder: stub | none");
  stats->add_option("--top-k", stats_opts->top_k, "list length for words/types");
  stats->add_option("--sample-size", stats_opts->sample_size,
                    "sample size for pairwise cosine");
  stats->add_option("--seed", stats_opts->seed, "sampling seed");
  stats->callback([stats_opts, &rc] { rc = dispatch([&] { return cmd_stats(*stats_opts); }); });

  auto bench_opts = std::make_shared<BenchOpts>();
  auto* bench = app.add_subcommand("bench", "Measure inference latency");
  add_config_flag(bench, bench_opts->config);
  bench->add_option("--model", bench_opts->model, "generator checkpoint dir");
  bench->add_flag("--sleep-stub", bench_opts->sleep_stub,
                  "synthetic runner with known sleeps (calibration)");
  bench->add_option("--load-ms", bench_opts->load_ms, "sleep-stub load time");
  bench->add_option("--infer-ms", bench_opts->infer_ms, "sleep-stub inference time");
  bench->add_option("--post-filter-ms", bench_opts->post_filter_ms,
                    "sleep-stub post-filter time (enables filtered timing)");
  bench->add_option("--attempts", bench_opts->attempts, "sleep-stub reported attempts");
  bench->add_option("--dataset", bench_opts->dataset, "tasks from a dataset");
  bench->add_option("--captioned", bench_opts->captioned, "tasks from an ingest output");
  bench->add_option("--manifest", bench_opts->manifest, "tasks from a manifest (stub ingest)");
  bench->add_option("--out", bench_opts->out, "latency report output");
  bench->add_option("--classifier", bench_opts->classifier, "classifier checkpoint dir");
  bench->add_flag("--filtered", bench_opts->filtered, "time the filtered decode loop too");
  bench->add_option("--trials", bench_opts->trials, "retained trials");
  bench->add_option("--warmup", bench_opts->warmup, "excluded warm-up trials");
  bench->add_option("--max-attempts", bench_opts->max_attempts, "filtered retry budget");
  bench->add_option("--top-p", bench_opts->top_p, "nucleus sampling mass");
  bench->add_option("--threshold", bench_opts->threshold, "override classifier threshold");
  bench->add_flag("--no-address", bench_opts->no_address, "omit the address from inputs");
  bench->add_option("--workers", bench_opts->workers, "parallel workers for stub ingest");
  bench->add_option("--seed", bench_opts->seed, "run seed");
  bench->callback([bench_opts, &rc] { rc = dispatch([&] { return cmd_bench(*bench_opts); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return rc;
}
