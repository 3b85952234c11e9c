#pragma once

#include <chrono>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "locavqg/core/types.hpp"

namespace locavqg::bench {

// A model under latency test. `post_filter` runs the classifier accept/retry
// loop and returns the attempts it used (>= 1); only filtered models have one.
class ModelRunner {
 public:
  virtual ~ModelRunner() = default;
  virtual std::string name() const = 0;
  virtual void load() = 0;
  virtual std::string infer(const CaptionedTask& task) = 0;
  virtual bool filtered() const { return false; }
  virtual int post_filter(const CaptionedTask&) { return 0; }
};

struct LatencyReport {
  std::string model;
  double load_seconds = 0.0;
  int trials = 0;
  int warmup = 0;
  std::vector<double> inference_samples;    // per retained trial, seconds
  std::vector<double> post_filter_samples;  // present only for filtered models
  std::vector<int> attempts;                // per retained trial, filtered only
  std::string hardware;
  std::string timing_note = "end-to-end text-in to text-out, monotonic clock";

  // The reported means are, by definition, the arithmetic means of the
  // retained samples.
  double mean_inference_seconds() const {
    return std::accumulate(inference_samples.begin(), inference_samples.end(), 0.0) /
           static_cast<double>(inference_samples.size());
  }
  std::optional<double> mean_post_filter_seconds() const {
    if (post_filter_samples.empty()) return std::nullopt;
    return std::accumulate(post_filter_samples.begin(), post_filter_samples.end(), 0.0) /
           static_cast<double>(post_filter_samples.size());
  }
  std::optional<double> mean_attempts() const {
    if (attempts.empty()) return std::nullopt;
    return std::accumulate(attempts.begin(), attempts.end(), 0.0) /
           static_cast<double>(attempts.size());
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"model", model},
                     {"load_seconds", load_seconds},
                     {"trials", trials},
                     {"warmup_excluded", warmup},
                     {"mean_inference_seconds", mean_inference_seconds()},
                     {"inference_samples", inference_samples},
                     {"hardware", hardware},
                     {"timing_note", timing_note}};
    if (auto pf = mean_post_filter_seconds()) {
      j["mean_post_filter_seconds"] = *pf;
      j["post_filter_samples"] = post_filter_samples;
      j["mean_attempts"] = *mean_attempts();
    }
    return j;
  }
};

inline std::string hardware_descriptor() {
  std::string model = "unknown-cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("model name", 0) == 0) {
      auto pos = line.find(':');
      if (pos != std::string::npos) model = trim(line.substr(pos + 1));
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) + " cores";
}

// Loads once (cold start), then cycles tasks round-robin. Warm-up trials are
// excluded from the retained samples; the measurement loop is single-threaded.
inline LatencyReport measure(ModelRunner& runner,
                             const std::vector<CaptionedTask>& tasks, int trials,
                             int warmup = 3) {
  if (trials < 1) throw std::invalid_argument("measure: trials must be >= 1");
  if (tasks.empty()) throw std::invalid_argument("measure: no tasks");
  using clock = std::chrono::steady_clock;
  auto seconds_between = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  LatencyReport report;
  report.trials = trials;
  report.warmup = warmup;
  report.hardware = hardware_descriptor();

  auto t0 = clock::now();
  runner.load();
  report.load_seconds = seconds_between(t0, clock::now());
  report.model = runner.name();

  for (int trial = 0; trial < warmup + trials; ++trial) {
    const CaptionedTask& task = tasks[trial % tasks.size()];
    auto a = clock::now();
    runner.infer(task);
    auto b = clock::now();
    int attempts = 0;
    clock::time_point c = b;
    if (runner.filtered()) {
      attempts = runner.post_filter(task);
      c = clock::now();
    }
    if (trial < warmup) continue;
    report.inference_samples.push_back(seconds_between(a, b));
    if (runner.filtered()) {
      report.post_filter_samples.push_back(seconds_between(b, c));
      report.attempts.push_back(attempts);
    }
  }
  return report;
}

}  // namespace locavqg::bench
