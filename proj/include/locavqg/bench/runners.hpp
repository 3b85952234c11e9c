#pragma once

#include <memory>
#include <string>
#include <thread>

#include "locavqg/bench/latency.hpp"
#include "locavqg/engage/scorer.hpp"
#include "locavqg/qgen/decode.hpp"
#include "locavqg/qgen/model.hpp"

namespace locavqg::bench {

// Synthetic runner with known per-call sleeps; calibrates the harness.
class SleepRunner : public ModelRunner {
 public:
  SleepRunner(double load_ms, double infer_ms, double post_filter_ms = 0.0,
              int attempts = 1)
      : load_ms_(load_ms), infer_ms_(infer_ms), post_filter_ms_(post_filter_ms),
        attempts_(attempts) {}

  std::string name() const override { return "sleep-stub"; }

  void load() override { sleep_ms(load_ms_); }

  std::string infer(const CaptionedTask&) override {
    sleep_ms(infer_ms_);
    return "What do you think makes this street memorable?";
  }

  bool filtered() const override { return post_filter_ms_ > 0.0; }

  int post_filter(const CaptionedTask&) override {
    sleep_ms(post_filter_ms_);
    return attempts_;
  }

 private:
  static void sleep_ms(double ms) {
    if (ms > 0.0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }

  double load_ms_, infer_ms_, post_filter_ms_;
  int attempts_;
};

// Real runner over a trained generator checkpoint; with a scorer it also
// times the filtered sample-until-accepted loop.
class QGenRunner : public ModelRunner {
 public:
  QGenRunner(std::string checkpoint_dir, std::shared_ptr<const engage::Scorer> scorer,
             qgen::DecodeConfig decode, uint64_t seed, int max_attempts = 10,
             bool include_address = true)
      : dir_(std::move(checkpoint_dir)), scorer_(std::move(scorer)), decode_(decode),
        seed_(seed), max_attempts_(max_attempts), include_address_(include_address) {}

  std::string name() const override {
    return model_ ? "qgen-" + model_->tier : "qgen";
  }

  void load() override {
    model_ = std::make_unique<qgen::QGModel>(qgen::load_model(dir_));
  }

  std::string infer(const CaptionedTask& task) override {
    auto out = qgen::generate(*model_, task, decode_, next_seed());
    return out.question.text;
  }

  bool filtered() const override { return scorer_ != nullptr; }

  int post_filter(const CaptionedTask& task) override {
    auto out = qgen::filtered_generate(*model_, *scorer_, task, decode_, next_seed(),
                                       max_attempts_, QuestionSource::student,
                                       include_address_);
    return out.attempts;
  }

 private:
  uint64_t next_seed() { return seed_ + counter_++; }

  std::string dir_;
  std::shared_ptr<const engage::Scorer> scorer_;
  qgen::DecodeConfig decode_;
  uint64_t seed_;
  int max_attempts_;
  bool include_address_;
  uint64_t counter_ = 0;
  std::unique_ptr<qgen::QGModel> model_;
};

}  // namespace locavqg::bench
