#pragma once

#include <string>
#include <vector>

#include "locavqg/core/types.hpp"
#include "locavqg/util/rng.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::qgen {

inline constexpr std::string_view kInputPrefix = "generate questions:";

struct QGExample {
  std::string task_id;
  std::string input_text;
  std::string target_text;
};

// Flattens a captioned task into the generation input. Mirrors the prompt
// layout so the distilled model sees the same surface form the teacher did.
inline std::string build_input_text(const CaptionedTask& ct, bool include_address = true) {
  std::string out{kInputPrefix};
  if (include_address && !ct.address.empty())
    out += " You are currently driving on " + trim(flatten_newlines(ct.address)) + ".";
  for (auto d : kDirections) {
    out += " On your ";
    out += direction_title(d);
    out += ", ";
    out += trim(flatten_newlines(ct.captions[static_cast<size_t>(d)]));
    out += ".";
  }
  return out;
}

struct TrainingSet {
  std::vector<QGExample> examples;
  std::vector<std::string> skipped_task_ids;  // records that had no kept questions
};

// Samples up to `questions_per_task` kept questions per record, seeded so the
// draw is reproducible. Records with no questions are skipped and reported.
inline TrainingSet build_training_set(const std::vector<DatasetRecord>& records,
                                      int questions_per_task, uint64_t seed,
                                      bool include_address = true) {
  if (questions_per_task < 1)
    throw std::invalid_argument("build_training_set: questions_per_task must be >= 1");
  TrainingSet out;
  Rng rng(seed);
  for (const auto& rec : records) {
    if (rec.questions.empty()) {
      out.skipped_task_ids.push_back(rec.captioned.task.task_id);
      continue;
    }
    std::string input = build_input_text(rec.captioned, include_address);
    size_t want = std::min<size_t>(static_cast<size_t>(questions_per_task), rec.questions.size());
    auto picks = rng_sample_indices(rng, rec.questions.size(), want);
    for (size_t i : picks)
      out.examples.push_back({rec.captioned.task.task_id, input, rec.questions[i].text});
  }
  return out;
}

}  // namespace locavqg::qgen
