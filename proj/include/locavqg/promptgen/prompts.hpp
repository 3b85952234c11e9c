#pragma once

#include <string>

#include "locavqg/core/types.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::promptgen {

inline constexpr std::string_view kSystemPrompt =
    "You are a tour guide and you are driving in a car with your tourists. "
    "You want to engage with them with any kind of information you have "
    "around you.";

struct PromptPair {
  std::string system_prompt;
  std::string chat_prompt;
};

// Chat prompt template, filled in N, E, S, W order. The missing period after
// "surroundings" matches the template exactly; do not fix it. Embedded
// newlines in captions or the address are collapsed to single spaces first.
inline PromptPair build_prompts(const CaptionedTask& ct, bool include_address = true,
                                int n_questions = 10) {
  auto clean = [](const std::string& s) { return trim(flatten_newlines(s)); };
  std::string chat = "Here are some descriptions of your surroundings ";
  if (include_address)
    chat += "You are currently driving on " + clean(ct.address) + ". ";
  chat += "On your North, " + clean(ct.captions[static_cast<size_t>(Direction::north)]) + ". ";
  chat += "On your East, " + clean(ct.captions[static_cast<size_t>(Direction::east)]) + ". ";
  chat += "On your South, " + clean(ct.captions[static_cast<size_t>(Direction::south)]) + ". ";
  chat += "On your West, " + clean(ct.captions[static_cast<size_t>(Direction::west)]) + ". ";
  chat += "Based on those descriptions, please ask " + std::to_string(n_questions) +
          " engaging questions.";
  return {std::string(kSystemPrompt), chat};
}

}  // namespace locavqg::promptgen
