#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "locavqg/util/strings.hpp"

namespace locavqg::promptgen {

struct ParsedQuestions {
  std::vector<std::string> questions;
  bool unparseable = false;  // zero items found; raw retained below
  std::string raw;
};

namespace detail {

// Matches a leading "N." or "N)" enumerator; returns the offset just past it
// (and any following spaces), or npos.
inline size_t enumerator_end(const std::string& line) {
  size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  size_t digits = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    ++i;
    ++digits;
  }
  if (digits == 0 || i >= line.size()) return std::string::npos;
  if (line[i] != '.' && line[i] != ')') return std::string::npos;
  ++i;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return i;
}

}  // namespace detail

// Splits a numbered-list response into questions. Continuation lines attach
// to the current item; text before the first enumerator (greetings etc.) is
// dropped. The parser never fabricates items, so the count can differ from
// whatever was requested.
inline ParsedQuestions parse_questions(const std::string& raw, int expected = 10) {
  (void)expected;
  ParsedQuestions out;
  out.raw = raw;
  std::string current;
  auto flush = [&] {
    std::string t = trim(current);
    if (!t.empty()) out.questions.push_back(t);
    current.clear();
  };
  bool in_item = false;
  for (const auto& line : split(raw, '\n')) {
    size_t body = detail::enumerator_end(line);
    if (body != std::string::npos) {
      if (in_item) flush();
      in_item = true;
      current = line.substr(body);
    } else if (in_item && !trim(line).empty()) {
      current += " " + trim(line);
    }
  }
  if (in_item) flush();
  out.unparseable = out.questions.empty();
  return out;
}

// Test-only inverse of parse_questions for single-line items.
inline std::string format_questions(const std::vector<std::string>& questions) {
  std::string out;
  for (size_t i = 0; i < questions.size(); ++i)
    out += std::to_string(i + 1) + ". " + questions[i] + "\n";
  return out;
}

}  // namespace locavqg::promptgen
