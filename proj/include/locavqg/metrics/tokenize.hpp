#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "locavqg/util/strings.hpp"

namespace locavqg::metrics {

// Policy "basic-v1": case-folded tokens split on whitespace and punctuation.
// Bytes >= 0x80 (multi-byte UTF-8) count as word characters.
inline constexpr const char* kTokenPolicy = "basic-v1";

// Policy "sent-v1": rule-based splitting on runs of terminal punctuation.
inline constexpr const char* kSentencePolicy = "sent-v1";

inline bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::string current;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    current.push_back(c);
    if (c == '.' || c == '?' || c == '!') {
      while (i + 1 < text.size() &&
             (text[i + 1] == '.' || text[i + 1] == '?' || text[i + 1] == '!')) {
        current.push_back(text[++i]);
      }
      std::string s = trim(current);
      if (!s.empty()) sentences.push_back(s);
      current.clear();
    }
    ++i;
  }
  std::string tail = trim(current);
  if (!tail.empty()) sentences.push_back(tail);
  return sentences;
}

using Stopwords = std::unordered_set<std::string>;

inline Stopwords load_stopwords(const std::string& file_content) {
  Stopwords out;
  for (const auto& line : split(file_content, '\n')) {
    std::string w = trim(line);
    if (w.empty() || w[0] == '#') continue;
    out.insert(to_lower(w));
  }
  return out;
}

}  // namespace locavqg::metrics
