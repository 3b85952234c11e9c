#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "locavqg/util/strings.hpp"

namespace locavqg::nn {

// Word-level tokenizer with the usual specials. Token ids are frozen at
// build time; the fingerprint identifies the vocabulary so distillation can
// verify that teacher and student share one.
class Tokenizer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Tokenizer() = default;

  static std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (unsigned char c : text) {
      if (std::isspace(c)) {
        if (!current.empty()) { out.push_back(current); current.clear(); }
      } else {
        current.push_back(static_cast<char>(c));
      }
    }
    if (!current.empty()) out.push_back(current);
    return out;
  }

  // Builds a frequency-ranked vocabulary (ties broken lexicographically so
  // the result is independent of input order permutations).
  static Tokenizer build(const std::vector<std::string>& texts, size_t max_vocab = 8000) {
    std::unordered_map<std::string, size_t> freq;
    for (const auto& t : texts)
      for (const auto& w : words(t)) ++freq[w];
    std::vector<std::pair<std::string, size_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Tokenizer tk;
    tk.id_to_token_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
    for (const auto& [word, count] : ranked) {
      if (tk.id_to_token_.size() >= max_vocab) break;
      tk.id_to_token_.push_back(word);
    }
    tk.index();
    return tk;
  }

  std::vector<int> encode(const std::string& text) const {
    std::vector<int> ids;
    for (const auto& w : words(text)) {
      auto it = token_to_id_.find(w);
      ids.push_back(it == token_to_id_.end() ? kUnk : it->second);
    }
    return ids;
  }

  std::string decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
      if (id == kPad || id == kBos || id == kEos) continue;
      if (id < 0 || id >= static_cast<int>(id_to_token_.size()))
        throw std::out_of_range("tokenizer: id out of range");
      if (!out.empty()) out.push_back(' ');
      out += id_to_token_[id];
    }
    return out;
  }

  int vocab_size() const { return static_cast<int>(id_to_token_.size()); }

  std::string fingerprint() const {
    uint64_t h = 1469598103934665603ull;
    for (const auto& t : id_to_token_) {
      h = fnv1a(t, h);
      h = fnv1a("\x1f", h);
    }
    return hex64(h);
  }

  // One token per line; ids are line numbers.
  std::string serialize() const {
    std::ostringstream out;
    for (const auto& t : id_to_token_) out << t << "\n";
    return out.str();
  }

  static Tokenizer deserialize(const std::string& content) {
    Tokenizer tk;
    for (const auto& line : split(content, '\n')) {
      if (line.empty()) continue;
      tk.id_to_token_.push_back(line);
    }
    if (tk.id_to_token_.size() < 4 || tk.id_to_token_[0] != "<pad>")
      throw std::runtime_error("tokenizer: malformed vocabulary file");
    tk.index();
    return tk;
  }

 private:
  void index() {
    token_to_id_.clear();
    for (size_t i = 0; i < id_to_token_.size(); ++i)
      token_to_id_[id_to_token_[i]] = static_cast<int>(i);
  }

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
};

}  // namespace locavqg::nn
