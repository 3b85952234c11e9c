#pragma once

#include <cctype>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locavqg/metrics/tokenize.hpp"

namespace locavqg::metrics {

// A constituency parse node. Leaves carry the surface token in `label`.
struct ParseNode {
  std::string label;
  std::vector<ParseNode> children;

  bool is_leaf() const { return children.empty(); }
};

// Parses one bracketed tree, e.g. "(S (NP (DT the) (NN dog)) (VP (VBZ barks)))".
// Pre-terminal tokens become leaf nodes.
inline ParseNode parse_bracketed(std::string_view text) {
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto read_symbol = [&] {
    size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    if (pos == start) throw std::runtime_error("parse tree: expected symbol");
    return std::string(text.substr(start, pos - start));
  };
  std::function<ParseNode()> parse_node = [&]() -> ParseNode {
    skip_ws();
    if (pos >= text.size() || text[pos] != '(')
      throw std::runtime_error("parse tree: expected '('");
    ++pos;
    skip_ws();
    ParseNode node;
    node.label = read_symbol();
    skip_ws();
    while (pos < text.size() && text[pos] != ')') {
      if (text[pos] == '(') {
        node.children.push_back(parse_node());
      } else {
        ParseNode leaf;
        leaf.label = read_symbol();
        node.children.push_back(std::move(leaf));
      }
      skip_ws();
    }
    if (pos >= text.size()) throw std::runtime_error("parse tree: missing ')'");
    ++pos;  // consume ')'
    return node;
  };
  ParseNode root = parse_node();
  skip_ws();
  if (pos != text.size()) throw std::runtime_error("parse tree: trailing input");
  return root;
}

namespace detail {

inline void yngve_walk(const ParseNode& node, long long depth,
                       long long& depth_sum, long long& leaf_count) {
  if (node.is_leaf()) {
    depth_sum += depth;
    ++leaf_count;
    return;
  }
  long long n = static_cast<long long>(node.children.size());
  for (long long i = 0; i < n; ++i)
    yngve_walk(node.children[i], depth + (n - 1 - i), depth_sum, leaf_count);
}

}  // namespace detail

// Yngve score of one sentence: for each word, the depth is the sum over its
// ancestors of the number of right siblings pending at that step (the stack
// size during a top-down left-to-right derivation). The sentence score is the
// word-depth sum divided by the number of words.
inline double yngve_sentence_score(const ParseNode& tree) {
  long long depth_sum = 0, leaves = 0;
  detail::yngve_walk(tree, 0, depth_sum, leaves);
  if (leaves == 0) throw std::invalid_argument("yngve: tree has no leaves");
  return static_cast<double>(depth_sum) / static_cast<double>(leaves);
}

// Pluggable constituency parser backend.
class ConstituencyParser {
 public:
  virtual ~ConstituencyParser() = default;
  virtual std::string id() const = 0;
  virtual std::optional<ParseNode> parse(const std::vector<std::string>& tokens) = 0;
};

// Fallback backend: builds a strictly right-branching binary tree over the
// tokens. Crude, but deterministic and dependency-free; swap in a real parser
// for publication-grade numbers.
class RightBranchingParser : public ConstituencyParser {
 public:
  std::string id() const override { return "right-branching-v1"; }

  std::optional<ParseNode> parse(const std::vector<std::string>& tokens) override {
    if (tokens.empty()) return std::nullopt;
    return build(tokens, 0);
  }

 private:
  ParseNode build(const std::vector<std::string>& tokens, size_t i) {
    ParseNode node;
    node.label = i == 0 ? "S" : "X";
    ParseNode leaf;
    leaf.label = tokens[i];
    node.children.push_back(std::move(leaf));
    if (i + 1 < tokens.size()) node.children.push_back(build(tokens, i + 1));
    return node;
  }
};

// Reads a file of bracketed trees, one per line, as a parse source for
// corpora parsed offline by an external constituency parser.
class BracketedFileParses {
 public:
  explicit BracketedFileParses(const std::string& content) {
    for (const auto& line : split(content, '\n')) {
      std::string t = trim(line);
      if (t.empty()) continue;
      trees_.push_back(parse_bracketed(t));
    }
  }
  const std::vector<ParseNode>& trees() const { return trees_; }

 private:
  std::vector<ParseNode> trees_;
};

struct YngveResult {
  double mean_score = 0.0;
  size_t sentences_scored = 0;
  size_t sentences_skipped = 0;
  std::string parser_id;
};

// Mean normalized Yngve score over every sentence of every question in the
// corpus. Unparseable sentences are skipped and counted.
inline YngveResult yngve(const std::vector<std::string>& corpus,
                         ConstituencyParser& parser) {
  YngveResult result;
  result.parser_id = parser.id();
  double sum = 0.0;
  for (const auto& question : corpus) {
    for (const auto& sentence : split_sentences(question)) {
      auto tokens = tokenize(sentence);
      if (tokens.empty()) continue;
      auto tree = parser.parse(tokens);
      if (!tree) {
        ++result.sentences_skipped;
        continue;
      }
      sum += yngve_sentence_score(*tree);
      ++result.sentences_scored;
    }
  }
  if (result.sentences_scored > 0) result.mean_score = sum / result.sentences_scored;
  return result;
}

// Same computation over externally supplied trees.
inline YngveResult yngve_from_trees(const std::vector<ParseNode>& trees,
                                    const std::string& parser_id) {
  YngveResult result;
  result.parser_id = parser_id;
  double sum = 0.0;
  for (const auto& tree : trees) {
    sum += yngve_sentence_score(tree);
    ++result.sentences_scored;
  }
  if (result.sentences_scored > 0) result.mean_score = sum / result.sentences_scored;
  return result;
}

}  // namespace locavqg::metrics
