#pragma once

#include <string>

#include "locavqg/util/strings.hpp"

namespace locavqg::engage {

// Anything that can assign P(engaging) to a question. Trailing whitespace is
// stripped before scoring so "text" and "text  " always score identically.
class Scorer {
 public:
  virtual ~Scorer() = default;

  double score(const std::string& question) const { return score_clean(trim(question)); }

  virtual double threshold() const = 0;

  bool accepts(const std::string& question) const { return score(question) >= threshold(); }

 protected:
  virtual double score_clean(const std::string& question) const = 0;
};

// Fixed-threshold wrapper around an arbitrary scoring function; handy for
// tests and stub pipelines.
class CallbackScorer : public Scorer {
 public:
  using Fn = double (*)(const std::string&);

  CallbackScorer(Fn fn, double threshold) : fn_(fn), threshold_(threshold) {}

  double threshold() const override { return threshold_; }

 protected:
  double score_clean(const std::string& question) const override { return fn_(question); }

 private:
  Fn fn_;
  double threshold_;
};

}  // namespace locavqg::engage
