#pragma once

#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/promptgen/prompts.hpp"
#include "locavqg/util/fs.hpp"
#include "locavqg/util/retry.hpp"
#include "locavqg/util/rng.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::promptgen {

struct LlmConfig {
  std::string backend = "stub";  // "stub" | "remote-llm"
  double temperature = 0.7;
  double presence_penalty = 0.1;
  int max_questions = 10;
  uint64_t seed = 0;  // stub backend only
  RetryPolicy retry;

  void validate() const {
    if (temperature < 0.0) throw std::invalid_argument("llm: temperature must be >= 0");
    if (max_questions < 1) throw std::invalid_argument("llm: max_questions must be >= 1");
    if (backend != "stub" && backend != "remote-llm")
      throw std::invalid_argument("llm: unknown backend '" + backend + "'");
  }

  std::string fingerprint() const {
    uint64_t h = fnv1a(backend);
    h = fnv1a("|t=" + std::to_string(temperature), h);
    h = fnv1a("|pp=" + std::to_string(presence_penalty), h);
    h = fnv1a("|n=" + std::to_string(max_questions), h);
    h = fnv1a("|s=" + std::to_string(seed), h);
    return hex64(h);
  }
};

class LlmClient {
 public:
  struct Request {
    PromptPair prompts;
    double temperature = 0.7;
    double presence_penalty = 0.1;
    int n_questions = 10;
  };

  struct Response {
    std::string text;
    std::optional<int> tokens_used;
  };

  virtual ~LlmClient() = default;
  virtual std::string id() const = 0;
  // Throws on backend failure; the caller applies the retry policy.
  virtual Response complete(const Request& request) = 0;
};

// Deterministic offline backend. Draws a mix of engagement-style and
// factoid-style questions from template banks, filling slots with phrases
// lifted from the chat prompt, so downstream filtering has real work to do.
class StubLlm : public LlmClient {
 public:
  explicit StubLlm(uint64_t seed = 0) : seed_(seed) {}

  std::string id() const override { return "stub"; }

  Response complete(const Request& request) override {
    std::vector<std::string> slots = extract_slots(request.prompts.chat_prompt);
    Rng rng(fnv1a(request.prompts.chat_prompt, fnv1a(request.prompts.system_prompt)) ^ seed_);

    static const std::vector<std::string> engaging = {
        "Did you know that % has a story most visitors never hear?",
        "Can you guess what % might have looked like fifty years ago?",
        "What do you think makes % such a memorable sight?",
        "Have you ever wondered why % ended up right here?",
        "How do you imagine % changes when the seasons turn?",
        "If you could stop anywhere near %, where would you go first?",
    };
    static const std::vector<std::string> factoid = {
        "In what year was % first recorded?",
        "What is the exact height of %?",
        "Which document established %?",
        "What is the official population figure for the area around %?",
    };

    std::string out;
    for (int i = 0; i < request.n_questions; ++i) {
      const auto& bank = rng_double(rng) < 0.7 ? engaging : factoid;
      std::string q = bank[rng_index(rng, bank.size())];
      const std::string& slot = slots[rng_index(rng, slots.size())];
      q.replace(q.find('%'), 1, slot);
      out += std::to_string(i + 1) + ". " + q + "\n";
    }
    Response r;
    r.text = out;
    r.tokens_used = static_cast<int>(out.size() / 4);
    return r;
  }

 private:
  // Pulls the caption/address phrases back out of the known prompt shape;
  // falls back to a generic phrase if nothing matches.
  static std::vector<std::string> extract_slots(const std::string& chat) {
    std::vector<std::string> out;
    auto grab = [&](const std::string& lead) {
      size_t at = chat.find(lead);
      if (at == std::string::npos) return;
      at += lead.size();
      size_t end = chat.find(". ", at);
      if (end == std::string::npos) end = chat.find('.', at);
      if (end != std::string::npos && end > at) out.push_back(chat.substr(at, end - at));
    };
    grab("You are currently driving on ");
    grab("On your North, ");
    grab("On your East, ");
    grab("On your South, ");
    grab("On your West, ");
    if (out.empty()) out.push_back("this part of town");
    return out;
  }

  uint64_t seed_;
};

// An LLM client that always throws; for wiring tests.
class FailingLlm : public LlmClient {
 public:
  explicit FailingLlm(int fail_times = -1) : remaining_(fail_times) {}

  std::string id() const override { return "failing-stub"; }

  Response complete(const Request& request) override {
    ++calls_;
    if (remaining_ != 0) {
      if (remaining_ > 0) --remaining_;
      throw std::runtime_error("simulated backend failure");
    }
    return StubLlm(0).complete(request);
  }

  int calls() const { return calls_; }

 private:
  int remaining_;
  int calls_ = 0;
};

// On-disk response cache keyed by hash(prompts, config); one file per key.
class ResponseCache {
 public:
  explicit ResponseCache(std::string dir) : dir_(std::move(dir)) {}

  static std::string key_for(const PromptPair& prompts, const LlmConfig& config) {
    uint64_t h = fnv1a(prompts.system_prompt);
    h = fnv1a("\x1e", h);
    h = fnv1a(prompts.chat_prompt, h);
    h = fnv1a("\x1e", h);
    h = fnv1a(config.fingerprint(), h);
    return hex64(h);
  }

  std::optional<std::string> get(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    std::string path = dir_ + "/" + key + ".txt";
    if (!file_exists(path)) return std::nullopt;
    return read_file(path);
  }

  void put(const std::string& key, const std::string& text) {
    std::lock_guard<std::mutex> lock(mu_);
    write_file(dir_ + "/" + key + ".txt", text);
  }

 private:
  std::string dir_;
  mutable std::mutex mu_;
};

struct RawGeneration {
  bool ok = false;
  std::string text;
  std::optional<int> tokens_used;
  bool from_cache = false;
  int calls = 0;
  std::string error;  // set when flagged ungenerated
};

// One request per task; failures after the retry budget come back flagged
// rather than thrown so a batch run can keep going.
inline RawGeneration generate_raw(const PromptPair& prompts, const LlmConfig& config,
                                  LlmClient& client, ResponseCache* cache = nullptr) {
  config.validate();
  std::string key;
  if (cache) {
    key = ResponseCache::key_for(prompts, config);
    if (auto hit = cache->get(key)) {
      RawGeneration out;
      out.ok = true;
      out.text = *hit;
      out.from_cache = true;
      return out;
    }
  }

  RawGeneration out;
  LlmClient::Request request{prompts, config.temperature, config.presence_penalty,
                             config.max_questions};
  auto result = with_retries(config.retry, [&](std::string& error) {
    try {
      auto response = client.complete(request);
      out.text = response.text;
      out.tokens_used = response.tokens_used;
      return true;
    } catch (const std::exception& e) {
      error = e.what();
      return false;
    }
  });
  out.calls = result.calls;
  out.ok = result.ok;
  if (!result.ok) {
    out.error = result.error;
    return out;
  }
  if (cache) cache->put(key, out.text);
  return out;
}

}  // namespace locavqg::promptgen
