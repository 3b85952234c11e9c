#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "locavqg/promptgen/llm.hpp"

namespace locavqg::promptgen {

// Chat-completions HTTP adapter. The API key is read from the environment
// only (never from config files or flags).
class HttpLlm : public LlmClient {
 public:
  static constexpr const char* kApiKeyEnv = "LOCAVQG_LLM_API_KEY";

  HttpLlm(std::string host, std::string path, std::string model)
      : host_(std::move(host)), path_(std::move(path)), model_(std::move(model)) {
    const char* key = std::getenv(kApiKeyEnv);
    if (!key || !*key)
      throw std::runtime_error(std::string("remote-llm backend requires ") + kApiKeyEnv);
    api_key_ = key;
  }

  std::string id() const override { return "remote-llm"; }

  Response complete(const Request& request) override {
    nlohmann::json payload{
        {"model", model_},
        {"temperature", request.temperature},
        {"presence_penalty", request.presence_penalty},
        {"messages",
         {{{"role", "system"}, {"content", request.prompts.system_prompt}},
          {{"role", "user"}, {"content", request.prompts.chat_prompt}}}},
    };
    httplib::Client client(host_);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(path_, headers, payload.dump(), "application/json");
    if (!res)
      throw std::runtime_error("remote-llm: transport error");
    if (res->status != 200)
      throw std::runtime_error("remote-llm: HTTP " + std::to_string(res->status));
    auto body = nlohmann::json::parse(res->body);
    Response out;
    out.text = body.at("choices").at(0).at("message").at("content").get<std::string>();
    if (body.contains("usage") && body["usage"].contains("total_tokens"))
      out.tokens_used = body["usage"]["total_tokens"].get<int>();
    return out;
  }

 private:
  std::string host_, path_, model_, api_key_;
};

}  // namespace locavqg::promptgen
