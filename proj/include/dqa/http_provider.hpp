#pragma once

// OpenAI-style chat-completions adapter. Kept out of llm.hpp so library
// consumers that only need the gateway/mock do not compile httplib.

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dqa/error.hpp"
#include "dqa/llm.hpp"

namespace dqa {

struct HttpProviderConfig {
  std::string base_url;                       // e.g. https://api.example.com/v1
  std::string path = "/chat/completions";
  std::string credential_env = "DQA_API_KEY";  // env var holding the bearer token
  int timeout_seconds = 120;
};

class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw Error("http provider: endpoint URL required");
    auto scheme_end = cfg_.base_url.find("://");
    std::string rest = scheme_end == std::string::npos ? cfg_.base_url
                                                       : cfg_.base_url.substr(scheme_end + 3);
    auto slash = rest.find('/');
    host_ = cfg_.base_url.substr(0, (scheme_end == std::string::npos ? 0 : scheme_end + 3) +
                                         (slash == std::string::npos ? rest.size() : slash));
    base_path_ = slash == std::string::npos ? "" : rest.substr(slash);
    if (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }

  ProviderResult complete(const ChatRequest& req) override {
    nlohmann::json body{{"model", req.model_id},
                        {"messages", nlohmann::json::array({nlohmann::json{
                                         {"role", "user"}, {"content", req.prompt}}})},
                        {"temperature", req.temperature}};
    if (req.max_tokens) body["max_tokens"] = *req.max_tokens;

    httplib::Client client(host_);
    client.set_read_timeout(cfg_.timeout_seconds, 0);
    client.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.credential_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto res = client.Post(base_path_ + cfg_.path, headers, body.dump(), "application/json");
    if (!res) return {ProviderStatus::Transient, "transport: " + httplib::to_string(res.error())};
    if (res->status == 429 || res->status >= 500)
      return {ProviderStatus::Transient, "http " + std::to_string(res->status)};
    if (res->status != 200)
      return {ProviderStatus::Permanent,
              "http " + std::to_string(res->status) + ": " + res->body.substr(0, 200)};

    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) return {ProviderStatus::Permanent, "unparseable provider response"};
    try {
      return {ProviderStatus::Ok, j.at("choices").at(0).at("message").at("content").get<std::string>()};
    } catch (const nlohmann::json::exception&) {
      return {ProviderStatus::Permanent, "unexpected provider response shape"};
    }
  }

 private:
  HttpProviderConfig cfg_;
  std::string host_;       // scheme://host[:port]
  std::string base_path_;  // path prefix from the configured URL
};

}  // namespace dqa
