#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/error.hpp"
#include "dqa/sha256.hpp"

namespace dqa {

struct ChatRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.0;
  std::optional<int> max_tokens;
};

struct ChatResponse {
  std::string text;
  std::string model_id;
  bool cached = false;
  std::optional<std::int64_t> latency_ms;
  int retries = 0;
};

enum class ProviderStatus { Ok, Transient, Permanent };

struct ProviderResult {
  ProviderStatus status = ProviderStatus::Ok;
  std::string text;  // reply on Ok, error message otherwise
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderResult complete(const ChatRequest& req) = 0;
};

// Scripted provider for tests and offline runs. Replies are served either
// from a fixed callback or a sequence; tracks peak concurrent calls so the
// gateway's in-flight bound is assertable.
class MockProvider : public Provider {
 public:
  explicit MockProvider(std::string fixed_reply)
      : handler_([reply = std::move(fixed_reply)](const ChatRequest&, int) {
          return ProviderResult{ProviderStatus::Ok, reply};
        }) {}

  explicit MockProvider(std::vector<ProviderResult> sequence, bool wrap = false)
      : handler_([seq = std::move(sequence), wrap](const ChatRequest&, int call) {
          if (seq.empty()) return ProviderResult{ProviderStatus::Permanent, "mock: empty script"};
          std::size_t i = std::size_t(call);
          if (i >= seq.size()) {
            if (!wrap) return ProviderResult{ProviderStatus::Permanent, "mock: script exhausted"};
            i %= seq.size();
          }
          return seq[i];
        }) {}

  explicit MockProvider(std::function<ProviderResult(const ChatRequest&, int)> handler)
      : handler_(std::move(handler)) {}

  void set_delay(std::chrono::milliseconds d) { delay_ = d; }

  ProviderResult complete(const ChatRequest& req) override {
    int current = ++in_flight_;
    int peak = peak_in_flight_.load();
    while (current > peak && !peak_in_flight_.compare_exchange_weak(peak, current)) {
    }
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    int call = call_count_++;
    ProviderResult r = handler_(req, call);
    --in_flight_;
    return r;
  }

  int calls() const { return call_count_.load(); }
  int peak_in_flight() const { return peak_in_flight_.load(); }

 private:
  std::function<ProviderResult(const ChatRequest&, int)> handler_;
  std::atomic<int> call_count_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_in_flight_{0};
  std::chrono::milliseconds delay_{0};
};

struct GatewayConfig {
  int max_in_flight = 4;
  int retry_cap = 3;                // transient retries per request
  int backoff_initial_ms = 1000;    // 1s, 2s, 4s, ...
  std::string cache_path;           // empty -> no persistent cache
  bool offline = false;             // serve cache only; misses are errors
};

// Provider-agnostic completion gateway: bounded concurrency, exponential
// backoff on transient failures, and an append-only JSONL replay cache keyed
// by (model, prompt, temperature, run_index).
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayConfig cfg)
      : provider_(std::move(provider)), cfg_(std::move(cfg)), in_flight_slots_(cfg_.max_in_flight) {
    if (cfg_.max_in_flight < 1) throw Error("gateway: max_in_flight must be >= 1");
    if (!cfg_.cache_path.empty()) load_cache();
  }

  static std::string cache_key(const ChatRequest& req, int run_index) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.6g", req.temperature);
    std::string material = req.model_id;
    material += '\x1f';
    material += temp;
    material += '\x1f';
    material += std::to_string(run_index);
    material += '\x1f';
    material += req.prompt;
    return Sha256::hash_hex(material);
  }

  ChatResponse complete(const ChatRequest& req) {
    if (req.prompt.empty()) throw Error("gateway: empty prompt");
    if (!provider_) throw Error("gateway: no provider configured");

    const auto started = std::chrono::steady_clock::now();
    ProviderResult result;
    int attempts = 0;
    for (;;) {
      {
        in_flight_slots_.acquire();
        struct Release {
          std::counting_semaphore<4096>& s;
          ~Release() { s.release(); }
        } release{in_flight_slots_};
        result = provider_->complete(req);
      }
      if (result.status == ProviderStatus::Ok) break;
      if (result.status == ProviderStatus::Permanent)
        throw Error("provider error: " + result.text);
      if (attempts >= cfg_.retry_cap)
        throw Error("provider retry budget exhausted after " + std::to_string(attempts) +
                    " retries: " + result.text);
      std::this_thread::sleep_for(
          std::chrono::milliseconds(std::int64_t(cfg_.backoff_initial_ms) << attempts));
      ++attempts;
    }

    ChatResponse resp;
    resp.text = result.text;
    resp.model_id = req.model_id;
    resp.cached = false;
    resp.retries = attempts;
    resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    return resp;
  }

  // run_index distinguishes repeated sampling of the same prompt (judge runs,
  // parse retries); it is part of the cache key.
  ChatResponse cached_complete(const ChatRequest& req, int run_index) {
    const std::string key = cache_key(req, run_index);
    {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        ChatResponse resp;
        resp.text = it->second;
        resp.model_id = req.model_id;
        resp.cached = true;
        return resp;
      }
    }
    if (cfg_.offline)
      throw Error("cache miss with provider disabled (key " + key.substr(0, 12) + "...)");

    ChatResponse resp = complete(req);
    {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      auto [it, inserted] = cache_.emplace(key, resp.text);
      if (inserted && !cfg_.cache_path.empty()) append_entry(key, req.model_id, resp.text);
    }
    return resp;
  }

  const std::vector<std::string>& cache_warnings() const { return cache_warnings_; }
  std::size_t cache_size() const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.size();
  }

 private:
  void load_cache() {
    std::ifstream in(cfg_.cache_path, std::ios::binary);
    if (!in) return;  // cache starts empty; created on first write
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("key") || !j.contains("response_text")) {
        cache_warnings_.push_back("cache line " + std::to_string(lineno) + " corrupt, skipped");
        continue;
      }
      cache_[j["key"].get<std::string>()] = j["response_text"].get<std::string>();
    }
  }

  void append_entry(const std::string& key, const std::string& model_id,
                    const std::string& text) {
    std::ofstream out(cfg_.cache_path, std::ios::binary | std::ios::app);
    if (!out) {
      cache_warnings_.push_back("cannot append to cache file " + cfg_.cache_path);
      return;
    }
    char stamp[32];
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    nlohmann::json j{{"key", key},
                     {"model_id", model_id},
                     {"response_text", text},
                     {"created_at", stamp}};
    out << j.dump() << '\n';
  }

  std::shared_ptr<Provider> provider_;
  GatewayConfig cfg_;
  std::counting_semaphore<4096> in_flight_slots_;
  mutable std::mutex cache_mutex_;
  std::unordered_map<std::string, std::string> cache_;
  std::vector<std::string> cache_warnings_;
};

}  // namespace dqa
