#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace seqjudge {

struct LlmRequest {
  std::string prompt_id;
  std::string rendered_prompt;
  std::string model;
  double temperature = 0.7;
  double top_p = 1.0;
  std::optional<int> max_tokens;
  int sample_tag = 0;

  /// Throws std::invalid_argument when sampling parameters are out of range
  /// or the prompt is empty.
  void validate() const;

  bool operator==(const LlmRequest&) const = default;
};

enum class ProviderKind { live, replay, scripted_mock };

struct LlmResponse {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long latency_ms = 0;
  ProviderKind provider = ProviderKind::live;

  bool operator==(const LlmResponse&) const = default;
};

struct TranscriptRecord {
  std::string request_key;
  LlmRequest request;
  LlmResponse response;
  std::string timestamp;

  bool operator==(const TranscriptRecord&) const = default;
};

/// Hex SHA-256 over (prompt_id, rendered_prompt, model, temperature, top_p,
/// sample_tag).
std::string request_key(const LlmRequest& r);

std::string to_string(ProviderKind k);
ProviderKind provider_kind_from(const std::string& s);

void to_json(nlohmann::json& j, const LlmRequest& r);
void from_json(const nlohmann::json& j, LlmRequest& r);
void to_json(nlohmann::json& j, const LlmResponse& r);
void from_json(const nlohmann::json& j, LlmResponse& r);
void to_json(nlohmann::json& j, const TranscriptRecord& r);
void from_json(const nlohmann::json& j, TranscriptRecord& r);

class TransportError : public std::runtime_error {
 public:
  TransportError(std::string prompt_id, const std::string& what)
      : std::runtime_error(prompt_id + ": " + what), prompt_id_(std::move(prompt_id)) {}
  const std::string& prompt_id() const { return prompt_id_; }

 private:
  std::string prompt_id_;
};

class ReplayMiss : public std::runtime_error {
 public:
  ReplayMiss(std::string prompt_id, std::string key)
      : std::runtime_error("no transcript record for " + prompt_id + " (key " + key + ")"),
        prompt_id_(std::move(prompt_id)),
        key_(std::move(key)) {}
  const std::string& prompt_id() const { return prompt_id_; }
  const std::string& request_key() const { return key_; }

 private:
  std::string prompt_id_;
  std::string key_;
};

/// A chat-completion backend. Implementations must be safe to call from
/// several threads at once.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual LlmResponse complete(const LlmRequest& r) = 0;
  virtual ProviderKind kind() const = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct HttpProviderOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{120};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  double jitter = 0.2;
  Sleeper sleep;  // defaults to std::this_thread::sleep_for
};

/// OpenAI-compatible `POST <base_url>/chat/completions`.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderOptions options);

  LlmResponse complete(const LlmRequest& r) override;
  ProviderKind kind() const override { return ProviderKind::live; }

  /// Delay before retry `attempt` (0-based), jitter included.
  std::chrono::milliseconds backoff_delay(int attempt);

 private:
  HttpProviderOptions options_;
  std::string host_;    // scheme://host[:port]
  std::string prefix_;  // path part of base_url
  std::mutex rng_mutex_;
  std::uint64_t rng_state_;
};

/// Request body sent to a chat-completions endpoint.
nlohmann::json chat_request_body(const LlmRequest& r);

/// Serves responses from a recorded JSONL transcript.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::filesystem::path& transcript);
  explicit ReplayProvider(const std::vector<TranscriptRecord>& records);

  LlmResponse complete(const LlmRequest& r) override;
  ProviderKind kind() const override { return ProviderKind::replay; }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, LlmResponse> table_;
};

/// One content-matched canned answer for the scripted provider.
struct ScriptRule {
  std::string prompt_id;              // "*" matches every template
  std::vector<std::string> contains;  // all must occur in the rendered prompt
  std::optional<std::set<int>> samples;
  std::string response;
};

/// Deterministic in-process provider. Answers from a FIFO queue while it is
/// non-empty, then from the first matching rule, then from the per-template
/// fallback; anything else is a TransportError.
class ScriptedProvider : public Provider {
 public:
  ScriptedProvider() = default;
  explicit ScriptedProvider(std::vector<ScriptRule> rules,
                            std::map<std::string, std::string> fallback = {});

  static ScriptedProvider from_json(const nlohmann::json& script);
  static ScriptedProvider from_file(const std::filesystem::path& path);
  static std::shared_ptr<ScriptedProvider> shared_from_file(const std::filesystem::path& path);

  void enqueue(std::string text);
  void add_rule(ScriptRule rule);
  void set_fallback(const std::string& prompt_id, std::string text);

  LlmResponse complete(const LlmRequest& r) override;
  ProviderKind kind() const override { return ProviderKind::scripted_mock; }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::mutex mutex_;
  std::deque<std::string> queue_;
  std::vector<ScriptRule> rules_;
  std::map<std::string, std::string> fallback_;
  std::atomic<std::size_t> calls_{0};
};

/// Appends transcript records as JSONL. Keys already present in the file
/// are not written again.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::filesystem::path& path);
  void append(const TranscriptRecord& record);

 private:
  std::mutex mutex_;
  std::filesystem::path path_;
  std::set<std::string> keys_;
};

std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path);

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long calls = 0;
  long latency_ms = 0;

  long total_tokens() const { return prompt_tokens + completion_tokens; }
};

struct GatewayOptions {
  std::size_t max_concurrency = 4;
};

/// Front door for every model call: bounds in-flight requests, records
/// transcripts and accumulates provider-reported usage.
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayOptions options = {},
          std::shared_ptr<TranscriptWriter> recorder = nullptr);

  LlmResponse complete(const LlmRequest& r);

  /// `n` samples of one prompt with sample_tag 0..n-1, returned in tag order.
  std::vector<LlmResponse> sample_n(const LlmRequest& r, int n);

  Usage usage() const;
  std::size_t max_concurrency() const { return options_.max_concurrency; }
  ProviderKind provider_kind() const { return provider_->kind(); }

 private:
  std::shared_ptr<Provider> provider_;
  GatewayOptions options_;
  std::shared_ptr<TranscriptWriter> recorder_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  std::atomic<long> prompt_tokens_{0};
  std::atomic<long> completion_tokens_{0};
  std::atomic<long> calls_{0};
  std::atomic<long> latency_ms_{0};
};

}  // namespace seqjudge
