#include <httplib.h>

#include <random>
#include <thread>

#include "seqjudge/llm.hpp"

namespace seqjudge {

using nlohmann::json;

nlohmann::json chat_request_body(const LlmRequest& r) {
  json body{{"model", r.model},
            {"messages", json::array({json{{"role", "user"}, {"content", r.rendered_prompt}}})},
            {"temperature", r.temperature},
            {"top_p", r.top_p}};
  if (r.max_tokens) body["max_tokens"] = *r.max_tokens;
  return body;
}

HttpProvider::HttpProvider(HttpProviderOptions options)
    : options_(std::move(options)), rng_state_(std::random_device{}()) {
  const std::string& url = options_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base_url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::chrono::milliseconds HttpProvider::backoff_delay(int attempt) {
  double unit;
  {
    std::lock_guard lock(rng_mutex_);
    std::mt19937_64 rng(rng_state_);
    rng_state_ = rng();
    unit = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  }
  const double base = static_cast<double>(options_.backoff_base.count()) * double(1 << attempt);
  return std::chrono::milliseconds(static_cast<long>(base * (1.0 + options_.jitter * unit)));
}

LlmResponse HttpProvider::complete(const LlmRequest& r) {
  const std::string body = chat_request_body(r).dump();
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) options_.sleep(backoff_delay(attempt - 1));

    httplib::Client client(host_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(prefix_ + "/chat/completions", headers, body, "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError(r.prompt_id, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    try {
      const json payload = json::parse(res->body);
      LlmResponse out;
      out.text = payload.at("choices").at(0).at("message").at("content").get<std::string>();
      const json& usage = payload.at("usage");
      out.prompt_tokens = usage.at("prompt_tokens").get<long>();
      out.completion_tokens = usage.at("completion_tokens").get<long>();
      out.latency_ms = elapsed.count();
      out.provider = ProviderKind::live;
      return out;
    } catch (const json::exception& e) {
      throw TransportError(r.prompt_id, std::string("malformed provider payload: ") + e.what());
    }
  }
  throw TransportError(r.prompt_id, "retries exhausted, last error: " + last_error);
}

}  // namespace seqjudge
