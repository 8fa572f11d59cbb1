#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "hash.hpp"
#include "seqjudge/concurrency.hpp"
#include "seqjudge/llm.hpp"

namespace seqjudge {

using nlohmann::json;

void LlmRequest::validate() const {
  if (rendered_prompt.empty()) throw std::invalid_argument(prompt_id + ": empty prompt");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw std::invalid_argument(prompt_id + ": temperature must be within [0, 2]");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw std::invalid_argument(prompt_id + ": top_p must be within (0, 1]");
  }
}

std::string request_key(const LlmRequest& r) {
  const json key = json::array(
      {r.prompt_id, r.rendered_prompt, r.model, r.temperature, r.top_p, r.sample_tag});
  return detail::sha256_hex(key.dump());
}

std::string to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::live: return "live";
    case ProviderKind::replay: return "replay";
    case ProviderKind::scripted_mock: return "scripted-mock";
  }
  return "live";
}

ProviderKind provider_kind_from(const std::string& s) {
  if (s == "live") return ProviderKind::live;
  if (s == "replay") return ProviderKind::replay;
  if (s == "scripted-mock") return ProviderKind::scripted_mock;
  throw std::invalid_argument("unknown provider kind '" + s + "'");
}

void to_json(json& j, const LlmRequest& r) {
  j = json{{"prompt_id", r.prompt_id},     {"rendered_prompt", r.rendered_prompt},
           {"model", r.model},             {"temperature", r.temperature},
           {"top_p", r.top_p},             {"sample_tag", r.sample_tag},
           {"max_tokens", r.max_tokens ? json(*r.max_tokens) : json(nullptr)}};
}

void from_json(const json& j, LlmRequest& r) {
  j.at("prompt_id").get_to(r.prompt_id);
  j.at("rendered_prompt").get_to(r.rendered_prompt);
  j.at("model").get_to(r.model);
  j.at("temperature").get_to(r.temperature);
  j.at("top_p").get_to(r.top_p);
  j.at("sample_tag").get_to(r.sample_tag);
  if (j.contains("max_tokens") && !j["max_tokens"].is_null()) {
    r.max_tokens = j["max_tokens"].get<int>();
  } else {
    r.max_tokens.reset();
  }
}

void to_json(json& j, const LlmResponse& r) {
  j = json{{"text", r.text},
           {"prompt_tokens", r.prompt_tokens},
           {"completion_tokens", r.completion_tokens},
           {"latency_ms", r.latency_ms},
           {"provider", to_string(r.provider)}};
}

void from_json(const json& j, LlmResponse& r) {
  j.at("text").get_to(r.text);
  j.at("prompt_tokens").get_to(r.prompt_tokens);
  j.at("completion_tokens").get_to(r.completion_tokens);
  j.at("latency_ms").get_to(r.latency_ms);
  r.provider = provider_kind_from(j.at("provider").get<std::string>());
}

void to_json(json& j, const TranscriptRecord& r) {
  j = json{{"request_key", r.request_key},
           {"request", r.request},
           {"response", r.response},
           {"timestamp", r.timestamp}};
}

void from_json(const json& j, TranscriptRecord& r) {
  j.at("request_key").get_to(r.request_key);
  j.at("request").get_to(r.request);
  j.at("response").get_to(r.response);
  j.at("timestamp").get_to(r.timestamp);
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

long approx_tokens(const std::string& s) { return static_cast<long>((s.size() + 3) / 4); }

}  // namespace

std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transcript " + path.string());
  std::vector<TranscriptRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<TranscriptRecord>());
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad transcript record: " + e.what());
    }
  }
  return out;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& transcript)
    : ReplayProvider(read_transcript(transcript)) {}

ReplayProvider::ReplayProvider(const std::vector<TranscriptRecord>& records) {
  for (const auto& r : records) table_.emplace(r.request_key, r.response);
}

LlmResponse ReplayProvider::complete(const LlmRequest& r) {
  const std::string key = request_key(r);
  auto it = table_.find(key);
  if (it == table_.end()) throw ReplayMiss(r.prompt_id, key);
  LlmResponse out = it->second;
  out.provider = ProviderKind::replay;
  return out;
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptRule> rules,
                                   std::map<std::string, std::string> fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

namespace {

std::pair<std::vector<ScriptRule>, std::map<std::string, std::string>> read_script(const json& script) {
  std::vector<ScriptRule> rules;
  for (const auto& r : script.value("rules", json::array())) {
    ScriptRule rule;
    rule.prompt_id = r.value("prompt_id", "*");
    rule.contains = r.value("contains", std::vector<std::string>{});
    if (r.contains("samples")) rule.samples = r["samples"].get<std::set<int>>();
    rule.response = r.at("response").get<std::string>();
    rules.push_back(std::move(rule));
  }
  return {std::move(rules), script.value("fallback", std::map<std::string, std::string>{})};
}

json read_script_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open script " + path.string());
  return json::parse(in);
}

}  // namespace

ScriptedProvider ScriptedProvider::from_json(const json& script) {
  auto [rules, fallback] = read_script(script);
  return ScriptedProvider(std::move(rules), std::move(fallback));
}

ScriptedProvider ScriptedProvider::from_file(const std::filesystem::path& path) {
  return from_json(read_script_file(path));
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::shared_from_file(const std::filesystem::path& path) {
  auto [rules, fallback] = read_script(read_script_file(path));
  return std::make_shared<ScriptedProvider>(std::move(rules), std::move(fallback));
}

void ScriptedProvider::enqueue(std::string text) {
  std::lock_guard lock(mutex_);
  queue_.push_back(std::move(text));
}

void ScriptedProvider::add_rule(ScriptRule rule) {
  std::lock_guard lock(mutex_);
  rules_.push_back(std::move(rule));
}

void ScriptedProvider::set_fallback(const std::string& prompt_id, std::string text) {
  std::lock_guard lock(mutex_);
  fallback_[prompt_id] = std::move(text);
}

LlmResponse ScriptedProvider::complete(const LlmRequest& r) {
  ++calls_;
  auto respond = [&](std::string text) {
    LlmResponse out;
    out.prompt_tokens = approx_tokens(r.rendered_prompt);
    out.completion_tokens = approx_tokens(text);
    out.text = std::move(text);
    out.provider = ProviderKind::scripted_mock;
    return out;
  };

  std::lock_guard lock(mutex_);
  if (!queue_.empty()) {
    std::string text = std::move(queue_.front());
    queue_.pop_front();
    return respond(std::move(text));
  }
  for (const auto& rule : rules_) {
    if (rule.prompt_id != "*" && rule.prompt_id != r.prompt_id) continue;
    if (rule.samples && !rule.samples->contains(r.sample_tag)) continue;
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (r.rendered_prompt.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) return respond(rule.response);
  }
  if (auto it = fallback_.find(r.prompt_id); it != fallback_.end()) return respond(it->second);
  throw TransportError(r.prompt_id, "scripted provider has no answer");
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path) : path_(path) {
  if (std::filesystem::exists(path)) {
    for (const auto& r : read_transcript(path)) keys_.insert(r.request_key);
  }
}

void TranscriptWriter::append(const TranscriptRecord& record) {
  std::lock_guard lock(mutex_);
  if (!keys_.insert(record.request_key).second) return;
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write transcript " + path_.string());
  out << json(record).dump() << '\n';
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayOptions options,
                 std::shared_ptr<TranscriptWriter> recorder)
    : provider_(std::move(provider)),
      options_(options),
      recorder_(std::move(recorder)),
      slots_(std::make_unique<std::counting_semaphore<>>(
          static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options.max_concurrency)))) {
  options_.max_concurrency = std::max<std::size_t>(1, options_.max_concurrency);
}

LlmResponse Gateway::complete(const LlmRequest& r) {
  r.validate();
  slots_->acquire();
  LlmResponse response;
  try {
    response = provider_->complete(r);
  } catch (...) {
    slots_->release();
    throw;
  }
  slots_->release();

  prompt_tokens_ += response.prompt_tokens;
  completion_tokens_ += response.completion_tokens;
  latency_ms_ += response.latency_ms;
  ++calls_;
  if (recorder_) recorder_->append({request_key(r), r, response, utc_now()});
  return response;
}

std::vector<LlmResponse> Gateway::sample_n(const LlmRequest& r, int n) {
  if (n < 1) throw std::invalid_argument("sample_n needs n >= 1");
  std::vector<LlmResponse> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), options_.max_concurrency, [&](std::size_t i) {
    LlmRequest tagged = r;
    tagged.sample_tag = static_cast<int>(i);
    out[i] = complete(tagged);
  });
  return out;
}

Usage Gateway::usage() const {
  return {prompt_tokens_.load(), completion_tokens_.load(), calls_.load(), latency_ms_.load()};
}

}  // namespace seqjudge
