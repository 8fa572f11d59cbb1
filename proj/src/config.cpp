#include "seqjudge/config.hpp"

#include <charconv>
#include <fstream>

#include "text_util.hpp"

namespace seqjudge {

namespace {

template <typename T>
T number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config '" + key + "': not a number: '" + value + "'");
  }
  return out;
}

double real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config '" + key + "': not a number: '" + value + "'");
}

std::optional<std::filesystem::path> optional_path(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return std::filesystem::path(value);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "model",          "base_url",   "api_key_env", "votes",  "temperature", "top_p",
      "context_window_k", "max_concurrency", "split_votes", "merge_mode", "prompts_dir", "record",
      "replay",         "script",     "max_tokens",  "timeout_s", "max_retries"};
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value(detail::trim(raw));
  if (key == "model") cfg.model = value;
  else if (key == "base_url") cfg.base_url = value;
  else if (key == "api_key_env") cfg.api_key_env = value;
  else if (key == "votes") cfg.votes = number<int>(key, value);
  else if (key == "temperature") cfg.temperature = real(key, value);
  else if (key == "top_p") cfg.top_p = real(key, value);
  else if (key == "context_window_k") cfg.context_window_k = number<std::size_t>(key, value);
  else if (key == "max_concurrency") cfg.max_concurrency = number<std::size_t>(key, value);
  else if (key == "split_votes") cfg.split_votes = number<int>(key, value);
  else if (key == "merge_mode") cfg.merge_mode = merge_mode_from(value);
  else if (key == "prompts_dir") cfg.prompts_dir = value;
  else if (key == "record") cfg.record = optional_path(value);
  else if (key == "replay") cfg.replay = optional_path(value);
  else if (key == "script") cfg.script = optional_path(value);
  else if (key == "max_tokens") cfg.max_tokens = value.empty() ? std::nullopt : std::optional(number<int>(key, value));
  else if (key == "timeout_s") cfg.timeout_s = number<int>(key, value);
  else if (key == "max_retries") cfg.max_retries = number<int>(key, value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(cfg, std::string(detail::trim(text.substr(0, eq))), std::string(text.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_environment(RunConfig& cfg, const EnvLookup& getenv) {
  for (const auto& key : config_keys()) {
    std::string name = "SEQJUDGE_";
    for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = getenv(name.c_str())) {
      try {
        apply_setting(cfg, key, v);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(name + ": " + e.what());
      }
    }
  }
}

void RunConfig::validate() const {
  if (votes < 1) throw std::invalid_argument("votes must be >= 1");
  if (split_votes < 1) throw std::invalid_argument("split_votes must be >= 1");
  if (max_concurrency < 1) throw std::invalid_argument("max_concurrency must be >= 1");
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw std::invalid_argument("temperature must be within [0, 2]");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must be within (0, 1]");
  if (max_tokens && *max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  if (record && replay) throw std::invalid_argument("record and replay are mutually exclusive");
  if (replay && script) throw std::invalid_argument("replay and script are mutually exclusive");
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.model = model;
  p.temperature = temperature;
  p.top_p = top_p;
  p.votes = votes;
  p.context_window_k = context_window_k;
  p.split_votes = split_votes;
  p.merge_mode = merge_mode;
  p.max_tokens = max_tokens;
  return p;
}

}  // namespace seqjudge
