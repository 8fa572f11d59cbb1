#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "seqjudge/pipeline.hpp"

namespace seqjudge {

struct RunConfig {
  std::string model = "gpt-4o-mini";
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  int votes = 5;
  double temperature = 0.7;
  double top_p = 1.0;
  std::size_t context_window_k = kDefaultContextWindow;
  std::size_t max_concurrency = 4;
  int split_votes = 1;
  MergeMode merge_mode = MergeMode::llm;
  std::filesystem::path prompts_dir = SEQJUDGE_DEFAULT_PROMPTS_DIR;
  std::optional<std::filesystem::path> record;
  std::optional<std::filesystem::path> replay;
  std::optional<std::filesystem::path> script;  // scripted-mock provider rules
  std::optional<int> max_tokens;
  int timeout_s = 120;
  int max_retries = 3;

  /// Throws std::invalid_argument on out-of-range values or conflicting
  /// provider choices.
  void validate() const;

  PipelineConfig pipeline() const;
};

/// Sets one field by its name (the RunConfig member name). Throws
/// std::invalid_argument on an unknown key or an unparseable value.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines; blank lines and lines starting with '#' are ignored.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

using EnvLookup = std::function<const char*(const char*)>;

/// SEQJUDGE_<FIELD> variables, e.g. SEQJUDGE_VOTES=3.
void apply_environment(RunConfig& cfg, const EnvLookup& getenv);

/// Every field name accepted by apply_setting.
const std::vector<std::string>& config_keys();

}  // namespace seqjudge
