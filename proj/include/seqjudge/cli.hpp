#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "seqjudge/config.hpp"
#include "seqjudge/llm.hpp"

namespace seqjudge {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitProvider = 3,
  kExitIssuesFound = 4,
};

struct CliHooks {
  /// Builds the provider for live runs. Replay and scripted runs never call
  /// it. Defaults to the OpenAI-compatible HTTP client.
  std::function<std::shared_ptr<Provider>(const RunConfig&, const std::string& api_key)> live_provider;
  /// Environment lookup; defaults to std::getenv.
  EnvLookup getenv;
};

/// Entry point behind the `seqjudge` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliHooks& hooks = {});

}  // namespace seqjudge
