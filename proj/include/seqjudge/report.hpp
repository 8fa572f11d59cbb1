#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "seqjudge/pipeline.hpp"

namespace seqjudge {

inline constexpr const char* kReportSchemaVersion = "1";

nlohmann::json report_to_json_value(const EvaluationReport& r);

/// Canonical bytes: sorted keys, two-space indent, LF line ends, trailing newline.
std::string to_json(const EvaluationReport& r);

/// Inverse of to_json. Throws std::runtime_error on a schema mismatch.
EvaluationReport report_from_json(const nlohmann::json& j);
EvaluationReport report_from_json(const std::string& text);

std::string to_markdown(const EvaluationReport& r);

/// "<raised> raised, <kept> kept after cross-check"
std::string summary_line(const EvaluationReport& r);

}  // namespace seqjudge
