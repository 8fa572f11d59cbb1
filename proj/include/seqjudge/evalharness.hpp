#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqjudge/pipeline.hpp"

namespace seqjudge {

enum class Judgment { true_positive, false_positive };
enum class Stage { mcet_a, mcet_x, holistic_baseline };

std::string to_string(Stage s);
Stage stage_from(const std::string& s);

struct GroundTruthIssue {
  std::string gt_id;
  std::string description;
};

/// Human labels for one report: a verdict per issue, the benchmark's known
/// issues, and which reported issue describes which known issue.
struct LabelSet {
  std::map<std::string, Judgment> judgments;
  std::vector<GroundTruthIssue> ground_truth;
  std::vector<std::pair<std::string, std::string>> matches;  // (issue_id, gt_id)

  /// Throws std::invalid_argument unless gt ids are unique, every match names
  /// a known gt id and every matched issue is judged a true positive.
  void validate() const;
};

LabelSet labels_from_json(const nlohmann::json& j);
LabelSet load_labels(const std::filesystem::path& path);
nlohmann::json to_json_value(const LabelSet& l);

struct MetricsSummary {
  std::size_t total = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  double precision = 0.0;
  std::size_t bench_recall_count = 0;
  double bench_recall_pct = 0.0;
  std::size_t new_true_issues = 0;

  double precision_display() const;    // two decimals
  double bench_recall_display() const;  // one decimal, percent
};

nlohmann::json to_json_value(const MetricsSummary& m);

class MissingJudgment : public std::runtime_error {
 public:
  explicit MissingJudgment(std::string issue_id)
      : std::runtime_error("no judgment for issue '" + issue_id + "'"), issue_id_(std::move(issue_id)) {}
  const std::string& issue_id() const { return issue_id_; }

 private:
  std::string issue_id_;
};

/// Issues of one stage view, optionally restricted to one source check.
std::vector<Issue> stage_view(const EvaluationReport& report, Stage stage,
                              std::optional<SourceCheck> source = std::nullopt);

MetricsSummary score_report(const EvaluationReport& report, const LabelSet& labels, Stage stage,
                            std::optional<SourceCheck> source = std::nullopt);

}  // namespace seqjudge
