#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqjudge/atoms.hpp"
#include "seqjudge/diagram.hpp"
#include "seqjudge/llm.hpp"
#include "seqjudge/prompts.hpp"

namespace seqjudge {

enum class SourceCheck { holistic, diagram_atom, requirement_atom };
enum class StageStatus { atomic_kept, cross_checked_kept, cross_check_discarded };
enum class MergeMode { llm, deterministic };
enum class LocationType { diagram_atom_ref, requirement_atom_ref, free_text };

std::string to_string(SourceCheck s);
std::string to_string(StageStatus s);
std::string to_string(MergeMode m);
std::string to_string(LocationType t);
SourceCheck source_check_from(const std::string& s);
StageStatus stage_status_from(const std::string& s);
MergeMode merge_mode_from(const std::string& s);
LocationType location_type_from(const std::string& s);
IssueKind issue_kind_from(const std::string& s);

struct IssueLocation {
  LocationType type = LocationType::free_text;
  std::string value;  // atom id for refs, the model's hint (possibly empty) for free text

  bool operator==(const IssueLocation&) const = default;
};

struct Issue {
  std::string issue_id;  // "H.0", "D3.1", "R2.0"
  std::string description;
  IssueKind kind = IssueKind::accuracy;
  SourceCheck source_check = SourceCheck::holistic;
  IssueLocation location;
  int votes = 1;
  StageStatus stage_status = StageStatus::atomic_kept;
  std::optional<std::string> conflicting_atom;  // set when discarded by the cross-check
  std::optional<std::string> discard_reason;

  bool operator==(const Issue&) const = default;
};

struct CheckResult {
  SourceCheck source_check = SourceCheck::holistic;
  std::vector<Issue> issues;
  int samples_used = 0;
  std::vector<std::string> raw_response_refs;  // transcript request keys
  std::vector<std::string> failed_atom_ids;
  std::vector<std::string> warnings;
};

struct PipelineConfig {
  std::string model = "gpt-4o-mini";
  double temperature = 0.7;
  double top_p = 1.0;
  int votes = 5;
  std::size_t context_window_k = kDefaultContextWindow;
  int split_votes = 1;
  MergeMode merge_mode = MergeMode::llm;
  std::optional<int> max_tokens;

  bool operator==(const PipelineConfig&) const = default;
};

/// Smallest support an issue needs to survive voting over n samples.
constexpr int majority_threshold(int n) { return (n + 1) / 2; }

struct VotedIssue {
  RawIssue issue;
  int votes = 0;
};

/// Groups issues by normalized description (a sample counts once per group)
/// and keeps groups seen in at least majority_threshold(n) samples, in order
/// of first appearance.
std::vector<VotedIssue> merge_votes_deterministic(const std::vector<std::vector<RawIssue>>& samples,
                                                  int n);

/// Per-check bookkeeping carried into the report.
struct CheckSummary {
  SourceCheck source_check = SourceCheck::holistic;
  bool completed = true;
  int samples_used = 0;
  std::vector<std::string> raw_response_refs;
  std::vector<std::string> issue_ids;
  std::vector<std::string> failed_atom_ids;

  bool operator==(const CheckSummary&) const = default;
};

struct CrossCheckSummary {
  SourceCheck source_check = SourceCheck::holistic;
  bool llm_called = false;
  bool failed_open = false;
  std::vector<std::string> raw_response_refs;
  std::vector<std::string> discarded_ids;

  bool operator==(const CrossCheckSummary&) const = default;
};

struct Accounting {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total_tokens = 0;
  long llm_calls = 0;
  long llm_latency_ms = 0;
  std::optional<long> wall_time_ms;  // null under replay

  bool operator==(const Accounting&) const = default;
};

struct EvaluationReport {
  std::string tool_version;
  std::optional<std::string> started_at;  // null under replay
  std::string provider;
  std::size_t max_concurrency = 0;
  PipelineConfig config;
  std::string requirements_sha256;
  std::string diagram_sha256;

  std::vector<DiagramAtom> diagram_atoms;
  std::vector<RequirementAtom> requirement_atoms;
  std::vector<CheckSummary> checks;  // holistic, diagram_atom, requirement_atom
  std::vector<CrossCheckSummary> cross_checks;
  std::vector<std::string> correct_requirement_atom_ids;
  std::vector<std::string> unchecked_requirement_atom_ids;
  std::vector<Issue> issues;  // both stages, told apart by stage_status
  std::vector<std::string> warnings;
  Accounting accounting;

  std::vector<Issue> mcet_a_issues() const;  // every issue raised by the atomic stage
  std::vector<Issue> mcet_x_issues() const;  // what survives the cross-check

  bool operator==(const EvaluationReport&) const = default;
};

/// Deterministic report order: source check, then location, then issue id.
void sort_issues(std::vector<Issue>& issues);

/// Runs the checks against one gateway. Safe to use from one coordinator
/// thread; model calls fan out internally up to the gateway's bound.
class Pipeline {
 public:
  Pipeline(Gateway& gateway, const PromptKit& kit, PipelineConfig cfg = {});

  const PipelineConfig& config() const { return cfg_; }

  /// Votes over `samples` (one list per sample, size = cfg.votes) according
  /// to cfg.merge_mode. LLM merge failures fall back to the deterministic rule.
  /// `subject` names what was checked; it heads the merge prompt so that
  /// merges for different atoms never share a transcript key.
  Decoded<std::vector<VotedIssue>> merge_votes(const std::vector<std::vector<RawIssue>>& samples,
                                               const std::string& subject = {},
                                               std::vector<std::string>* refs = nullptr);

  CheckResult holistic_check(const std::string& requirements, const std::string& diagram_source);

  CheckResult diagram_atom_check(const std::string& requirements, const std::string& diagram_source,
                                 const SequenceDiagram& diagram, const std::vector<DiagramAtom>& atoms);

  /// Throws std::invalid_argument on blank requirements and MalformedResponse
  /// when the answer cannot be decoded even after the repair prompt.
  Decoded<std::vector<RequirementAtom>> split_requirements(const std::string& requirements,
                                                           std::vector<std::string>* refs = nullptr);

  CheckResult requirement_atom_check(const std::string& diagram_source,
                                     const std::vector<RequirementAtom>& atoms);

  /// Returns the low-authority issues with their cross-check status set.
  Decoded<std::vector<Issue>> cross_check(const CheckResult& low_authority,
                                          const std::vector<RequirementAtom>& correct_atoms,
                                          const std::string& diagram_source,
                                          const std::vector<DiagramAtom>& diagram_atoms = {},
                                          CrossCheckSummary* summary = nullptr);

  /// Whole run. Throws ParseError on an unparseable diagram and
  /// std::invalid_argument on blank requirements, before any model call.
  EvaluationReport evaluate(const std::string& requirements, const std::string& diagram_source);

 private:
  template <typename T>
  Decoded<T> call_decoded(const LlmRequest& r, Decoded<T> (*decode)(std::string_view),
                          std::vector<std::string>& refs);

  LlmRequest request(TemplateId id, std::string rendered, double temperature) const;

  std::vector<std::vector<RawIssue>> sample_issue_lists(const LlmRequest& base,
                                                        std::vector<std::string>& refs,
                                                        std::vector<std::string>& warnings);

  // Samples, votes and mints ids "<id_prefix>.<k>". A null location means
  // free text taken from each issue's hint.
  std::vector<Issue> voted_issues(const LlmRequest& base, SourceCheck source,
                                  const std::optional<IssueLocation>& location, const std::string& id_prefix,
                                  const std::string& subject, CheckResult& out);

  Gateway& gateway_;
  const PromptKit& kit_;
  PipelineConfig cfg_;
};

/// Text bound to P2's {{context}} placeholder.
std::string render_context(const DiagramAtom& atom, const AtomContext& ctx);

}  // namespace seqjudge
