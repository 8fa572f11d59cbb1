#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqjudge {

enum class TemplateId {
  P1_holistic,
  P2_diagram_atom,
  P3_split_requirements,
  P4_requirement_atom,
  P5_vote_merge,
  P6_cross_check,
};

inline constexpr TemplateId kAllTemplates[] = {
    TemplateId::P1_holistic,         TemplateId::P2_diagram_atom, TemplateId::P3_split_requirements,
    TemplateId::P4_requirement_atom, TemplateId::P5_vote_merge,   TemplateId::P6_cross_check,
};

std::string to_string(TemplateId id);

/// Placeholder names a template of this kind must be rendered with.
const std::set<std::string>& required_bindings(TemplateId id);

using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
  TemplateId template_id;
  std::string body;  // `{{name}}` placeholders
  std::set<std::string> required_bindings;
};

class MissingBinding : public std::invalid_argument {
 public:
  explicit MissingBinding(std::string name)
      : std::invalid_argument("missing prompt binding '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// The six prompt templates, loaded once and immutable afterwards.
class PromptKit {
 public:
  /// Reads `<dir>/<template id>.txt` for every template. Throws
  /// std::runtime_error when a file is missing or uses an unknown placeholder.
  static PromptKit load(const std::filesystem::path& dir);
  static PromptKit from_bodies(const std::map<TemplateId, std::string>& bodies);

  const PromptTemplate& get(TemplateId id) const { return templates_.at(id); }

  /// Substitutes every placeholder in one pass; bound values are not
  /// re-scanned for placeholders.
  std::string render(TemplateId id, const Bindings& bindings) const;

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

/// Placeholder names that occur in a template body.
std::set<std::string> placeholders_in(std::string_view body);

// ---------------------------------------------------------------------------
// Response decoding

enum class IssueKind { accuracy, completeness };

std::string to_string(IssueKind k);

struct RawIssue {
  std::string description;
  IssueKind kind = IssueKind::accuracy;
  std::optional<std::string> location_hint;

  bool operator==(const RawIssue&) const = default;
};

/// The model's answer carried no usable JSON object of the expected shape.
class MalformedResponse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text of the instruction sent when an answer could not be decoded.
inline constexpr std::string_view kRepairInstruction =
    "Your last answer was not valid JSON; reply with only the JSON object.";

template <typename T>
struct Decoded {
  T value;
  std::vector<std::string> warnings;
};

/// Last fenced JSON block of a response, tolerating surrounding prose. Falls
/// back to the whole text and then to the outermost braces.
std::string extract_json_block(std::string_view response);

/// {"issues":[{"description","kind","location_hint"?}]}
Decoded<std::vector<RawIssue>> parse_issue_list(std::string_view response);

/// {"atoms":["...", ...]}; entries trimmed, empty ones dropped, order and
/// duplicates preserved.
Decoded<std::vector<std::string>> parse_requirement_atoms(std::string_view response);

struct MergedIssue {
  RawIssue issue;
  int votes = 0;
};

/// {"issues":[{..., "votes": k}]} as produced by the vote-merge prompt.
Decoded<std::vector<MergedIssue>> parse_merged_issues(std::string_view response);

struct DiscardVerdict {
  std::string issue_id;
  std::optional<std::string> conflicting_atom;
  std::string reason;
};

/// {"discard":[{"issue_id", "conflicting_atom"?, "reason"?}]}
Decoded<std::vector<DiscardVerdict>> parse_cross_check(std::string_view response);

}  // namespace seqjudge
