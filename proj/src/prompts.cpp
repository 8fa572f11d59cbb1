#include "seqjudge/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "text_util.hpp"

namespace seqjudge {

using nlohmann::json;

std::string to_string(TemplateId id) {
  switch (id) {
    case TemplateId::P1_holistic: return "P1_holistic";
    case TemplateId::P2_diagram_atom: return "P2_diagram_atom";
    case TemplateId::P3_split_requirements: return "P3_split_requirements";
    case TemplateId::P4_requirement_atom: return "P4_requirement_atom";
    case TemplateId::P5_vote_merge: return "P5_vote_merge";
    case TemplateId::P6_cross_check: return "P6_cross_check";
  }
  return "unknown";
}

const std::set<std::string>& required_bindings(TemplateId id) {
  static const std::map<TemplateId, std::set<std::string>> kRequired{
      {TemplateId::P1_holistic, {"requirements", "diagram"}},
      {TemplateId::P2_diagram_atom, {"requirements", "diagram", "atom", "context"}},
      {TemplateId::P3_split_requirements, {"requirements"}},
      {TemplateId::P4_requirement_atom, {"diagram", "requirement_atom"}},
      {TemplateId::P5_vote_merge, {"n", "responses"}},
      {TemplateId::P6_cross_check, {"junior_issues", "correct_requirement_atoms", "diagram"}},
  };
  return kRequired.at(id);
}

std::set<std::string> placeholders_in(std::string_view body) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string_view::npos) {
    auto close = body.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    out.emplace(detail::trim(body.substr(pos + 2, close - pos - 2)));
    pos = close + 2;
  }
  return out;
}

PromptKit PromptKit::from_bodies(const std::map<TemplateId, std::string>& bodies) {
  PromptKit kit;
  for (TemplateId id : kAllTemplates) {
    auto it = bodies.find(id);
    if (it == bodies.end()) throw std::runtime_error("no template for " + to_string(id));
    const auto& required = required_bindings(id);
    for (const auto& name : placeholders_in(it->second)) {
      if (!required.contains(name)) {
        throw std::runtime_error(to_string(id) + ": unknown placeholder {{" + name + "}}");
      }
    }
    kit.templates_[id] = PromptTemplate{id, it->second, required};
  }
  return kit;
}

PromptKit PromptKit::load(const std::filesystem::path& dir) {
  std::map<TemplateId, std::string> bodies;
  for (TemplateId id : kAllTemplates) {
    const auto path = dir / (to_string(id) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    bodies[id] = ss.str();
  }
  return from_bodies(bodies);
}

std::string PromptKit::render(TemplateId id, const Bindings& bindings) const {
  const PromptTemplate& t = get(id);
  for (const auto& name : t.required_bindings) {
    if (!bindings.contains(name)) throw MissingBinding(name);
  }
  std::string out;
  out.reserve(t.body.size());
  std::size_t pos = 0;
  while (true) {
    auto open = t.body.find("{{", pos);
    if (open == std::string::npos) break;
    auto close = t.body.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(t.body, pos, open - pos);
    out += bindings.at(std::string(detail::trim(std::string_view(t.body).substr(open + 2, close - open - 2))));
    pos = close + 2;
  }
  out.append(t.body, pos);
  return out;
}

std::string to_string(IssueKind k) { return k == IssueKind::completeness ? "completeness" : "accuracy"; }

namespace {

std::optional<json> try_parse(std::string_view text) {
  auto parsed = json::parse(text.begin(), text.end(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  return parsed;
}

// Fenced blocks in order of appearance.
std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    auto body_start = open + 3;
    while (body_start < text.size() && std::isalpha(static_cast<unsigned char>(text[body_start]))) {
      ++body_start;  // info string such as "json"
    }
    auto close = text.find("```", body_start);
    if (close == std::string_view::npos) break;
    out.push_back(text.substr(body_start, close - body_start));
    pos = close + 3;
  }
  return out;
}

json decode_object(std::string_view response) {
  auto blocks = fenced_blocks(response);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (auto j = try_parse(detail::trim(*it))) return *j;
  }
  if (auto j = try_parse(detail::trim(response))) return *j;
  auto first = response.find('{');
  auto last = response.rfind('}');
  if (first != std::string_view::npos && last != std::string_view::npos && last > first) {
    if (auto j = try_parse(response.substr(first, last - first + 1))) return *j;
  }
  throw MalformedResponse("response carries no JSON object");
}

const json& require_array(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw MalformedResponse(std::string("response JSON lacks an \"") + key + "\" array");
  }
  return j[key];
}

std::optional<RawIssue> issue_from(const json& item, std::vector<std::string>& warnings) {
  if (!item.is_object() || !item.contains("description") || !item["description"].is_string()) {
    warnings.push_back("issue entry without a description dropped");
    return std::nullopt;
  }
  RawIssue issue;
  issue.description = std::string(detail::trim(item["description"].get<std::string>()));
  if (issue.description.empty()) {
    warnings.push_back("issue entry with an empty description dropped");
    return std::nullopt;
  }
  if (!item.contains("kind") || !item["kind"].is_string()) {
    warnings.push_back("issue kind missing, assuming accuracy");
  } else {
    const auto kind = detail::lower(item["kind"].get<std::string>());
    if (kind == "completeness") {
      issue.kind = IssueKind::completeness;
    } else if (kind != "accuracy") {
      warnings.push_back("unknown issue kind '" + kind + "', assuming accuracy");
    }
  }
  if (item.contains("location_hint") && item["location_hint"].is_string()) {
    auto hint = std::string(detail::trim(item["location_hint"].get<std::string>()));
    if (!hint.empty()) issue.location_hint = std::move(hint);
  }
  return issue;
}

}  // namespace

std::string extract_json_block(std::string_view response) { return decode_object(response).dump(); }

Decoded<std::vector<RawIssue>> parse_issue_list(std::string_view response) {
  const json j = decode_object(response);
  Decoded<std::vector<RawIssue>> out;
  for (const auto& item : require_array(j, "issues")) {
    if (auto issue = issue_from(item, out.warnings)) out.value.push_back(std::move(*issue));
  }
  return out;
}

Decoded<std::vector<std::string>> parse_requirement_atoms(std::string_view response) {
  const json j = decode_object(response);
  Decoded<std::vector<std::string>> out;
  for (const auto& item : require_array(j, "atoms")) {
    if (!item.is_string()) {
      out.warnings.push_back("non-string atom dropped");
      continue;
    }
    auto text = std::string(detail::trim(item.get<std::string>()));
    if (text.empty()) {
      out.warnings.push_back("empty atom dropped");
      continue;
    }
    out.value.push_back(std::move(text));
  }
  return out;
}

Decoded<std::vector<MergedIssue>> parse_merged_issues(std::string_view response) {
  const json j = decode_object(response);
  Decoded<std::vector<MergedIssue>> out;
  for (const auto& item : require_array(j, "issues")) {
    auto issue = issue_from(item, out.warnings);
    if (!issue) continue;
    if (!item.contains("votes") || !item["votes"].is_number_integer()) {
      throw MalformedResponse("merged issue without an integer vote count");
    }
    out.value.push_back({std::move(*issue), item["votes"].get<int>()});
  }
  return out;
}

Decoded<std::vector<DiscardVerdict>> parse_cross_check(std::string_view response) {
  const json j = decode_object(response);
  Decoded<std::vector<DiscardVerdict>> out;
  for (const auto& item : require_array(j, "discard")) {
    DiscardVerdict v;
    if (item.is_string()) {
      v.issue_id = item.get<std::string>();
    } else if (item.is_object() && item.contains("issue_id") && item["issue_id"].is_string()) {
      v.issue_id = item["issue_id"].get<std::string>();
      if (item.contains("conflicting_atom") && item["conflicting_atom"].is_string()) {
        v.conflicting_atom = item["conflicting_atom"].get<std::string>();
      }
      if (item.contains("reason") && item["reason"].is_string()) v.reason = item["reason"].get<std::string>();
    } else {
      out.warnings.push_back("cross-check entry without issue_id ignored");
      continue;
    }
    out.value.push_back(std::move(v));
  }
  return out;
}

}  // namespace seqjudge
