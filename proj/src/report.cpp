#include "seqjudge/report.hpp"

#include <map>
#include <sstream>

namespace seqjudge {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

json atom_json(const DiagramAtom& a) {
  return {{"atom_id", a.atom_id},
          {"message_id", a.message_id},
          {"sender", a.sender},
          {"receiver", a.receiver},
          {"label", a.label},
          {"arrow",
           {{"line", a.arrow.line == LineStyle::dashed ? "dashed" : "solid"},
            {"head", a.arrow.head == ArrowHead::open ? "open" : "closed"},
            {"kind", to_string(a.arrow.kind())}}},
          {"ordinal", a.ordinal},
          {"text", render_atom(a)}};
}

DiagramAtom atom_from(const json& j) {
  DiagramAtom a;
  a.atom_id = j.at("atom_id").get<std::string>();
  a.message_id = j.at("message_id").get<std::string>();
  a.sender = j.at("sender").get<std::string>();
  a.receiver = j.at("receiver").get<std::string>();
  a.label = j.at("label").get<std::string>();
  const auto& arrow = j.at("arrow");
  a.arrow.line = arrow.at("line").get<std::string>() == "dashed" ? LineStyle::dashed : LineStyle::solid;
  a.arrow.head = arrow.at("head").get<std::string>() == "open" ? ArrowHead::open : ArrowHead::closed;
  a.ordinal = j.at("ordinal").get<std::size_t>();
  return a;
}

json requirement_json(const RequirementAtom& a) {
  json span = a.source_span ? json{{"begin", a.source_span->begin}, {"end", a.source_span->end}} : json(nullptr);
  return {{"atom_id", a.atom_id}, {"text", a.text}, {"source_span", span}};
}

RequirementAtom requirement_from(const json& j) {
  RequirementAtom a;
  a.atom_id = j.at("atom_id").get<std::string>();
  a.text = j.at("text").get<std::string>();
  if (j.contains("source_span") && !j["source_span"].is_null()) {
    a.source_span = TextSpan{j["source_span"].at("begin").get<std::size_t>(),
                             j["source_span"].at("end").get<std::size_t>()};
  }
  return a;
}

json issue_json(const Issue& i) {
  json loc{{"type", to_string(i.location.type)}};
  loc[i.location.type == LocationType::free_text ? "hint" : "ref"] = i.location.value;
  return {{"issue_id", i.issue_id},
          {"description", i.description},
          {"kind", to_string(i.kind)},
          {"source_check", to_string(i.source_check)},
          {"location", loc},
          {"votes", i.votes},
          {"stage_status", to_string(i.stage_status)},
          {"conflicting_atom", opt(i.conflicting_atom)},
          {"discard_reason", opt(i.discard_reason)}};
}

Issue issue_from(const json& j) {
  Issue i;
  i.issue_id = j.at("issue_id").get<std::string>();
  i.description = j.at("description").get<std::string>();
  i.kind = issue_kind_from(j.at("kind").get<std::string>());
  i.source_check = source_check_from(j.at("source_check").get<std::string>());
  const auto& loc = j.at("location");
  i.location.type = location_type_from(loc.at("type").get<std::string>());
  i.location.value = loc.at(i.location.type == LocationType::free_text ? "hint" : "ref").get<std::string>();
  i.votes = j.at("votes").get<int>();
  i.stage_status = stage_status_from(j.at("stage_status").get<std::string>());
  i.conflicting_atom = opt_from<std::string>(j, "conflicting_atom");
  i.discard_reason = opt_from<std::string>(j, "discard_reason");
  return i;
}

json check_json(const CheckSummary& c) {
  return {{"source_check", to_string(c.source_check)},
          {"completed", c.completed},
          {"samples_used", c.samples_used},
          {"raw_response_refs", c.raw_response_refs},
          {"issue_ids", c.issue_ids},
          {"failed_atom_ids", c.failed_atom_ids}};
}

CheckSummary check_from(const json& j) {
  CheckSummary c;
  c.source_check = source_check_from(j.at("source_check").get<std::string>());
  c.completed = j.at("completed").get<bool>();
  c.samples_used = j.at("samples_used").get<int>();
  c.raw_response_refs = j.at("raw_response_refs").get<std::vector<std::string>>();
  c.issue_ids = j.at("issue_ids").get<std::vector<std::string>>();
  c.failed_atom_ids = j.at("failed_atom_ids").get<std::vector<std::string>>();
  return c;
}

json cross_json(const CrossCheckSummary& c) {
  return {{"source_check", to_string(c.source_check)},
          {"llm_called", c.llm_called},
          {"failed_open", c.failed_open},
          {"raw_response_refs", c.raw_response_refs},
          {"discarded_ids", c.discarded_ids}};
}

CrossCheckSummary cross_from(const json& j) {
  CrossCheckSummary c;
  c.source_check = source_check_from(j.at("source_check").get<std::string>());
  c.llm_called = j.at("llm_called").get<bool>();
  c.failed_open = j.at("failed_open").get<bool>();
  c.raw_response_refs = j.at("raw_response_refs").get<std::vector<std::string>>();
  c.discarded_ids = j.at("discarded_ids").get<std::vector<std::string>>();
  return c;
}

}  // namespace

json report_to_json_value(const EvaluationReport& r) {
  const auto& c = r.config;
  json config{{"model", c.model},
              {"temperature", c.temperature},
              {"top_p", c.top_p},
              {"votes", c.votes},
              {"context_window_k", c.context_window_k},
              {"split_votes", c.split_votes},
              {"merge_mode", to_string(c.merge_mode)},
              {"max_tokens", opt(c.max_tokens)},
              {"max_concurrency", r.max_concurrency},
              {"provider", r.provider}};
  json diagram_atoms = json::array(), requirement_atoms = json::array(), issues = json::array();
  json checks = json::array(), cross = json::array();
  for (const auto& a : r.diagram_atoms) diagram_atoms.push_back(atom_json(a));
  for (const auto& a : r.requirement_atoms) requirement_atoms.push_back(requirement_json(a));
  for (const auto& i : r.issues) issues.push_back(issue_json(i));
  for (const auto& k : r.checks) checks.push_back(check_json(k));
  for (const auto& k : r.cross_checks) cross.push_back(cross_json(k));
  const auto& acc = r.accounting;
  return {
      {"schema_version", kReportSchemaVersion},
      {"metadata",
       {{"tool_version", r.tool_version},
        {"started_at", opt(r.started_at)},
        {"config", config},
        {"inputs", {{"requirements_sha256", r.requirements_sha256}, {"diagram_sha256", r.diagram_sha256}}}}},
      {"atoms", {{"diagram", diagram_atoms}, {"requirement", requirement_atoms}}},
      {"checks", checks},
      {"cross_checks", cross},
      {"correct_requirement_atom_ids", r.correct_requirement_atom_ids},
      {"unchecked_requirement_atom_ids", r.unchecked_requirement_atom_ids},
      {"issues", issues},
      {"warnings", r.warnings},
      {"accounting",
       {{"prompt_tokens", acc.prompt_tokens},
        {"completion_tokens", acc.completion_tokens},
        {"total_tokens", acc.total_tokens},
        {"llm_calls", acc.llm_calls},
        {"llm_latency_ms", acc.llm_latency_ms},
        {"wall_time_ms", opt(acc.wall_time_ms)}}},
  };
}

std::string to_json(const EvaluationReport& r) { return report_to_json_value(r).dump(2) + "\n"; }

EvaluationReport report_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<std::string>() != kReportSchemaVersion) {
      throw std::runtime_error("unsupported report schema_version " + j["schema_version"].dump());
    }
    EvaluationReport r;
    const auto& meta = j.at("metadata");
    r.tool_version = meta.at("tool_version").get<std::string>();
    r.started_at = opt_from<std::string>(meta, "started_at");
    const auto& c = meta.at("config");
    r.config.model = c.at("model").get<std::string>();
    r.config.temperature = c.at("temperature").get<double>();
    r.config.top_p = c.at("top_p").get<double>();
    r.config.votes = c.at("votes").get<int>();
    r.config.context_window_k = c.at("context_window_k").get<std::size_t>();
    r.config.split_votes = c.at("split_votes").get<int>();
    r.config.merge_mode = merge_mode_from(c.at("merge_mode").get<std::string>());
    r.config.max_tokens = opt_from<int>(c, "max_tokens");
    r.max_concurrency = c.at("max_concurrency").get<std::size_t>();
    r.provider = c.at("provider").get<std::string>();
    r.requirements_sha256 = meta.at("inputs").at("requirements_sha256").get<std::string>();
    r.diagram_sha256 = meta.at("inputs").at("diagram_sha256").get<std::string>();

    for (const auto& a : j.at("atoms").at("diagram")) r.diagram_atoms.push_back(atom_from(a));
    for (const auto& a : j.at("atoms").at("requirement")) r.requirement_atoms.push_back(requirement_from(a));
    for (const auto& k : j.at("checks")) r.checks.push_back(check_from(k));
    for (const auto& k : j.at("cross_checks")) r.cross_checks.push_back(cross_from(k));
    r.correct_requirement_atom_ids = j.at("correct_requirement_atom_ids").get<std::vector<std::string>>();
    r.unchecked_requirement_atom_ids = j.at("unchecked_requirement_atom_ids").get<std::vector<std::string>>();
    for (const auto& i : j.at("issues")) r.issues.push_back(issue_from(i));
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto& acc = j.at("accounting");
    r.accounting.prompt_tokens = acc.at("prompt_tokens").get<long>();
    r.accounting.completion_tokens = acc.at("completion_tokens").get<long>();
    r.accounting.total_tokens = acc.at("total_tokens").get<long>();
    r.accounting.llm_calls = acc.at("llm_calls").get<long>();
    r.accounting.llm_latency_ms = acc.at("llm_latency_ms").get<long>();
    r.accounting.wall_time_ms = opt_from<long>(acc, "wall_time_ms");
    return r;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
}

EvaluationReport report_from_json(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("report is not valid JSON");
  return report_from_json(j);
}

std::string summary_line(const EvaluationReport& r) {
  return std::to_string(r.mcet_a_issues().size()) + " raised, " + std::to_string(r.mcet_x_issues().size()) +
         " kept after cross-check";
}

namespace {

const char* heading(SourceCheck s) {
  switch (s) {
    case SourceCheck::holistic: return "Holistic";
    case SourceCheck::diagram_atom: return "Diagram-atom";
    case SourceCheck::requirement_atom: return "Requirement-atom";
  }
  return "";
}

std::string where(const Issue& i, const std::map<std::string, std::string>& atom_text) {
  if (i.location.type == LocationType::free_text) {
    return i.location.value.empty() ? std::string() : "(" + i.location.value + ") ";
  }
  auto it = atom_text.find(i.location.value);
  if (it == atom_text.end()) return i.location.value + " ";
  const bool diagram = i.location.type == LocationType::diagram_atom_ref;
  return i.location.value + (diagram ? " `" + it->second + "` " : " \"" + it->second + "\" ");
}

}  // namespace

std::string to_markdown(const EvaluationReport& r) {
  std::map<std::string, std::string> atom_text;
  for (const auto& a : r.diagram_atoms) atom_text[a.atom_id] = render_atom(a);
  for (const auto& a : r.requirement_atoms) atom_text[a.atom_id] = a.text;

  const auto kept = r.mcet_x_issues();
  std::vector<Issue> discarded;
  for (const auto& i : r.issues) {
    if (i.stage_status == StageStatus::cross_check_discarded) discarded.push_back(i);
  }
  auto bullet = [&](const Issue& i) {
    return "- **" + i.issue_id + "** " + where(i, atom_text) + "— " + i.description + " _(" + to_string(i.kind) +
           ", " + std::to_string(i.votes) + "/" + std::to_string(r.config.votes) + " votes)_\n";
  };

  std::ostringstream md;
  md << "# Sequence diagram review\n\n## Summary\n\n";
  md << summary_line(r) << ".\n\n";
  md << "- Diagram atoms: " << r.diagram_atoms.size() << "\n";
  md << "- Requirement atoms: " << r.requirement_atoms.size() << " (" << r.correct_requirement_atom_ids.size()
     << " without issues)\n";
  md << "- Tokens: " << r.accounting.total_tokens << " over " << r.accounting.llm_calls << " model calls\n\n";

  md << "## Issues\n\n";
  if (r.issues.empty()) {
    md << "No issues found.\n\n";
  } else if (kept.empty()) {
    md << "Every raised issue was discarded by the cross-check.\n\n";
  } else {
    for (auto s : {SourceCheck::holistic, SourceCheck::diagram_atom, SourceCheck::requirement_atom}) {
      std::string block;
      for (const auto& i : kept) {
        if (i.source_check == s) block += bullet(i);
      }
      if (!block.empty()) md << "### " << heading(s) << "\n\n" << block << "\n";
    }
  }
  if (!discarded.empty()) {
    md << "## Discarded by cross-check\n\n";
    for (const auto& i : discarded) {
      md << bullet(i);
      if (i.conflicting_atom) {
        auto it = atom_text.find(*i.conflicting_atom);
        md << "  - conflicts with " << *i.conflicting_atom
           << (it != atom_text.end() ? " \"" + it->second + "\"" : std::string())
           << (i.discard_reason ? ": " + *i.discard_reason : std::string()) << "\n";
      }
    }
    md << "\n";
  }
  if (!r.warnings.empty()) {
    md << "## Warnings\n\n";
    for (const auto& w : r.warnings) md << "- " << w << "\n";
    md << "\n";
  }
  return md.str();
}

}  // namespace seqjudge
