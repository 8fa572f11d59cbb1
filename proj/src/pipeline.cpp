#include "seqjudge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "hash.hpp"
#include "seqjudge/concurrency.hpp"
#include "seqjudge/parser.hpp"
#include "text_util.hpp"

namespace seqjudge {

using nlohmann::json;

std::string to_string(SourceCheck s) {
  switch (s) {
    case SourceCheck::holistic: return "holistic";
    case SourceCheck::diagram_atom: return "diagram_atom";
    case SourceCheck::requirement_atom: return "requirement_atom";
  }
  return "holistic";
}

std::string to_string(StageStatus s) {
  switch (s) {
    case StageStatus::atomic_kept: return "atomic_kept";
    case StageStatus::cross_checked_kept: return "cross_checked_kept";
    case StageStatus::cross_check_discarded: return "cross_check_discarded";
  }
  return "atomic_kept";
}

std::string to_string(MergeMode m) { return m == MergeMode::llm ? "llm" : "deterministic"; }

std::string to_string(LocationType t) {
  switch (t) {
    case LocationType::diagram_atom_ref: return "diagram_atom_ref";
    case LocationType::requirement_atom_ref: return "requirement_atom_ref";
    case LocationType::free_text: return "free_text";
  }
  return "free_text";
}

SourceCheck source_check_from(const std::string& s) {
  if (s == "holistic") return SourceCheck::holistic;
  if (s == "diagram_atom") return SourceCheck::diagram_atom;
  if (s == "requirement_atom") return SourceCheck::requirement_atom;
  throw std::invalid_argument("unknown source check '" + s + "'");
}

StageStatus stage_status_from(const std::string& s) {
  if (s == "atomic_kept") return StageStatus::atomic_kept;
  if (s == "cross_checked_kept") return StageStatus::cross_checked_kept;
  if (s == "cross_check_discarded") return StageStatus::cross_check_discarded;
  throw std::invalid_argument("unknown stage status '" + s + "'");
}

MergeMode merge_mode_from(const std::string& s) {
  if (s == "llm") return MergeMode::llm;
  if (s == "deterministic") return MergeMode::deterministic;
  throw std::invalid_argument("unknown merge mode '" + s + "' (llm or deterministic)");
}

LocationType location_type_from(const std::string& s) {
  if (s == "diagram_atom_ref") return LocationType::diagram_atom_ref;
  if (s == "requirement_atom_ref") return LocationType::requirement_atom_ref;
  if (s == "free_text") return LocationType::free_text;
  throw std::invalid_argument("unknown location type '" + s + "'");
}

IssueKind issue_kind_from(const std::string& s) {
  if (s == "accuracy") return IssueKind::accuracy;
  if (s == "completeness") return IssueKind::completeness;
  throw std::invalid_argument("unknown issue kind '" + s + "'");
}

std::vector<Issue> EvaluationReport::mcet_a_issues() const { return issues; }

std::vector<Issue> EvaluationReport::mcet_x_issues() const {
  std::vector<Issue> out;
  for (const auto& i : issues) {
    if (i.stage_status != StageStatus::cross_check_discarded) out.push_back(i);
  }
  return out;
}

namespace {

std::size_t issue_ordinal(const std::string& id) {
  auto dot = id.rfind('.');
  if (dot == std::string::npos) return 0;
  try {
    return std::stoul(id.substr(dot + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json issue_list_json(const std::vector<RawIssue>& issues) {
  json arr = json::array();
  for (const auto& i : issues) {
    json o{{"description", i.description}, {"kind", to_string(i.kind)}};
    if (i.location_hint) o["location_hint"] = *i.location_hint;
    arr.push_back(std::move(o));
  }
  return json{{"issues", arr}};
}

std::string bullet_list(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (const auto& s : items) out += "- " + s + "\n";
  out.pop_back();
  return out;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

CheckSummary summarize(const CheckResult& r, bool completed = true) {
  CheckSummary s;
  s.source_check = r.source_check;
  s.completed = completed;
  s.samples_used = r.samples_used;
  s.raw_response_refs = r.raw_response_refs;
  s.failed_atom_ids = r.failed_atom_ids;
  for (const auto& i : r.issues) s.issue_ids.push_back(i.issue_id);
  return s;
}

}  // namespace

void sort_issues(std::vector<Issue>& issues) {
  auto key = [](const Issue& i) {
    std::size_t loc = i.location.type == LocationType::free_text ? 0 : atom_index(i.location.value);
    return std::tuple(static_cast<int>(i.source_check), loc, issue_ordinal(i.issue_id));
  };
  std::stable_sort(issues.begin(), issues.end(), [&](const Issue& a, const Issue& b) {
    auto ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    return a.issue_id < b.issue_id;
  });
}

std::vector<VotedIssue> merge_votes_deterministic(const std::vector<std::vector<RawIssue>>& samples,
                                                  int n) {
  struct Group {
    RawIssue first;
    int count = 0;
    int last_sample = -1;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (const auto& issue : samples[s]) {
      const auto norm = detail::normalize_text(issue.description);
      auto [it, fresh] = index.emplace(norm, groups.size());
      if (fresh) groups.push_back({issue, 0, -1});
      Group& g = groups[it->second];
      if (g.last_sample != static_cast<int>(s)) {
        ++g.count;
        g.last_sample = static_cast<int>(s);
      }
    }
  }
  std::vector<VotedIssue> out;
  for (auto& g : groups) {
    if (g.count >= majority_threshold(n)) out.push_back({std::move(g.first), g.count});
  }
  return out;
}

std::string render_context(const DiagramAtom& atom, const AtomContext& ctx) {
  std::vector<std::string> guards;
  for (const auto& g : ctx.enclosing_guards) {
    guards.push_back(to_string(g.kind) + (g.guard ? " [" + *g.guard + "]" : std::string()));
  }
  std::string out = "Atom id: " + atom.atom_id + " (" + to_string(atom.arrow.kind()) + " message)\n";
  out += "Preceding messages:\n" + bullet_list(ctx.preceding) + "\n";
  out += "Following messages:\n" + bullet_list(ctx.following) + "\n";
  out += "Enclosing fragments (outermost first):\n" + bullet_list(guards) + "\n";
  out += "Attached notes:\n" + bullet_list(ctx.attached_notes);
  return out;
}

Pipeline::Pipeline(Gateway& gateway, const PromptKit& kit, PipelineConfig cfg)
    : gateway_(gateway), kit_(kit), cfg_(std::move(cfg)) {
  if (cfg_.votes < 1) throw std::invalid_argument("votes must be >= 1");
  if (cfg_.split_votes < 1) throw std::invalid_argument("split_votes must be >= 1");
}

LlmRequest Pipeline::request(TemplateId id, std::string rendered, double temperature) const {
  LlmRequest r;
  r.prompt_id = to_string(id);
  r.rendered_prompt = std::move(rendered);
  r.model = cfg_.model;
  r.temperature = temperature;
  r.top_p = cfg_.top_p;
  r.max_tokens = cfg_.max_tokens;
  return r;
}

template <typename T>
Decoded<T> Pipeline::call_decoded(const LlmRequest& r, Decoded<T> (*decode)(std::string_view),
                                  std::vector<std::string>& refs) {
  const LlmResponse first = gateway_.complete(r);
  refs.push_back(request_key(r));
  try {
    return decode(first.text);
  } catch (const MalformedResponse&) {
  }
  LlmRequest repair = r;
  repair.prompt_id = r.prompt_id + ".repair";
  repair.rendered_prompt = r.rendered_prompt + "\n\n" + first.text + "\n\n" + std::string(kRepairInstruction);
  const LlmResponse second = gateway_.complete(repair);
  refs.push_back(request_key(repair));
  return decode(second.text);
}

std::vector<std::vector<RawIssue>> Pipeline::sample_issue_lists(const LlmRequest& base,
                                                                std::vector<std::string>& refs,
                                                                std::vector<std::string>& warnings) {
  const auto n = static_cast<std::size_t>(cfg_.votes);
  std::vector<std::vector<RawIssue>> lists(n);
  std::vector<std::vector<std::string>> sample_refs(n), sample_warnings(n);
  parallel_for(n, gateway_.max_concurrency(), [&](std::size_t i) {
    LlmRequest r = base;
    r.sample_tag = static_cast<int>(i);
    try {
      auto d = call_decoded(r, &parse_issue_list, sample_refs[i]);
      lists[i] = std::move(d.value);
      for (const auto& w : d.warnings) {
        sample_warnings[i].push_back(base.prompt_id + " sample " + std::to_string(i) + ": " + w);
      }
    } catch (const MalformedResponse& e) {
      sample_warnings[i].push_back(base.prompt_id + " sample " + std::to_string(i) +
                                   ": unusable answer after repair, counted as no issues (" + e.what() + ")");
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    append(refs, sample_refs[i]);
    append(warnings, sample_warnings[i]);
  }
  return lists;
}

Decoded<std::vector<VotedIssue>> Pipeline::merge_votes(const std::vector<std::vector<RawIssue>>& samples,
                                                       const std::string& subject,
                                                       std::vector<std::string>* refs) {
  const int n = static_cast<int>(samples.size());
  Decoded<std::vector<VotedIssue>> out;
  const bool nothing = std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.empty(); });
  if (nothing) return out;
  if (cfg_.merge_mode == MergeMode::deterministic || n == 1) {
    out.value = merge_votes_deterministic(samples, n);
    return out;
  }

  std::string responses = subject.empty() ? std::string() : "Subject: " + subject + "\n\n";
  for (int i = 0; i < n; ++i) {
    responses += "List " + std::to_string(i + 1) + ":\n```json\n" +
                 issue_list_json(samples[static_cast<std::size_t>(i)]).dump() + "\n```\n";
  }
  const auto r = request(TemplateId::P5_vote_merge,
                         kit_.render(TemplateId::P5_vote_merge, {{"n", std::to_string(n)}, {"responses", responses}}),
                         0.0);
  std::vector<std::string> local_refs;
  try {
    auto merged = call_decoded(r, &parse_merged_issues, local_refs);
    out.warnings = std::move(merged.warnings);
    for (auto& m : merged.value) {
      if (m.votes < majority_threshold(n)) continue;
      out.value.push_back({std::move(m.issue), std::min(m.votes, n)});
    }
  } catch (const MalformedResponse& e) {
    out.warnings.push_back("vote merge" + (subject.empty() ? std::string() : " for " + subject) +
                           ": unusable answer after repair, used deterministic voting (" + e.what() + ")");
    out.value = merge_votes_deterministic(samples, n);
  }
  if (refs) append(*refs, local_refs);
  return out;
}

std::vector<Issue> Pipeline::voted_issues(const LlmRequest& base, SourceCheck source,
                                          const std::optional<IssueLocation>& location,
                                          const std::string& id_prefix, const std::string& subject,
                                          CheckResult& out) {
  auto lists = sample_issue_lists(base, out.raw_response_refs, out.warnings);
  auto merged = merge_votes(lists, subject, &out.raw_response_refs);
  append(out.warnings, merged.warnings);
  std::vector<Issue> issues;
  for (std::size_t k = 0; k < merged.value.size(); ++k) {
    auto& v = merged.value[k];
    Issue i;
    i.issue_id = id_prefix + "." + std::to_string(k);
    i.description = v.issue.description;
    i.kind = v.issue.kind;
    i.source_check = source;
    i.location = location ? *location
                          : IssueLocation{LocationType::free_text, v.issue.location_hint.value_or("")};
    i.votes = std::clamp(v.votes, 1, cfg_.votes);
    issues.push_back(std::move(i));
  }
  return issues;
}

CheckResult Pipeline::holistic_check(const std::string& requirements, const std::string& diagram_source) {
  CheckResult out;
  out.source_check = SourceCheck::holistic;
  out.samples_used = cfg_.votes;
  const auto base = request(TemplateId::P1_holistic,
                            kit_.render(TemplateId::P1_holistic,
                                        {{"requirements", requirements}, {"diagram", diagram_source}}),
                            cfg_.temperature);
  out.issues = voted_issues(base, SourceCheck::holistic, std::nullopt, "H", "holistic check", out);
  return out;
}

CheckResult Pipeline::diagram_atom_check(const std::string& requirements, const std::string& diagram_source,
                                         const SequenceDiagram& diagram, const std::vector<DiagramAtom>& atoms) {
  CheckResult out;
  out.source_check = SourceCheck::diagram_atom;
  out.samples_used = cfg_.votes;
  std::vector<CheckResult> parts(atoms.size());
  std::vector<bool> failed(atoms.size(), false);
  parallel_for(atoms.size(), gateway_.max_concurrency(), [&](std::size_t i) {
    const DiagramAtom& atom = atoms[i];
    const auto rendered = render_atom(atom);
    const auto ctx = atom_context(diagram, atom.atom_id, cfg_.context_window_k);
    const auto base = request(TemplateId::P2_diagram_atom,
                              kit_.render(TemplateId::P2_diagram_atom, {{"requirements", requirements},
                                                                        {"diagram", diagram_source},
                                                                        {"atom", rendered},
                                                                        {"context", render_context(atom, ctx)}}),
                              cfg_.temperature);
    try {
      parts[i].issues = voted_issues(base, SourceCheck::diagram_atom,
                                     IssueLocation{LocationType::diagram_atom_ref, atom.atom_id}, atom.atom_id,
                                     "diagram-atom " + atom.atom_id + ": " + rendered, parts[i]);
    } catch (const std::runtime_error& e) {  // transport failures and replay misses
      failed[i] = true;
      parts[i].warnings.push_back("diagram-atom " + atom.atom_id + " not checked: " + e.what());
    }
  });
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    auto& p = parts[i];
    out.issues.insert(out.issues.end(), p.issues.begin(), p.issues.end());
    append(out.raw_response_refs, p.raw_response_refs);
    append(out.warnings, p.warnings);
    if (failed[i]) out.failed_atom_ids.push_back(atoms[i].atom_id);
  }
  return out;
}

Decoded<std::vector<RequirementAtom>> Pipeline::split_requirements(const std::string& requirements,
                                                                   std::vector<std::string>* refs) {
  if (detail::trim(requirements).empty()) throw std::invalid_argument("requirements text is empty");
  const auto rendered = kit_.render(TemplateId::P3_split_requirements, {{"requirements", requirements}});
  Decoded<std::vector<RequirementAtom>> out;
  std::vector<std::string> texts;
  std::vector<std::string> local_refs;

  if (cfg_.split_votes == 1) {
    auto d = call_decoded(request(TemplateId::P3_split_requirements, rendered, 0.0), &parse_requirement_atoms,
                          local_refs);
    texts = std::move(d.value);
    append(out.warnings, d.warnings);
  } else {
    // Most frequent normalized atom list wins; ties go to the earliest sample.
    const auto n = static_cast<std::size_t>(cfg_.split_votes);
    std::vector<std::optional<std::vector<std::string>>> lists(n);
    std::vector<std::vector<std::string>> sample_refs(n);
    parallel_for(n, gateway_.max_concurrency(), [&](std::size_t i) {
      auto r = request(TemplateId::P3_split_requirements, rendered, cfg_.temperature);
      r.sample_tag = static_cast<int>(i);
      try {
        lists[i] = call_decoded(r, &parse_requirement_atoms, sample_refs[i]).value;
      } catch (const MalformedResponse&) {
      }
    });
    std::map<std::vector<std::string>, std::pair<int, std::size_t>> tally;  // count, first sample
    for (std::size_t i = 0; i < n; ++i) {
      append(local_refs, sample_refs[i]);
      if (!lists[i]) {
        out.warnings.push_back("requirement split sample " + std::to_string(i) + ": unusable answer after repair");
        continue;
      }
      std::vector<std::string> norm;
      for (const auto& t : *lists[i]) norm.push_back(detail::normalize_text(t));
      auto [it, fresh] = tally.emplace(norm, std::pair{0, i});
      ++it->second.first;
    }
    if (tally.empty()) {
      if (refs) append(*refs, local_refs);
      throw MalformedResponse("no requirement split sample could be decoded");
    }
    auto best = std::max_element(tally.begin(), tally.end(), [](const auto& a, const auto& b) {
      if (a.second.first != b.second.first) return a.second.first < b.second.first;
      return a.second.second > b.second.second;
    });
    texts = *lists[best->second.second];
  }
  if (refs) append(*refs, local_refs);

  std::set<std::string> seen;
  for (const auto& t : texts) {
    if (!seen.insert(detail::normalize_text(t)).second) {
      out.warnings.push_back("duplicate requirement atom dropped: \"" + t + "\"");
      continue;
    }
    out.value.push_back(make_requirement_atom(out.value.size(), t, requirements));
  }
  return out;
}

CheckResult Pipeline::requirement_atom_check(const std::string& diagram_source,
                                             const std::vector<RequirementAtom>& atoms) {
  CheckResult out;
  out.source_check = SourceCheck::requirement_atom;
  out.samples_used = cfg_.votes;
  std::vector<CheckResult> parts(atoms.size());
  std::vector<bool> failed(atoms.size(), false);
  parallel_for(atoms.size(), gateway_.max_concurrency(), [&](std::size_t i) {
    const RequirementAtom& atom = atoms[i];
    const auto base = request(
        TemplateId::P4_requirement_atom,
        kit_.render(TemplateId::P4_requirement_atom, {{"diagram", diagram_source}, {"requirement_atom", atom.text}}),
        cfg_.temperature);
    try {
      parts[i].issues = voted_issues(base, SourceCheck::requirement_atom,
                                     IssueLocation{LocationType::requirement_atom_ref, atom.atom_id},
                                     atom.atom_id, "requirement-atom " + atom.atom_id + ": " + atom.text, parts[i]);
    } catch (const std::runtime_error& e) {
      failed[i] = true;
      parts[i].warnings.push_back("requirement-atom " + atom.atom_id + " not checked: " + e.what());
    }
  });
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    auto& p = parts[i];
    out.issues.insert(out.issues.end(), p.issues.begin(), p.issues.end());
    append(out.raw_response_refs, p.raw_response_refs);
    append(out.warnings, p.warnings);
    if (failed[i]) out.failed_atom_ids.push_back(atoms[i].atom_id);
  }
  return out;
}

Decoded<std::vector<Issue>> Pipeline::cross_check(const CheckResult& low_authority,
                                                  const std::vector<RequirementAtom>& correct_atoms,
                                                  const std::string& diagram_source,
                                                  const std::vector<DiagramAtom>& diagram_atoms,
                                                  CrossCheckSummary* summary) {
  if (low_authority.source_check == SourceCheck::requirement_atom) {
    throw std::invalid_argument("requirement-atom issues are never cross-checked");
  }
  CrossCheckSummary local;
  local.source_check = low_authority.source_check;
  Decoded<std::vector<Issue>> out;
  out.value = low_authority.issues;
  for (auto& i : out.value) i.stage_status = StageStatus::cross_checked_kept;
  auto finish = [&] {
    if (summary) *summary = std::move(local);
    return std::move(out);
  };
  if (out.value.empty() || correct_atoms.empty()) return finish();

  std::map<std::string, std::string> atom_text;
  for (const auto& a : diagram_atoms) atom_text[a.atom_id] = render_atom(a);
  std::string junior;
  for (const auto& i : low_authority.issues) {
    junior += "- [" + i.issue_id + "] ";
    if (i.location.type == LocationType::diagram_atom_ref) {
      auto it = atom_text.find(i.location.value);
      junior += "(diagram-atom " + i.location.value +
                (it != atom_text.end() ? ": " + it->second : std::string()) + ") ";
    } else if (!i.location.value.empty()) {
      junior += "(" + i.location.value + ") ";
    }
    junior += i.description + "\n";
  }
  std::string correct;
  for (const auto& a : correct_atoms) correct += "- " + a.atom_id + ": " + a.text + "\n";

  const auto r = request(TemplateId::P6_cross_check,
                         kit_.render(TemplateId::P6_cross_check, {{"junior_issues", junior},
                                                                  {"correct_requirement_atoms", correct},
                                                                  {"diagram", diagram_source}}),
                         0.0);
  local.llm_called = true;
  const std::string what = to_string(low_authority.source_check) + " cross-check";
  Decoded<std::vector<DiscardVerdict>> verdicts;
  try {
    verdicts = call_decoded(r, &parse_cross_check, local.raw_response_refs);
  } catch (const MalformedResponse& e) {
    local.failed_open = true;
    out.warnings.push_back(what + ": unusable answer after repair, all issues kept (" + e.what() + ")");
    return finish();
  }
  for (const auto& w : verdicts.warnings) out.warnings.push_back(what + ": " + w);
  for (const auto& v : verdicts.value) {
    auto it = std::find_if(out.value.begin(), out.value.end(),
                           [&](const Issue& i) { return i.issue_id == v.issue_id; });
    if (it == out.value.end()) {
      out.warnings.push_back(what + ": verdict for unknown issue '" + v.issue_id + "' ignored");
      continue;
    }
    if (it->stage_status == StageStatus::cross_check_discarded) continue;
    it->stage_status = StageStatus::cross_check_discarded;
    it->conflicting_atom = v.conflicting_atom;
    if (!v.reason.empty()) it->discard_reason = v.reason;
    local.discarded_ids.push_back(it->issue_id);
  }
  return finish();
}

EvaluationReport Pipeline::evaluate(const std::string& requirements, const std::string& diagram_source) {
  if (detail::trim(requirements).empty()) throw std::invalid_argument("requirements text is empty");
  const ParseResult parsed = parse_diagram(diagram_source);

  EvaluationReport report;
  const bool replay = gateway_.provider_kind() == ProviderKind::replay;
  const auto t0 = std::chrono::steady_clock::now();
  if (!replay) report.started_at = utc_now();
  const Usage before = gateway_.usage();

  report.tool_version = SEQJUDGE_VERSION;
  report.provider = to_string(gateway_.provider_kind());
  report.max_concurrency = gateway_.max_concurrency();
  report.config = cfg_;
  report.requirements_sha256 = detail::sha256_hex(requirements);
  report.diagram_sha256 = detail::sha256_hex(diagram_source);
  report.diagram_atoms = extract_diagram_atoms(parsed.diagram);

  CheckResult holistic, diagram, requirement;
  requirement.source_check = SourceCheck::requirement_atom;
  requirement.samples_used = cfg_.votes;
  Decoded<std::vector<RequirementAtom>> split;
  std::vector<std::string> split_refs;
  bool split_ok = true;
  parallel_for(3, 3, [&](std::size_t task) {
    switch (task) {
      case 0: holistic = holistic_check(requirements, diagram_source); break;
      case 1: diagram = diagram_atom_check(requirements, diagram_source, parsed.diagram, report.diagram_atoms); break;
      case 2:
        try {
          split = split_requirements(requirements, &split_refs);
        } catch (const MalformedResponse& e) {
          split_ok = false;
          split.warnings.push_back(std::string("requirement split failed, requirement-atom check skipped: ") +
                                   e.what());
          break;
        }
        requirement = requirement_atom_check(diagram_source, split.value);
        break;
    }
  });
  report.requirement_atoms = split.value;
  requirement.raw_response_refs.insert(requirement.raw_response_refs.begin(), split_refs.begin(), split_refs.end());

  std::set<std::string> flagged(requirement.failed_atom_ids.begin(), requirement.failed_atom_ids.end());
  for (const auto& i : requirement.issues) flagged.insert(i.location.value);
  std::vector<RequirementAtom> correct;
  for (const auto& a : report.requirement_atoms) {
    if (!flagged.contains(a.atom_id)) {
      correct.push_back(a);
      report.correct_requirement_atom_ids.push_back(a.atom_id);
    }
  }
  report.unchecked_requirement_atom_ids = requirement.failed_atom_ids;

  std::vector<Decoded<std::vector<Issue>>> crossed(2);
  std::vector<CrossCheckSummary> cross_summaries(2);
  const CheckResult* low[] = {&holistic, &diagram};
  parallel_for(2, 2, [&](std::size_t i) {
    crossed[i] = cross_check(*low[i], correct, diagram_source, report.diagram_atoms, &cross_summaries[i]);
  });

  report.checks = {summarize(holistic), summarize(diagram), summarize(requirement, split_ok)};
  report.cross_checks = cross_summaries;
  for (const auto& c : crossed) report.issues.insert(report.issues.end(), c.value.begin(), c.value.end());
  report.issues.insert(report.issues.end(), requirement.issues.begin(), requirement.issues.end());
  sort_issues(report.issues);

  for (const auto& w : parsed.warnings) {
    report.warnings.push_back("diagram line " + std::to_string(w.line) + ": " + w.message);
  }
  append(report.warnings, holistic.warnings);
  append(report.warnings, diagram.warnings);
  append(report.warnings, split.warnings);
  append(report.warnings, requirement.warnings);
  for (const auto& c : crossed) append(report.warnings, c.warnings);

  const Usage after = gateway_.usage();
  report.accounting.prompt_tokens = after.prompt_tokens - before.prompt_tokens;
  report.accounting.completion_tokens = after.completion_tokens - before.completion_tokens;
  report.accounting.total_tokens = report.accounting.prompt_tokens + report.accounting.completion_tokens;
  report.accounting.llm_calls = after.calls - before.calls;
  report.accounting.llm_latency_ms = after.latency_ms - before.latency_ms;
  if (!replay) {
    report.accounting.wall_time_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  }
  return report;
}

}  // namespace seqjudge
