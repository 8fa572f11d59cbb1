#include <gtest/gtest.h>

#include <mutex>
#include <thread>

#include "seqjudge/parser.hpp"
#include "seqjudge/pipeline.hpp"
#include "test_support.hpp"

namespace seqjudge {
namespace {

using test::read_fixture;

const PromptKit& kit() {
  static const PromptKit k = PromptKit::load(SEQJUDGE_DEFAULT_PROMPTS_DIR);
  return k;
}

std::string issues_answer(const std::vector<std::string>& descriptions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : descriptions) arr.push_back({{"description", d}, {"kind", "accuracy"}});
  return "thinking...\n```json\n" + nlohmann::json{{"issues", arr}}.dump() + "\n```";
}

// Wraps another provider and remembers every request it saw.
class Recorder : public Provider {
 public:
  explicit Recorder(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {}
  LlmResponse complete(const LlmRequest& r) override {
    {
      std::lock_guard lock(mutex_);
      seen_.push_back(r);
    }
    return inner_->complete(r);
  }
  ProviderKind kind() const override { return inner_->kind(); }
  std::vector<LlmRequest> seen() const {
    std::lock_guard lock(mutex_);
    return seen_;
  }
  std::size_t count(const std::string& prompt_id) const {
    std::size_t n = 0;
    for (const auto& r : seen()) n += r.prompt_id == prompt_id;
    return n;
  }

 private:
  std::shared_ptr<Provider> inner_;
  mutable std::mutex mutex_;
  std::vector<LlmRequest> seen_;
};

struct Harness {
  std::shared_ptr<ScriptedProvider> script = std::make_shared<ScriptedProvider>();
  std::shared_ptr<Recorder> recorder = std::make_shared<Recorder>(script);
  Gateway gateway{recorder, GatewayOptions{4}};

  Pipeline pipeline(MergeMode mode = MergeMode::deterministic, int votes = 5) {
    PipelineConfig cfg;
    cfg.merge_mode = mode;
    cfg.votes = votes;
    return Pipeline(gateway, kit(), cfg);
  }
  void per_sample(const std::string& prompt_id, const std::vector<std::string>& answers,
                  std::vector<std::string> contains = {}) {
    for (std::size_t s = 0; s < answers.size(); ++s) {
      script->add_rule({prompt_id, contains, std::set<int>{static_cast<int>(s)}, answers[s]});
    }
  }
};

std::vector<RawIssue> raw(std::initializer_list<const char*> descriptions) {
  std::vector<RawIssue> out;
  for (const char* d : descriptions) out.push_back({d, IssueKind::accuracy, std::nullopt});
  return out;
}

TEST(MergeVotes, MajorityThresholdIsCeilOfHalf) {
  EXPECT_EQ(majority_threshold(1), 1);
  EXPECT_EQ(majority_threshold(4), 2);
  EXPECT_EQ(majority_threshold(5), 3);
}

TEST(MergeVotes, ThreeOfFiveKept) {
  std::vector<std::vector<RawIssue>> s{raw({"x"}), raw({"x"}), raw({"x"}), raw({}), raw({})};
  auto out = merge_votes_deterministic(s, 5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].votes, 3);
}

TEST(MergeVotes, TwoOfFiveDiscarded) {
  std::vector<std::vector<RawIssue>> s{raw({"x"}), raw({"x"}), raw({}), raw({}), raw({})};
  EXPECT_TRUE(merge_votes_deterministic(s, 5).empty());
}

TEST(MergeVotes, SingleSampleKeepsEverything) {
  auto out = merge_votes_deterministic({raw({"a", "b"})}, 1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].votes, 1);
  EXPECT_EQ(out[1].votes, 1);
}

TEST(MergeVotes, NormalizesAndCountsASampleOnce) {
  std::vector<std::vector<RawIssue>> s{raw({"Show error: not in requirements!", "show error not in requirements"}),
                                       raw({"SHOW ERROR   not in requirements."}), raw({}), raw({}), raw({})};
  EXPECT_TRUE(merge_votes_deterministic(s, 5).empty());  // 2 samples, not 3
  s[2] = raw({"show error, not in requirements"});
  auto out = merge_votes_deterministic(s, 5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].votes, 3);
  EXPECT_EQ(out[0].issue.description, "Show error: not in requirements!");  // first wording wins
}

TEST(MergeVotes, LlmModeUsesMergePrompt) {
  Harness h;
  h.script->set_fallback("P5_vote_merge",
                         R"({"issues":[{"description":"merged","kind":"completeness","votes":4},
                                       {"description":"weak","kind":"accuracy","votes":2},
                                       {"description":"over","kind":"accuracy","votes":9}]})");
  auto p = h.pipeline(MergeMode::llm);
  std::vector<std::vector<RawIssue>> s{raw({"a"}), raw({"b"}), raw({"a"}), raw({"c"}), raw({"a"})};
  auto out = p.merge_votes(s, "holistic check");
  ASSERT_EQ(out.value.size(), 2u);
  EXPECT_EQ(out.value[0].issue.description, "merged");
  EXPECT_EQ(out.value[0].votes, 4);
  EXPECT_EQ(out.value[1].votes, 5);  // clamped to N
  const auto seen = h.recorder->seen();
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].temperature, 0.0);
  EXPECT_NE(seen[0].rendered_prompt.find("Subject: holistic check"), std::string::npos);
}

TEST(MergeVotes, LlmModeFallsBackToDeterministic) {
  Harness h;
  h.script->set_fallback("P5_vote_merge", "no idea");
  h.script->set_fallback("P5_vote_merge.repair", "still no idea");
  auto p = h.pipeline(MergeMode::llm);
  std::vector<std::vector<RawIssue>> s{raw({"a"}), raw({"a"}), raw({"a"}), raw({"c"}), raw({})};
  auto out = p.merge_votes(s);
  ASSERT_EQ(out.value.size(), 1u);
  EXPECT_EQ(out.value[0].votes, 3);
  ASSERT_EQ(out.warnings.size(), 1u);
  EXPECT_NE(out.warnings[0].find("deterministic"), std::string::npos);
  EXPECT_EQ(h.recorder->count("P5_vote_merge.repair"), 1u);
}

TEST(MergeVotes, LlmModeSkipsCallWhenNothingToMerge) {
  Harness h;
  auto p = h.pipeline(MergeMode::llm);
  EXPECT_TRUE(p.merge_votes({raw({}), raw({}), raw({}), raw({}), raw({})}).value.empty());
  EXPECT_TRUE(h.recorder->seen().empty());
}

TEST(HolisticCheck, AllEmptySamples) {
  Harness h;
  h.script->set_fallback("P1_holistic", issues_answer({}));
  auto p = h.pipeline(MergeMode::llm);
  auto r = p.holistic_check("Alice shall greet Bob.", "@startuml\nAlice -> Bob: Hi\n@enduml\n");
  EXPECT_TRUE(r.issues.empty());
  EXPECT_EQ(r.samples_used, 5);
  EXPECT_EQ(r.raw_response_refs.size(), 5u);
  EXPECT_EQ(h.recorder->count("P5_vote_merge"), 0u);
}

TEST(HolisticCheck, IssueInThreeOfFiveKept) {
  Harness h;
  const auto x = issues_answer({"Show error not in requirements"});
  const auto none = issues_answer({});
  h.per_sample("P1_holistic", {x, none, x, none, x});
  auto r = h.pipeline().holistic_check("req", "@startuml\nA -> B: m\n@enduml");
  ASSERT_EQ(r.issues.size(), 1u);
  const Issue& i = r.issues[0];
  EXPECT_EQ(i.issue_id, "H.0");
  EXPECT_EQ(i.votes, 3);
  EXPECT_EQ(i.source_check, SourceCheck::holistic);
  EXPECT_EQ(i.location.type, LocationType::free_text);
  EXPECT_EQ(i.stage_status, StageStatus::atomic_kept);
  // sample tags 0..4, configured temperature
  std::set<int> tags;
  for (const auto& req : h.recorder->seen()) {
    tags.insert(req.sample_tag);
    EXPECT_DOUBLE_EQ(req.temperature, 0.7);
  }
  EXPECT_EQ(tags, (std::set<int>{0, 1, 2, 3, 4}));
}

TEST(HolisticCheck, RepairPromptRescuesASample) {
  Harness h;
  const auto x = issues_answer({"x"});
  h.per_sample("P1_holistic", {"The answer is that x is wrong.", x, x, issues_answer({}), issues_answer({})});
  h.script->set_fallback("P1_holistic.repair", R"({"issues":[{"description":"x","kind":"accuracy"}]})");
  auto r = h.pipeline().holistic_check("req", "@startuml\nA -> B: m\n@enduml");
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].votes, 3);
  const auto seen = h.recorder->seen();
  auto repair = std::find_if(seen.begin(), seen.end(), [](auto& q) { return q.prompt_id == "P1_holistic.repair"; });
  ASSERT_NE(repair, seen.end());
  EXPECT_EQ(repair->sample_tag, 0);
  EXPECT_NE(repair->rendered_prompt.find(kRepairInstruction), std::string::npos);
  EXPECT_NE(repair->rendered_prompt.find("The answer is that x is wrong."), std::string::npos);
  EXPECT_EQ(r.raw_response_refs.size(), 6u);
}

TEST(HolisticCheck, UnrepairableSampleCountsAsEmpty) {
  Harness h;
  const auto x = issues_answer({"x"});
  h.per_sample("P1_holistic", {"garbage", x, x, x, issues_answer({})});
  h.script->set_fallback("P1_holistic.repair", "more garbage");
  auto r = h.pipeline().holistic_check("req", "@startuml\nA -> B: m\n@enduml");
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].votes, 3);
  EXPECT_EQ(r.samples_used, 5);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("sample 0"), std::string::npos);
}

TEST(HolisticCheck, TransportErrorPropagates) {
  Harness h;  // no rules at all
  EXPECT_THROW(h.pipeline().holistic_check("req", "@startuml\nA -> B: m\n@enduml"), TransportError);
}

TEST(DiagramAtomCheck, ZeroAtoms) {
  Harness h;
  const auto parsed = parse_diagram("@startuml\nparticipant A\n@enduml\n");
  auto r = h.pipeline().diagram_atom_check("req", "", parsed.diagram, extract_diagram_atoms(parsed.diagram));
  EXPECT_TRUE(r.issues.empty());
  EXPECT_TRUE(h.recorder->seen().empty());
}

TEST(DiagramAtomCheck, IssuesCarryAtomRefsAndFailuresAreWarnings) {
  Harness h;
  const std::string src = read_fixture("diagrams/user_data.puml");
  const auto parsed = parse_diagram(src);
  const auto atoms = extract_diagram_atoms(parsed.diagram);
  const auto x = issues_answer({"Display data: not in requirements"});
  h.per_sample("P2_diagram_atom", {x, x, x, x, x}, {"Atom under review: Bob -> Cat: Display data"});
  h.script->set_fallback("P2_diagram_atom", issues_answer({}));
  // D0 has no answer at all: fails, the rest continue
  h.script->add_rule({"P2_diagram_atom", {"Atom under review: Alice -> Bob: Authenticate"}, std::nullopt, ""});
  auto r = h.pipeline().diagram_atom_check("req", src, parsed.diagram, atoms);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].issue_id, "D4.0");
  EXPECT_EQ(r.issues[0].location, (IssueLocation{LocationType::diagram_atom_ref, "D4"}));
  EXPECT_EQ(r.issues[0].votes, 5);
  // D0's answer is malformed and its repair prompt has no scripted answer
  EXPECT_EQ(r.failed_atom_ids, std::vector<std::string>{"D0"});
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("D0 not checked"), std::string::npos);
}

TEST(DiagramAtomCheck, ReplayMissFailsOnlyThatAtom) {
  const std::string src = read_fixture("diagrams/user_data.puml");
  const auto parsed = parse_diagram(src);
  const auto atoms = extract_diagram_atoms(parsed.diagram);
  auto records = read_transcript(test::fixtures_dir() / "user_data.jsonl");
  // drop every P2 record of D2
  std::erase_if(records, [](const TranscriptRecord& r) {
    return r.request.prompt_id == "P2_diagram_atom" &&
           r.request.rendered_prompt.find("Atom under review: Bob -> Cat: Get Alice's data") != std::string::npos;
  });
  Gateway g(std::make_shared<ReplayProvider>(records));
  Pipeline p(g, kit(), {});
  const auto req = read_fixture("user_data_requirements.txt");
  auto r = p.diagram_atom_check(req, src, parsed.diagram, atoms);
  EXPECT_EQ(r.failed_atom_ids, std::vector<std::string>{"D2"});
  ASSERT_EQ(r.issues.size(), 2u);  // D3 and D4 still checked
}

TEST(SplitRequirements, CompoundSentence) {
  Harness h;
  h.script->set_fallback("P3_split_requirements",
                         R"({"atoms":["Bob shall ask cat for the user data","Cat shall return the user data to Bob"]})");
  auto d = h.pipeline().split_requirements("Bob shall then ask cat for the user data, which she returns.");
  ASSERT_EQ(d.value.size(), 2u);
  EXPECT_EQ(d.value[0].atom_id, "R0");
  EXPECT_EQ(d.value[1].atom_id, "R1");
  EXPECT_EQ(d.value[1].text, "Cat shall return the user data to Bob");
  const auto seen = h.recorder->seen();
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].temperature, 0.0);
}

TEST(SplitRequirements, AtomicSentenceUnchanged) {
  Harness h;
  h.script->set_fallback("P3_split_requirements", R"({"atoms":["Alice shall first authenticate with Bob"]})");
  auto d = h.pipeline().split_requirements("Alice shall first authenticate with Bob");
  ASSERT_EQ(d.value.size(), 1u);
  EXPECT_EQ(d.value[0].text, "Alice shall first authenticate with Bob");
  ASSERT_TRUE(d.value[0].source_span);
  EXPECT_EQ(d.value[0].source_span->begin, 0u);
}

TEST(SplitRequirements, EmptyRequirementsBeforeAnyCall) {
  Harness h;
  EXPECT_THROW(h.pipeline().split_requirements("  \n"), std::invalid_argument);
  EXPECT_TRUE(h.recorder->seen().empty());
}

TEST(SplitRequirements, DuplicatesDroppedWithWarning) {
  Harness h;
  h.script->set_fallback("P3_split_requirements", R"({"atoms":["A shall x.","a shall X","B shall y"]})");
  auto d = h.pipeline().split_requirements("A shall x. B shall y.");
  ASSERT_EQ(d.value.size(), 2u);
  EXPECT_EQ(d.value[1].atom_id, "R1");
  EXPECT_EQ(d.warnings.size(), 1u);
}

TEST(SplitRequirements, MalformedAfterRepairThrows) {
  Harness h;
  h.script->set_fallback("P3_split_requirements", "atoms: one, two");
  h.script->set_fallback("P3_split_requirements.repair", "atoms: one, two");
  EXPECT_THROW(h.pipeline().split_requirements("x"), MalformedResponse);
}

TEST(SplitRequirements, SplitVotesPicksMostFrequentList) {
  Harness h;
  h.per_sample("P3_split_requirements", {R"({"atoms":["a","b"]})", R"({"atoms":["a b"]})", R"({"atoms":["A.","b"]})"});
  PipelineConfig cfg;
  cfg.split_votes = 3;
  Pipeline p(h.gateway, kit(), cfg);
  auto d = p.split_requirements("a b");
  ASSERT_EQ(d.value.size(), 2u);
  EXPECT_EQ(d.value[0].text, "a");
  for (const auto& r : h.recorder->seen()) EXPECT_DOUBLE_EQ(r.temperature, 0.7);
}

TEST(RequirementAtomCheck, ZeroAtoms) {
  Harness h;
  auto r = h.pipeline().requirement_atom_check("@startuml\n@enduml", {});
  EXPECT_TRUE(r.issues.empty());
  EXPECT_TRUE(h.recorder->seen().empty());
}

CheckResult low(SourceCheck s, std::vector<std::string> ids) {
  CheckResult r;
  r.source_check = s;
  for (auto& id : ids) {
    Issue i;
    i.issue_id = id;
    i.description = "issue " + id;
    i.source_check = s;
    i.location = s == SourceCheck::diagram_atom ? IssueLocation{LocationType::diagram_atom_ref, id.substr(0, id.find('.'))}
                                                : IssueLocation{LocationType::free_text, ""};
    r.issues.push_back(i);
  }
  return r;
}

const std::vector<RequirementAtom> kCorrect{{"R2", "Cat shall return the user data to Bob", std::nullopt}};

TEST(CrossCheck, EmptyLowAuthorityMakesNoCall) {
  Harness h;
  auto out = h.pipeline().cross_check(low(SourceCheck::diagram_atom, {}), kCorrect, "d");
  EXPECT_TRUE(out.value.empty());
  EXPECT_TRUE(h.recorder->seen().empty());
}

TEST(CrossCheck, NoCorrectAtomsKeepsEverythingWithoutACall) {
  Harness h;
  CrossCheckSummary s;
  auto out = h.pipeline().cross_check(low(SourceCheck::holistic, {"H.0", "H.1"}), {}, "d", {}, &s);
  ASSERT_EQ(out.value.size(), 2u);
  for (const auto& i : out.value) EXPECT_EQ(i.stage_status, StageStatus::cross_checked_kept);
  EXPECT_TRUE(h.recorder->seen().empty());
  EXPECT_FALSE(s.llm_called);
}

TEST(CrossCheck, DiscardsConflictingIssue) {
  Harness h;
  h.script->set_fallback("P6_cross_check",
                         R"({"discard":[{"issue_id":"D3.0","conflicting_atom":"R2","reason":"R2 is correct"},
                                        {"issue_id":"D9.9"}]})");
  CrossCheckSummary s;
  auto out = h.pipeline().cross_check(low(SourceCheck::diagram_atom, {"D3.0", "D4.0"}), kCorrect, "d", {}, &s);
  ASSERT_EQ(out.value.size(), 2u);
  EXPECT_EQ(out.value[0].stage_status, StageStatus::cross_check_discarded);
  EXPECT_EQ(out.value[0].conflicting_atom, "R2");
  EXPECT_EQ(out.value[1].stage_status, StageStatus::cross_checked_kept);
  EXPECT_EQ(out.warnings.size(), 1u);  // unknown D9.9
  EXPECT_EQ(s.discarded_ids, std::vector<std::string>{"D3.0"});
  const auto seen = h.recorder->seen();
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_NE(seen[0].rendered_prompt.find("- [D3.0] (diagram-atom D3) issue D3.0"), std::string::npos);
  EXPECT_NE(seen[0].rendered_prompt.find("- R2: Cat shall return the user data to Bob"), std::string::npos);
}

TEST(CrossCheck, FailsOpen) {
  Harness h;
  h.script->set_fallback("P6_cross_check", "discard D3.0 please");
  h.script->set_fallback("P6_cross_check.repair", "D3.0");
  CrossCheckSummary s;
  auto out = h.pipeline().cross_check(low(SourceCheck::diagram_atom, {"D3.0"}), kCorrect, "d", {}, &s);
  ASSERT_EQ(out.value.size(), 1u);
  EXPECT_EQ(out.value[0].stage_status, StageStatus::cross_checked_kept);
  ASSERT_EQ(out.warnings.size(), 1u);
  EXPECT_TRUE(s.failed_open);
}

TEST(CrossCheck, RequirementIssuesAreNeverCrossChecked) {
  Harness h;
  EXPECT_THROW(h.pipeline().cross_check(low(SourceCheck::requirement_atom, {"R0.0"}), kCorrect, "d"),
               std::invalid_argument);
}

EvaluationReport run_user_data(const std::string& script = "user_data.script.json", std::size_t concurrency = 4) {
  Gateway g(ScriptedProvider::shared_from_file(test::fixtures_dir() / script), GatewayOptions{concurrency});
  Pipeline p(g, kit(), {});
  return p.evaluate(read_fixture("user_data_requirements.txt"), read_fixture("diagrams/user_data.puml"));
}

const Issue& find(const EvaluationReport& r, const std::string& id) {
  auto it = std::find_if(r.issues.begin(), r.issues.end(), [&](const Issue& i) { return i.issue_id == id; });
  if (it == r.issues.end()) throw std::runtime_error("no issue " + id);
  return *it;
}

TEST(Evaluate, UserDataScenario) {
  const auto r = run_user_data();
  std::vector<std::string> ids;
  for (const auto& i : r.issues) ids.push_back(i.issue_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"H.0", "H.1", "D3.0", "D4.0", "R3.0"}));
  EXPECT_EQ(find(r, "D3.0").stage_status, StageStatus::cross_check_discarded);
  EXPECT_EQ(find(r, "D3.0").conflicting_atom, "R2");
  EXPECT_EQ(find(r, "D4.0").stage_status, StageStatus::cross_checked_kept);
  EXPECT_EQ(find(r, "H.0").stage_status, StageStatus::cross_checked_kept);
  EXPECT_EQ(find(r, "R3.0").stage_status, StageStatus::atomic_kept);
  EXPECT_EQ(r.correct_requirement_atom_ids, (std::vector<std::string>{"R0", "R1", "R2"}));
  EXPECT_EQ(r.mcet_a_issues().size(), 5u);
  EXPECT_EQ(r.mcet_x_issues().size(), 4u);
  EXPECT_EQ(r.diagram_atoms.size(), 6u);
  EXPECT_EQ(r.requirement_atoms.size(), 4u);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_TRUE(r.started_at);  // scripted runs are timestamped
  ASSERT_EQ(r.checks.size(), 3u);
  EXPECT_EQ(r.checks[2].raw_response_refs.size(), 1u + 4 * 5 + 1);  // split, P4 samples, one merge
}

TEST(Evaluate, CleanPairHasNoIssues) {
  Gateway g(ScriptedProvider::shared_from_file(test::fixtures_dir() / "clean/script.json"));
  Pipeline p(g, kit(), {});
  auto r = p.evaluate(read_fixture("clean/requirements.txt"), read_fixture("clean/diagram.puml"));
  EXPECT_TRUE(r.mcet_a_issues().empty());
  EXPECT_TRUE(r.mcet_x_issues().empty());
  EXPECT_EQ(r.correct_requirement_atom_ids, std::vector<std::string>{"R0"});
}

TEST(Evaluate, ParseErrorBeforeAnyCall) {
  Harness h;
  EXPECT_THROW(h.pipeline().evaluate("req", "@startuml\nalt x\nA -> B: m\n@enduml\n"), ParseError);
  EXPECT_THROW(h.pipeline().evaluate("", "@startuml\n@enduml\n"), std::invalid_argument);
  EXPECT_TRUE(h.recorder->seen().empty());
}

TEST(Evaluate, SplitFailureSkipsOnlyRequirementCheck) {
  Harness h;
  h.script->set_fallback("P1_holistic", issues_answer({"x"}));
  h.script->set_fallback("P2_diagram_atom", issues_answer({}));
  h.script->set_fallback("P3_split_requirements", "no");
  h.script->set_fallback("P3_split_requirements.repair", "no");
  auto r = h.pipeline().evaluate("Alice greets Bob.", "@startuml\nAlice -> Bob: Hi\n@enduml\n");
  ASSERT_EQ(r.checks.size(), 3u);
  EXPECT_FALSE(r.checks[2].completed);
  EXPECT_TRUE(r.requirement_atoms.empty());
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].stage_status, StageStatus::cross_checked_kept);  // nothing to cross-check against
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Evaluate, ReportIsIndependentOfConcurrency) {
  auto a = run_user_data("user_data.script.json", 1);
  auto b = run_user_data("user_data.script.json", 8);
  a.started_at = b.started_at;
  a.accounting.wall_time_ms = b.accounting.wall_time_ms;
  a.max_concurrency = b.max_concurrency;
  EXPECT_EQ(a, b);
}

// Tracks how many requests are in flight at once.
class SlowProvider : public Provider {
 public:
  explicit SlowProvider(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {}
  LlmResponse complete(const LlmRequest& r) override {
    const int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --in_flight_;
    return inner_->complete(r);
  }
  ProviderKind kind() const override { return inner_->kind(); }
  int peak() const { return peak_.load(); }

 private:
  std::shared_ptr<Provider> inner_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};

TEST(Evaluate, RespectsConcurrencyBound) {
  auto slow = std::make_shared<SlowProvider>(ScriptedProvider::shared_from_file(test::fixtures_dir() / "user_data.script.json"));
  Gateway g(slow, GatewayOptions{3});
  Pipeline p(g, kit(), {});
  p.evaluate(read_fixture("user_data_requirements.txt"), read_fixture("diagrams/user_data.puml"));
  EXPECT_LE(slow->peak(), 3);
  EXPECT_GE(slow->peak(), 2);
}

TEST(Evaluate, EveryDiagramAtomHasOneP2RecordPerSample) {
  const auto records = read_transcript(test::fixtures_dir() / "user_data.jsonl");
  const auto atoms = extract_diagram_atoms(parse_diagram(read_fixture("diagrams/user_data.puml")).diagram);
  for (const auto& a : atoms) {
    std::map<int, int> per_tag;
    for (const auto& r : records) {
      if (r.request.prompt_id == "P2_diagram_atom" &&
          r.request.rendered_prompt.find("Atom id: " + a.atom_id + " ") != std::string::npos) {
        ++per_tag[r.request.sample_tag];
      }
    }
    EXPECT_EQ(per_tag, (std::map<int, int>{{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}})) << a.atom_id;
  }
}

TEST(SortIssues, BySourceThenLocationThenId) {
  std::vector<Issue> v;
  auto mk = [](std::string id, SourceCheck s, LocationType t, std::string ref) {
    Issue i;
    i.issue_id = std::move(id);
    i.source_check = s;
    i.location = {t, std::move(ref)};
    return i;
  };
  v.push_back(mk("R1.0", SourceCheck::requirement_atom, LocationType::requirement_atom_ref, "R1"));
  v.push_back(mk("D10.0", SourceCheck::diagram_atom, LocationType::diagram_atom_ref, "D10"));
  v.push_back(mk("D2.1", SourceCheck::diagram_atom, LocationType::diagram_atom_ref, "D2"));
  v.push_back(mk("H.10", SourceCheck::holistic, LocationType::free_text, "z"));
  v.push_back(mk("D2.0", SourceCheck::diagram_atom, LocationType::diagram_atom_ref, "D2"));
  v.push_back(mk("H.2", SourceCheck::holistic, LocationType::free_text, "a"));
  sort_issues(v);
  std::vector<std::string> ids;
  for (auto& i : v) ids.push_back(i.issue_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"H.2", "H.10", "D2.0", "D2.1", "D10.0", "R1.0"}));
}

}  // namespace
}  // namespace seqjudge
