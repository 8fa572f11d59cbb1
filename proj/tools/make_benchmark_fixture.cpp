// Writes a synthetic full-scale report and label file whose per-check counts
// match the published results table, for exercising the scoring harness.
//
//   make_benchmark_fixture <out-dir>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "seqjudge/evalharness.hpp"
#include "seqjudge/report.hpp"

using namespace seqjudge;

namespace {

// One block of issues that share a source check and stage status.
struct Block {
  int tp_matched;   // true positives matched to ground truth
  int tp_new;       // true positives without a match
  int fp;
  int gt_first;     // matched issues cycle over gt ids [gt_first, gt_last]
  int gt_last;
  bool discarded;
};

struct Builder {
  EvaluationReport report;
  LabelSet labels;

  void add(SourceCheck source, const Block& b, int& next_issue, int per_atom) {
    const int total = b.tp_matched + b.tp_new + b.fp;
    for (int k = 0; k < total; ++k, ++next_issue) {
      Issue i;
      i.source_check = source;
      i.votes = 3;
      i.stage_status = source == SourceCheck::requirement_atom
                           ? StageStatus::atomic_kept
                           : (b.discarded ? StageStatus::cross_check_discarded : StageStatus::cross_checked_kept);
      if (source == SourceCheck::holistic) {
        i.issue_id = "H." + std::to_string(next_issue);
        i.location = {LocationType::free_text, ""};
      } else {
        const char* p = source == SourceCheck::diagram_atom ? "D" : "R";
        const std::string atom = p + std::to_string(next_issue / per_atom);
        i.issue_id = atom + "." + std::to_string(next_issue % per_atom);
        i.location = {source == SourceCheck::diagram_atom ? LocationType::diagram_atom_ref
                                                          : LocationType::requirement_atom_ref,
                      atom};
      }
      if (b.discarded) i.conflicting_atom = "R0";
      i.description = "synthetic " + to_string(source) + " issue " + std::to_string(next_issue);
      if (k < b.tp_matched) {
        labels.judgments[i.issue_id] = Judgment::true_positive;
        const int span = b.gt_last - b.gt_first + 1;
        labels.matches.emplace_back(i.issue_id, "g" + std::to_string(b.gt_first + k % span));
      } else if (k < b.tp_matched + b.tp_new) {
        labels.judgments[i.issue_id] = Judgment::true_positive;
      } else {
        labels.judgments[i.issue_id] = Judgment::false_positive;
      }
      report.issues.push_back(std::move(i));
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_benchmark_fixture <out-dir>\n";
    return 1;
  }
  const std::filesystem::path out = argv[1];
  std::filesystem::create_directories(out);

  constexpr int kGroundTruth = 135;
  constexpr int kDiagramAtoms = 101, kIssuesPerDiagramAtom = 5;
  constexpr int kRequirementAtoms = 200, kIssuesPerRequirementAtom = 5;

  Builder b;
  auto& r = b.report;
  r.tool_version = SEQJUDGE_VERSION;
  r.provider = "replay";
  r.max_concurrency = 4;
  r.requirements_sha256 = std::string(64, '0');
  r.diagram_sha256 = std::string(64, '0');
  for (int k = 0; k < kDiagramAtoms; ++k) {
    DiagramAtom a;
    a.atom_id = "D" + std::to_string(k);
    a.message_id = "m" + std::to_string(k);
    a.sender = "A";
    a.receiver = "B";
    a.label = "message " + std::to_string(k);
    a.ordinal = static_cast<std::size_t>(k);
    r.diagram_atoms.push_back(a);
  }
  for (int k = 0; k < kRequirementAtoms; ++k) {
    r.requirement_atoms.push_back({"R" + std::to_string(k), "Requirement " + std::to_string(k), std::nullopt});
  }
  for (int g = 0; g < kGroundTruth; ++g) {
    b.labels.ground_truth.push_back({"g" + std::to_string(g), "benchmark issue " + std::to_string(g)});
  }

  int next = 0;
  b.add(SourceCheck::holistic, {30, 13, 26, 0, 26, false}, next, 1);
  b.add(SourceCheck::holistic, {21, 14, 30, 27, 45, true}, next, 1);
  next = 0;
  b.add(SourceCheck::diagram_atom, {75, 56, 70, 56, 87, false}, next, kIssuesPerDiagramAtom);
  // Discarded diagram-atom issues hit gt 49..55 and 88..91: two blocks.
  b.add(SourceCheck::diagram_atom, {21, 41, 91, 49, 55, true}, next, kIssuesPerDiagramAtom);
  b.add(SourceCheck::diagram_atom, {20, 41, 90, 88, 91, true}, next, kIssuesPerDiagramAtom);
  next = 0;
  b.add(SourceCheck::requirement_atom, {442, 322, 121, 0, 79, false}, next, kIssuesPerRequirementAtom);

  std::set<std::string> flagged;
  for (const auto& i : r.issues) {
    if (i.source_check == SourceCheck::requirement_atom) flagged.insert(i.location.value);
  }
  for (const auto& a : r.requirement_atoms) {
    if (!flagged.contains(a.atom_id)) r.correct_requirement_atom_ids.push_back(a.atom_id);
  }
  sort_issues(r.issues);
  b.labels.validate();

  std::ofstream(out / "report.json", std::ios::binary) << to_json(r);
  std::ofstream(out / "labels.json", std::ios::binary) << to_json_value(b.labels).dump(2) << "\n";
  for (auto stage : {Stage::holistic_baseline, Stage::mcet_a, Stage::mcet_x}) {
    std::cout << to_string(stage) << ": " << to_json_value(score_report(r, b.labels, stage)).dump() << "\n";
  }
  return 0;
}
