#include "seqjudge/evalharness.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace seqjudge {

using nlohmann::json;

std::string to_string(Stage s) {
  switch (s) {
    case Stage::mcet_a: return "mcet_a";
    case Stage::mcet_x: return "mcet_x";
    case Stage::holistic_baseline: return "holistic_baseline";
  }
  return "mcet_a";
}

Stage stage_from(const std::string& s) {
  if (s == "mcet_a") return Stage::mcet_a;
  if (s == "mcet_x") return Stage::mcet_x;
  if (s == "holistic_baseline") return Stage::holistic_baseline;
  throw std::invalid_argument("unknown stage '" + s + "' (mcet_a, mcet_x or holistic_baseline)");
}

void LabelSet::validate() const {
  std::set<std::string> gt;
  for (const auto& g : ground_truth) {
    if (!gt.insert(g.gt_id).second) throw std::invalid_argument("duplicate ground-truth id '" + g.gt_id + "'");
  }
  for (const auto& [issue, gt_id] : matches) {
    if (!gt.contains(gt_id)) throw std::invalid_argument("match names unknown ground-truth id '" + gt_id + "'");
    auto it = judgments.find(issue);
    if (it == judgments.end() || it->second != Judgment::true_positive) {
      throw std::invalid_argument("matched issue '" + issue + "' is not judged true_positive");
    }
  }
}

LabelSet labels_from_json(const json& j) {
  LabelSet l;
  try {
    for (const auto& [id, v] : j.at("judgments").items()) {
      const auto s = v.get<std::string>();
      if (s == "true_positive") {
        l.judgments[id] = Judgment::true_positive;
      } else if (s == "false_positive") {
        l.judgments[id] = Judgment::false_positive;
      } else {
        throw std::invalid_argument("judgment for '" + id + "' must be true_positive or false_positive");
      }
    }
    for (const auto& g : j.value("ground_truth", json::array())) {
      l.ground_truth.push_back({g.at("gt_id").get<std::string>(), g.value("description", "")});
    }
    for (const auto& m : j.value("matches", json::array())) {
      if (m.is_array()) {
        l.matches.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
      } else {
        l.matches.emplace_back(m.at("issue_id").get<std::string>(), m.at("gt_id").get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed label file: ") + e.what());
  }
  l.validate();
  return l;
}

LabelSet load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file " + path.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument(path.string() + ": not valid JSON");
  return labels_from_json(j);
}

json to_json_value(const LabelSet& l) {
  json judgments = json::object();
  for (const auto& [id, v] : l.judgments) {
    judgments[id] = v == Judgment::true_positive ? "true_positive" : "false_positive";
  }
  json gt = json::array(), matches = json::array();
  for (const auto& g : l.ground_truth) gt.push_back({{"gt_id", g.gt_id}, {"description", g.description}});
  for (const auto& [i, g] : l.matches) matches.push_back({{"issue_id", i}, {"gt_id", g}});
  return {{"judgments", judgments}, {"ground_truth", gt}, {"matches", matches}};
}

double MetricsSummary::precision_display() const { return std::round(precision * 100.0) / 100.0; }
double MetricsSummary::bench_recall_display() const { return std::round(bench_recall_pct * 10.0) / 10.0; }

json to_json_value(const MetricsSummary& m) {
  return {{"total", m.total},
          {"true_positives", m.true_positives},
          {"false_positives", m.false_positives},
          {"precision", m.precision},
          {"precision_display", m.precision_display()},
          {"bench_recall_count", m.bench_recall_count},
          {"bench_recall_pct", m.bench_recall_pct},
          {"bench_recall_pct_display", m.bench_recall_display()},
          {"new_true_issues", m.new_true_issues}};
}

std::vector<Issue> stage_view(const EvaluationReport& report, Stage stage, std::optional<SourceCheck> source) {
  std::vector<Issue> view = stage == Stage::mcet_x ? report.mcet_x_issues() : report.mcet_a_issues();
  if (stage == Stage::holistic_baseline) source = SourceCheck::holistic;
  if (source) std::erase_if(view, [&](const Issue& i) { return i.source_check != *source; });
  return view;
}

MetricsSummary score_report(const EvaluationReport& report, const LabelSet& labels, Stage stage,
                            std::optional<SourceCheck> source) {
  const auto view = stage_view(report, stage, source);
  std::multimap<std::string, std::string> matches_of(labels.matches.begin(), labels.matches.end());

  MetricsSummary m;
  std::set<std::string> recalled;
  for (const auto& issue : view) {
    auto it = labels.judgments.find(issue.issue_id);
    if (it == labels.judgments.end()) throw MissingJudgment(issue.issue_id);
    ++m.total;
    if (it->second == Judgment::false_positive) {
      ++m.false_positives;
      continue;
    }
    ++m.true_positives;
    auto [lo, hi] = matches_of.equal_range(issue.issue_id);
    if (lo == hi) ++m.new_true_issues;
    for (auto i = lo; i != hi; ++i) recalled.insert(i->second);
  }
  m.precision = m.total ? static_cast<double>(m.true_positives) / static_cast<double>(m.total) : 0.0;
  m.bench_recall_count = recalled.size();
  m.bench_recall_pct = labels.ground_truth.empty()
                           ? 0.0
                           : 100.0 * static_cast<double>(recalled.size()) /
                                 static_cast<double>(labels.ground_truth.size());
  return m;
}

}  // namespace seqjudge
