#include "seqjudge/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "seqjudge/ast_json.hpp"
#include "seqjudge/evalharness.hpp"
#include "seqjudge/parser.hpp"
#include "seqjudge/pipeline.hpp"
#include "seqjudge/prompts.hpp"
#include "seqjudge/report.hpp"

namespace seqjudge {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(std::string("cannot read ") + what + " file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

// Config flags shared by the subcommands that may talk to a model.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value config file");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
      app->add_option_function<std::string>(
          name, [this, key](const std::string& v) { values[key] = v; }, help);
    };
    flag("--model", "model", "model name");
    flag("--base-url", "base_url", "OpenAI-compatible endpoint");
    flag("--api-key-env", "api_key_env", "environment variable holding the API key");
    flag("--votes", "votes", "samples per check (N)");
    flag("--temperature", "temperature", "sampling temperature");
    flag("--top-p", "top_p", "nucleus sampling mass");
    flag("--context-window", "context_window_k", "neighbouring messages shown per diagram-atom");
    flag("--max-concurrency", "max_concurrency", "in-flight model calls");
    flag("--split-votes", "split_votes", "samples for the requirement split");
    flag("--merge-mode", "merge_mode", "llm or deterministic");
    flag("--prompts-dir", "prompts_dir", "directory with the prompt templates");
    flag("--record", "record", "append every model call to this JSONL transcript");
    flag("--replay", "replay", "answer model calls from this JSONL transcript");
    flag("--script", "script", "answer model calls from a scripted-mock rule file");
    flag("--max-tokens", "max_tokens", "completion token cap");
  }

  // defaults < config file < environment < flags
  RunConfig resolve(const EnvLookup& getenv) const {
    RunConfig cfg;
    std::string file = config_file;
    if (file.empty()) {
      if (const char* f = getenv("SEQJUDGE_CONFIG")) file = f;
    }
    if (!file.empty()) apply_config_file(cfg, file);
    apply_environment(cfg, getenv);
    for (const auto& [k, v] : values) apply_setting(cfg, k, v);
    cfg.validate();
    return cfg;
  }
};

struct Runtime {
  std::shared_ptr<Gateway> gateway;
  PromptKit kit;
};

Runtime make_runtime(const RunConfig& cfg, const CliHooks& hooks, const EnvLookup& getenv, std::ostream& err) {
  std::shared_ptr<Provider> provider;
  if (cfg.replay) {
    provider = std::make_shared<ReplayProvider>(*cfg.replay);
  } else if (cfg.script) {
    provider = ScriptedProvider::shared_from_file(*cfg.script);
  } else {
    std::string key;
    if (const char* k = getenv(cfg.api_key_env.c_str())) key = k;
    if (key.empty()) err << "warning: " << cfg.api_key_env << " is not set; sending requests without a key\n";
    if (hooks.live_provider) {
      provider = hooks.live_provider(cfg, key);
    } else {
      HttpProviderOptions o;
      o.base_url = cfg.base_url;
      o.api_key = key;
      o.timeout = std::chrono::seconds(cfg.timeout_s);
      o.max_retries = cfg.max_retries;
      provider = std::make_shared<HttpProvider>(std::move(o));
    }
  }
  std::shared_ptr<TranscriptWriter> recorder;
  if (cfg.record) recorder = std::make_shared<TranscriptWriter>(*cfg.record);
  Runtime rt{std::make_shared<Gateway>(provider, GatewayOptions{cfg.max_concurrency}, recorder),
             PromptKit::load(cfg.prompts_dir)};
  return rt;
}

std::string parse_error_text(const std::string& path, const ParseError& e) {
  return path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": error: " + e.detail();
}

void print_warnings(std::ostream& err, const std::string& path, const std::vector<Warning>& warnings) {
  for (const auto& w : warnings) {
    err << path << ":" << w.line << ": warning: " << w.message << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliHooks& hooks) {
  const EnvLookup getenv = hooks.getenv ? hooks.getenv : EnvLookup([](const char* n) { return std::getenv(n); });

  CLI::App app{"Checks a PlantUML sequence diagram against a requirements text with an LLM judge", "seqjudge"};
  app.set_version_flag("--version", std::string(SEQJUDGE_VERSION));
  app.require_subcommand(1);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run the full review and write a report");
  std::string ev_requirements, ev_diagram, ev_out, ev_markdown;
  bool fail_on_issues = false;
  evaluate->add_option("--requirements", ev_requirements, "requirements text file")->required();
  evaluate->add_option("--diagram", ev_diagram, "PlantUML sequence diagram")->required();
  evaluate->add_option("--out", ev_out, "report JSON path (stdout when omitted)");
  evaluate->add_option("--markdown", ev_markdown, "also write a Markdown digest here");
  evaluate->add_flag("--fail-on-issues", fail_on_issues, "exit 4 when issues survive the cross-check");
  ConfigFlags ev_flags;
  ev_flags.attach(evaluate);

  // parse
  auto* parse = app.add_subcommand("parse", "dump the diagram AST as JSON");
  std::string parse_file;
  parse->add_option("diagram", parse_file, "PlantUML file")->required();
  bool parse_canonical = false;
  parse->add_flag("--canonical", parse_canonical, "print canonical PlantUML instead of JSON");

  // atoms
  auto* atoms = app.add_subcommand("atoms", "list diagram-atoms, or split requirements into atoms");
  std::string at_diagram, at_requirements;
  bool at_json = false;
  atoms->add_option("--diagram", at_diagram, "PlantUML file (offline)");
  atoms->add_option("--requirements", at_requirements, "requirements file (needs a provider)");
  atoms->add_flag("--json", at_json, "JSON output");
  ConfigFlags at_flags;
  at_flags.attach(atoms);

  // score
  auto* score = app.add_subcommand("score", "score a report against human labels");
  std::string sc_report, sc_labels, sc_stage = "mcet_x", sc_source;
  score->add_option("--report", sc_report, "report JSON")->required();
  score->add_option("--labels", sc_labels, "label file JSON")->required();
  score->add_option("--stage", sc_stage, "mcet_a, mcet_x or holistic_baseline")->capture_default_str();
  score->add_option("--source", sc_source, "restrict to holistic, diagram_atom or requirement_atom");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SEQJUDGE_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  std::string current_input;
  try {
    if (*parse) {
      current_input = parse_file;
      const auto result = parse_diagram(read_text(parse_file, "diagram"));
      print_warnings(err, parse_file, result.warnings);
      out << (parse_canonical ? serialize_diagram(result.diagram) : diagram_to_json(result.diagram).dump(2) + "\n");
      return kExitOk;
    }

    if (*atoms) {
      if (at_diagram.empty() && at_requirements.empty()) {
        throw UsageError("atoms needs --diagram and/or --requirements");
      }
      json listing = json::object();
      if (!at_diagram.empty()) {
        current_input = at_diagram;
        const auto result = parse_diagram(read_text(at_diagram, "diagram"));
        print_warnings(err, at_diagram, result.warnings);
        json arr = json::array();
        for (const auto& a : extract_diagram_atoms(result.diagram)) {
          arr.push_back({{"atom_id", a.atom_id}, {"text", render_atom(a)}, {"kind", to_string(a.arrow.kind())}});
          if (!at_json) out << a.atom_id << "\t" << render_atom(a) << "\n";
        }
        listing["diagram"] = arr;
      }
      if (!at_requirements.empty()) {
        const auto text = read_text(at_requirements, "requirements");
        const RunConfig cfg = at_flags.resolve(getenv);
        auto rt = make_runtime(cfg, hooks, getenv, err);
        Pipeline pipeline(*rt.gateway, rt.kit, cfg.pipeline());
        auto split = pipeline.split_requirements(text);
        for (const auto& w : split.warnings) err << "warning: " << w << "\n";
        json arr = json::array();
        for (const auto& a : split.value) {
          arr.push_back({{"atom_id", a.atom_id}, {"text", a.text}});
          if (!at_json) out << a.atom_id << "\t" << a.text << "\n";
        }
        listing["requirement"] = arr;
      }
      if (at_json) out << listing.dump(2) << "\n";
      return kExitOk;
    }

    if (*score) {
      const auto report = report_from_json(read_text(sc_report, "report"));
      const auto labels = load_labels(sc_labels);
      std::optional<SourceCheck> source;
      if (!sc_source.empty()) source = source_check_from(sc_source);
      const auto m = score_report(report, labels, stage_from(sc_stage), source);
      out << to_json_value(m).dump(2) << "\n";
      return kExitOk;
    }

    // evaluate
    const RunConfig cfg = ev_flags.resolve(getenv);
    const auto requirements = read_text(ev_requirements, "requirements");
    const auto diagram = read_text(ev_diagram, "diagram");
    current_input = ev_diagram;
    auto rt = make_runtime(cfg, hooks, getenv, err);
    Pipeline pipeline(*rt.gateway, rt.kit, cfg.pipeline());
    const auto report = pipeline.evaluate(requirements, diagram);
    const auto bytes = to_json(report);
    if (ev_out.empty()) {
      out << bytes;
    } else {
      write_text(ev_out, bytes);
    }
    if (!ev_markdown.empty()) write_text(ev_markdown, to_markdown(report));
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    (ev_out.empty() ? err : out) << ev_diagram << ": " << summary_line(report) << " ("
                                 << report.accounting.total_tokens << " tokens, " << report.accounting.llm_calls
                                 << " model calls)\n";
    if (fail_on_issues && !report.mcet_x_issues().empty()) return kExitIssuesFound;
    return kExitOk;
  } catch (const ParseError& e) {
    err << parse_error_text(current_input, e) << "\n";
    return kExitParse;
  } catch (const TransportError& e) {
    err << "error: provider failure: " << e.what() << "\n";
    return kExitProvider;
  } catch (const ReplayMiss& e) {
    err << "error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const MissingJudgment& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace seqjudge
