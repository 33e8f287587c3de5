// dqa: dataset quality assurance for misinformation corpora.
//
// Subcommands: check, feasibility annotate|aggregate|gate, judge,
// stats predictability, report render.
// Exit codes: 0 success, 1 quality FAIL under --strict, 2 operational error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dqa/http_provider.hpp"
#include "dqa/ingest.hpp"
#include "dqa/judge.hpp"
#include "dqa/report.hpp"
#include "dqa/version.hpp"

namespace {

using namespace dqa;

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write output file: " + out_path);
  out << content;
}

Dataset load_any_dataset(const std::string& dataset_path, const std::string& mapping_path) {
  if (!mapping_path.empty()) {
    auto mapping = load_mapping(mapping_path);
    return load_dataset(dataset_path, mapping);
  }
  return read_dataset_jsonl(dataset_path);
}

TiebreakPolicy parse_policy(const std::string& s) {
  if (s == "lower") return TiebreakPolicy::Lower;
  if (s == "upper") return TiebreakPolicy::Upper;
  if (s == "average") return TiebreakPolicy::Average;
  throw Error("unknown policy \"" + s + "\" (expected lower|upper|average)");
}

SourceFilter parse_source(const std::string& s) {
  if (s == "auto") return SourceFilter::Auto;
  if (s == "human") return SourceFilter::Human;
  if (s == "ai") return SourceFilter::AI;
  if (s == "mixed") return SourceFilter::Mixed;
  throw Error("unknown source filter \"" + s + "\" (expected auto|human|ai|mixed)");
}

// Provider/gateway options shared by the LLM-backed subcommands.
struct LlmOptions {
  std::string endpoint;
  std::string credential_env = "DQA_API_KEY";
  std::string cache_path;
  std::string mock_script;
  bool offline = false;
  int max_in_flight = 4;
  int retry_cap = 3;

  void attach(CLI::App* cmd) {
    cmd->add_option("--endpoint", endpoint, "Chat-completions endpoint base URL");
    cmd->add_option("--credential-env", credential_env,
                    "Environment variable holding the API credential");
    cmd->add_option("--cache", cache_path, "Replay cache file (JSONL, append-only)");
    cmd->add_option("--mock-script", mock_script,
                    "JSON file with scripted replies (testing/offline demos)");
    cmd->add_flag("--offline", offline, "Serve from the cache only; misses become errors");
    cmd->add_option("--max-in-flight", max_in_flight, "Provider concurrency bound");
    cmd->add_option("--retries", retry_cap, "Transient-failure retry cap");
  }

  Gateway build_gateway() const {
    GatewayConfig cfg;
    cfg.max_in_flight = max_in_flight;
    cfg.retry_cap = retry_cap;
    cfg.cache_path = cache_path;
    cfg.offline = offline;

    std::shared_ptr<Provider> provider;
    if (!mock_script.empty()) {
      std::ifstream in(mock_script);
      if (!in) throw Error("cannot open mock script: " + mock_script);
      nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded()) throw Error("mock script is not valid JSON: " + mock_script);
      if (j.contains("reply")) {
        provider = std::make_shared<MockProvider>(j["reply"].get<std::string>());
      } else {
        std::vector<ProviderResult> seq;
        for (const auto& r : j.at("replies"))
          seq.push_back({ProviderStatus::Ok, r.get<std::string>()});
        provider = std::make_shared<MockProvider>(seq, j.value("wrap", false));
      }
    } else if (!endpoint.empty()) {
      HttpProviderConfig http;
      http.base_url = endpoint;
      http.credential_env = credential_env;
      provider = std::make_shared<HttpProvider>(http);
    }
    if (!provider && !offline)
      throw Error("no provider configured: pass --endpoint, --mock-script, or --offline with a cache");
    return Gateway(provider, cfg);
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// --- check ------------------------------------------------------------------

struct CheckArgs {
  std::string dataset_path, mapping_path, checks = "keywords,temporal";
  std::string annotations_path, policy = "average", source = "auto";
  std::string out_path, format = "json", stopwords_path, protocol = "cv";
  std::uint64_t seed = 0;
  int folds = 5, trees = 100, max_depth = 20, vocab_k = 40, baseline_reps = 100;
  double threshold = 0.10, holdout_fraction = 0.2;
  bool strict = false;
};

int run_check(const CheckArgs& args) {
  Dataset d = load_any_dataset(args.dataset_path, args.mapping_path);
  print_warnings(d.load_warnings);

  AssessConfig cfg;
  cfg.run_keywords = args.checks.find("keywords") != std::string::npos;
  cfg.run_temporal = args.checks.find("temporal") != std::string::npos;
  cfg.run_feasibility = args.checks.find("feasibility") != std::string::npos ||
                        !args.annotations_path.empty();
  cfg.leakage.folds = args.folds;
  cfg.leakage.vocab_k = args.vocab_k;
  cfg.leakage.baseline_repetitions = args.baseline_reps;
  cfg.leakage.flag_threshold = args.threshold;
  cfg.leakage.forest.n_trees = args.trees;
  cfg.leakage.forest.max_depth = args.max_depth;
  cfg.leakage.forest.seed = args.seed;
  cfg.leakage.protocol =
      args.protocol == "holdout" ? EvalProtocol::Holdout : EvalProtocol::CrossValidation;
  cfg.leakage.holdout_fraction = args.holdout_fraction;
  if (!args.stopwords_path.empty()) {
    cfg.leakage.stopwords = load_stopwords(args.stopwords_path);
    cfg.leakage.stopwords_id = args.stopwords_path;
  }
  cfg.policy = parse_policy(args.policy);
  cfg.source = parse_source(args.source);
  if (!args.annotations_path.empty()) cfg.annotations = read_annotations_csv(args.annotations_path);

  QualityReport rep = assess_dataset(d, cfg);
  write_output(args.out_path,
               render_report(rep, args.format == "text" ? ReportFormat::Text : ReportFormat::Json));

  bool any_fail = rep.verdicts.keywords.verdict == Verdict::Fail ||
                  rep.verdicts.temporal.verdict == Verdict::Fail ||
                  rep.verdicts.feasibility.verdict == Verdict::Fail;
  return (args.strict && any_fail) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dqa: dataset quality assurance for misinformation corpora"};
  app.set_version_flag("--version", std::string("dqa ") + dqa::kToolkitVersion);
  app.require_subcommand(1);

  // check
  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "Run quality checks over one dataset");
  check->add_option("--dataset", check_args.dataset_path, "Dataset file")->required();
  check->add_option("--mapping", check_args.mapping_path,
                    "Mapping config JSON (omit for unified-schema JSONL)");
  check->add_option("--checks", check_args.checks, "Comma list: keywords,temporal,feasibility");
  check->add_option("--annotations", check_args.annotations_path, "Feasibility annotations CSV");
  check->add_option("--policy", check_args.policy, "Tie-break policy: lower|upper|average");
  check->add_option("--source", check_args.source, "Annotator sources: auto|human|ai|mixed");
  check->add_option("--seed", check_args.seed, "Random seed");
  check->add_option("--folds", check_args.folds, "Cross-validation folds");
  check->add_option("--trees", check_args.trees, "Forest size");
  check->add_option("--max-depth", check_args.max_depth, "Tree depth cap");
  check->add_option("--k", check_args.vocab_k, "Vocabulary size");
  check->add_option("--baseline-reps", check_args.baseline_reps, "Baseline repetitions");
  check->add_option("--threshold", check_args.threshold, "Flag threshold (margin, F1 units)");
  check->add_option("--protocol", check_args.protocol, "Evaluation protocol: cv|holdout");
  check->add_option("--holdout-fraction", check_args.holdout_fraction, "Holdout test fraction");
  check->add_option("--stopwords", check_args.stopwords_path, "Stop-word list file");
  check->add_option("--out", check_args.out_path, "Output path (default stdout)");
  check->add_option("--format", check_args.format, "Output format: json|text");
  check->add_flag("--strict", check_args.strict, "Exit 1 when any check fails");

  // feasibility annotate|aggregate|gate
  auto* feas = app.add_subcommand("feasibility", "Claim-feasibility workflows");
  feas->require_subcommand(1);

  std::string fa_dataset, fa_mapping, fa_out, fa_model = "gpt-4o-mini";
  int fa_sample = 300;
  std::uint64_t fa_seed = 0;
  double fa_temperature = 0.0;
  LlmOptions fa_llm;
  auto* annotate = feas->add_subcommand("annotate", "Rate claims with the AI annotator");
  annotate->add_option("--dataset", fa_dataset, "Dataset file")->required();
  annotate->add_option("--mapping", fa_mapping, "Mapping config JSON");
  annotate->add_option("--out", fa_out, "Annotations CSV output")->required();
  annotate->add_option("--model", fa_model, "Model id");
  annotate->add_option("--sample", fa_sample, "Sample size per dataset");
  annotate->add_option("--seed", fa_seed, "Sampling seed");
  annotate->add_option("--temperature", fa_temperature, "Sampling temperature");
  fa_llm.attach(annotate);

  std::string agg_annotations, agg_dataset_id = "dataset", agg_policy = "average",
              agg_source = "auto", agg_out;
  bool agg_strict = false;
  auto* aggregate = feas->add_subcommand("aggregate", "Aggregate annotations into a report");
  aggregate->add_option("--annotations", agg_annotations, "Annotations CSV")->required();
  aggregate->add_option("--dataset-id", agg_dataset_id, "Dataset id for the report");
  aggregate->add_option("--policy", agg_policy, "Tie-break policy: lower|upper|average");
  aggregate->add_option("--source", agg_source, "Annotator sources: auto|human|ai|mixed");
  aggregate->add_option("--out", agg_out, "Output path (default stdout)");
  aggregate->add_flag("--strict", agg_strict, "Exit 1 when the gate fails");

  double gate_rate = -1.0;
  std::string gate_report;
  bool gate_strict = false;
  auto* gate = feas->add_subcommand("gate", "Apply the 75% feasibility gate");
  auto* rate_opt = gate->add_option("--rate", gate_rate, "Feasibility rate in [0,1]");
  auto* report_opt = gate->add_option("--report", gate_report, "FeasibilityReport JSON file");
  rate_opt->excludes(report_opt);
  gate->add_flag("--strict", gate_strict, "Exit 1 when the gate fails");

  // judge
  std::string j_batch, j_out, j_mode = "score", j_model = "gpt-4-turbo";
  int j_runs = 5, j_not_wrong_max = 3, j_wrong_min = 4;
  double j_temperature = 0.0;
  LlmOptions j_llm;
  auto* judge_cmd = app.add_subcommand("judge", "Contradiction-based rationale evaluation");
  judge_cmd->add_option("--batch", j_batch, "Input JSONL {record_id, statement, article, prediction}")
      ->required();
  judge_cmd->add_option("--out", j_out, "Output JSONL (default stdout)");
  judge_cmd->add_option("--mode", j_mode, "score|binary|trinary");
  judge_cmd->add_option("--runs", j_runs, "Runs per example");
  judge_cmd->add_option("--temperature", j_temperature, "Sampling temperature");
  judge_cmd->add_option("--model", j_model, "Model id");
  judge_cmd->add_option("--not-wrong-max", j_not_wrong_max, "Score ceiling for not-wrong");
  judge_cmd->add_option("--wrong-min", j_wrong_min, "Score floor for wrong");
  j_llm.attach(judge_cmd);

  // stats predictability
  std::string stats_in, stats_out;
  auto* stats = app.add_subcommand("stats", "Cross-check statistics");
  stats->require_subcommand(1);
  auto* predict = stats->add_subcommand(
      "predictability", "Feasibility vs. prediction correctness across datasets");
  predict->add_option("--in", stats_in,
                      "JSONL {dataset_id, feasible, prediction_correct}")->required();
  predict->add_option("--out", stats_out, "Output path (default stdout)");

  // report render
  std::string rr_in, rr_format = "text", rr_out;
  auto* report_cmd = app.add_subcommand("report", "Report utilities");
  report_cmd->require_subcommand(1);
  auto* render = report_cmd->add_subcommand("render", "Render a QualityReport JSON");
  render->add_option("--in", rr_in, "QualityReport JSON file")->required();
  render->add_option("--format", rr_format, "text|json");
  render->add_option("--out", rr_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return run_check(check_args);

    if (annotate->parsed()) {
      Dataset d = load_any_dataset(fa_dataset, fa_mapping);
      print_warnings(d.load_warnings);
      Gateway gw = fa_llm.build_gateway();
      AnnotateConfig cfg;
      cfg.sample_size = fa_sample;
      cfg.seed = fa_seed;
      cfg.model_id = fa_model;
      cfg.temperature = fa_temperature;
      auto result = annotate_dataset(d, gw, cfg);
      print_warnings(result.warnings);
      print_warnings(gw.cache_warnings());
      write_annotations_csv(fa_out, result.annotations);
      std::cerr << "annotated " << result.annotations.size() << " record(s) -> " << fa_out << "\n";
      return 0;
    }

    if (aggregate->parsed()) {
      auto sets = read_annotations_csv(agg_annotations);
      auto rep = build_feasibility_report(agg_dataset_id, sets, parse_policy(agg_policy),
                                          parse_source(agg_source));
      write_output(agg_out, feasibility_report_to_json(rep).dump(2) + "\n");
      return (agg_strict && !rep.gate_passed) ? 1 : 0;
    }

    if (gate->parsed()) {
      double rate = gate_rate;
      if (!gate_report.empty()) {
        std::ifstream in(gate_report);
        if (!in) throw Error("cannot open report file: " + gate_report);
        rate = feasibility_report_from_json(nlohmann::json::parse(in)).rate_average;
      }
      if (rate < 0.0 || rate > 1.0)
        throw Error("pass --rate in [0,1] or --report with a feasibility report");
      bool passed = feasibility_gate(rate);
      std::cout << (passed ? "PASS" : "FAIL") << " (rate " << rate << ", threshold "
                << kFeasibilityGateThreshold << ")\n";
      return (gate_strict && !passed) ? 1 : 0;
    }

    if (judge_cmd->parsed()) {
      auto mode = judge_mode_from_string(j_mode);
      if (!mode) throw Error("unknown judge mode \"" + j_mode + "\"");
      JudgeConfig cfg;
      cfg.mode = *mode;
      cfg.runs = j_runs;
      cfg.temperature = j_temperature;
      cfg.not_wrong_max = j_not_wrong_max;
      cfg.wrong_min = j_wrong_min;
      cfg.model_id = j_model;
      cfg.validate();
      auto items = read_judge_batch(j_batch);
      Gateway gw = j_llm.build_gateway();
      auto output = run_judge_batch(items, gw, cfg);
      print_warnings(gw.cache_warnings());
      write_output(j_out, output);
      return 0;
    }

    if (predict->parsed()) {
      std::ifstream in(stats_in, std::ios::binary);
      if (!in) throw Error("cannot open input file: " + stats_in);
      std::vector<ExampleOutcome> examples;
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw MalformedRowError(lineno, "invalid JSON");
        examples.push_back({j.at("dataset_id").get<std::string>(),
                            j.at("feasible").get<bool>(),
                            j.at("prediction_correct").get<bool>()});
      }
      auto s = predictability_stats(examples);
      write_output(stats_out, predictability_stats_to_json(s).dump(2) + "\n");
      return 0;
    }

    if (render->parsed()) {
      std::ifstream in(rr_in, std::ios::binary);
      if (!in) throw Error("cannot open report file: " + rr_in);
      auto rep = report_from_json(nlohmann::json::parse(in));
      write_output(rr_out, render_report(rep, rr_format == "json" ? ReportFormat::Json
                                                                  : ReportFormat::Text));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
