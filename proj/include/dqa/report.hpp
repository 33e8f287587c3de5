#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/error.hpp"
#include "dqa/feasibility.hpp"
#include "dqa/leakage.hpp"
#include "dqa/records.hpp"
#include "dqa/sha256.hpp"
#include "dqa/version.hpp"

namespace dqa {

enum class Verdict { Pass, Fail, NotApplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

inline const char* to_string(CheckSkip::Reason r) {
  switch (r) {
    case CheckSkip::Reason::NoText: return "no_text";
    case CheckSkip::Reason::NoTemporalInfo: return "no_temporal_info";
    case CheckSkip::Reason::SingleClass: return "single_class";
    case CheckSkip::Reason::NoAnnotations: return "no_annotations";
  }
  return "no_text";
}

inline std::optional<CheckSkip::Reason> skip_reason_from_string(std::string_view s) {
  if (s == "no_text") return CheckSkip::Reason::NoText;
  if (s == "no_temporal_info") return CheckSkip::Reason::NoTemporalInfo;
  if (s == "single_class") return CheckSkip::Reason::SingleClass;
  if (s == "no_annotations") return CheckSkip::Reason::NoAnnotations;
  return std::nullopt;
}

struct CheckOutcome {
  Verdict verdict = Verdict::NotApplicable;
  std::optional<CheckSkip::Reason> reason_code;  // set exactly when NotApplicable
  std::string reason;
};

// Table-1 style per-dataset report: one verdict per criterion plus the raw
// check results behind them.
struct QualityReport {
  std::string dataset_id;
  std::int64_t n_records = 0;
  std::map<Label, double> label_distribution;

  std::optional<CheckResult> keyword_tf;
  std::optional<CheckResult> keyword_tfm;
  std::optional<CheckResult> temporal;
  std::optional<FeasibilityReport> feasibility;

  struct {
    CheckOutcome keywords;
    CheckOutcome temporal;
    CheckOutcome feasibility;
  } verdicts;

  std::string toolkit_version = kToolkitVersion;
  std::uint64_t seed = 0;
  std::string config_digest;
  nlohmann::json config_echo;  // the digested configuration, embedded verbatim
};

struct AssessConfig {
  bool run_keywords = true;
  bool run_temporal = true;
  bool run_feasibility = true;
  LeakageConfig leakage;
  std::vector<AnnotationSet> annotations;  // empty -> feasibility NotApplicable
  TiebreakPolicy policy = TiebreakPolicy::Average;
  SourceFilter source = SourceFilter::Auto;
};

// Full effective assessment configuration. Embedded in every report so
// flag-threshold and forest-default choices travel with the numbers; also
// the input of the config digest.
inline nlohmann::json assess_config_to_json(const AssessConfig& cfg) {
  nlohmann::json features_per_split;
  if (cfg.leakage.forest.features_per_split)
    features_per_split = *cfg.leakage.forest.features_per_split;
  else
    features_per_split = "sqrt";
  return {{"run_keywords", cfg.run_keywords},
          {"run_temporal", cfg.run_temporal},
          {"run_feasibility", cfg.run_feasibility},
          {"vocab_k", cfg.leakage.vocab_k},
          {"folds", cfg.leakage.folds},
          {"baseline_repetitions", cfg.leakage.baseline_repetitions},
          {"flag_threshold", cfg.leakage.flag_threshold},
          {"protocol", cfg.leakage.protocol == EvalProtocol::CrossValidation ? "cv" : "holdout"},
          {"holdout_fraction", cfg.leakage.holdout_fraction},
          {"n_trees", cfg.leakage.forest.n_trees},
          {"max_depth", cfg.leakage.forest.max_depth},
          {"min_samples_split", cfg.leakage.forest.min_samples_split},
          {"features_per_split", features_per_split},
          {"criterion", "gini"},
          {"bootstrap", cfg.leakage.forest.bootstrap},
          {"frequency_mode",
           cfg.leakage.frequency_mode == FrequencyMode::TotalOccurrences ? "total" : "document"},
          {"feature_kind", cfg.leakage.feature_kind == FeatureKind::Counts ? "counts" : "presence"},
          {"stopword_list", cfg.leakage.stopwords_id},
          {"policy", to_string(cfg.policy)},
          {"source", to_string(cfg.source)},
          {"feasibility_derivation", "two_prompt_reconstruction"},
          {"toolkit_version", kToolkitVersion}};
}

inline std::string config_digest(const AssessConfig& cfg) {
  return Sha256::hash_hex(assess_config_to_json(cfg).dump());
}

// Runs every applicable check; check preconditions that fail downgrade that
// verdict to NotApplicable with a machine-readable reason.
inline QualityReport assess_dataset(const Dataset& d, const AssessConfig& cfg) {
  if (d.records.empty()) throw Error("assess_dataset: empty dataset");

  QualityReport rep;
  rep.dataset_id = d.dataset_id;
  rep.n_records = std::int64_t(d.records.size());
  rep.label_distribution = label_distribution(d);
  rep.seed = cfg.leakage.forest.seed;
  rep.config_echo = assess_config_to_json(cfg);
  rep.config_digest = Sha256::hash_hex(rep.config_echo.dump());

  if (cfg.run_keywords) {
    std::optional<CheckSkip::Reason> skip_code;
    std::string skip_reason;
    try {
      rep.keyword_tf = keyword_check(d, LabelSet::TF, cfg.leakage);
    } catch (const CheckSkip& e) {
      skip_code = e.reason;
      skip_reason = e.what();
    }
    bool mixed_present = false;
    for (const auto& r : d.records)
      if (r.label == Label::Mixed) mixed_present = true;
    if (mixed_present) {
      try {
        rep.keyword_tfm = keyword_check(d, LabelSet::TFM, cfg.leakage);
      } catch (const CheckSkip& e) {
        if (!rep.keyword_tf && !skip_code) {
          skip_code = e.reason;
          skip_reason = e.what();
        }
      }
    }
    if (rep.keyword_tf || rep.keyword_tfm) {
      bool any_flagged = (rep.keyword_tf && rep.keyword_tf->flagged) ||
                         (rep.keyword_tfm && rep.keyword_tfm->flagged);
      rep.verdicts.keywords.verdict = any_flagged ? Verdict::Fail : Verdict::Pass;
    } else {
      rep.verdicts.keywords.verdict = Verdict::NotApplicable;
      rep.verdicts.keywords.reason_code = skip_code;
      rep.verdicts.keywords.reason = skip_reason;
    }
  } else {
    rep.verdicts.keywords.reason = "check disabled";
  }

  if (cfg.run_temporal) {
    try {
      rep.temporal = temporal_check(d, cfg.leakage);
      rep.verdicts.temporal.verdict = rep.temporal->flagged ? Verdict::Fail : Verdict::Pass;
    } catch (const CheckSkip& e) {
      rep.verdicts.temporal.verdict = Verdict::NotApplicable;
      rep.verdicts.temporal.reason_code = e.reason;
      rep.verdicts.temporal.reason = e.what();
    }
  } else {
    rep.verdicts.temporal.reason = "check disabled";
  }

  if (cfg.run_feasibility) {
    if (cfg.annotations.empty()) {
      rep.verdicts.feasibility.verdict = Verdict::NotApplicable;
      rep.verdicts.feasibility.reason_code = CheckSkip::Reason::NoAnnotations;
      rep.verdicts.feasibility.reason = "no annotation file supplied";
    } else {
      try {
        rep.feasibility =
            build_feasibility_report(d.dataset_id, cfg.annotations, cfg.policy, cfg.source);
        rep.verdicts.feasibility.verdict =
            rep.feasibility->gate_passed ? Verdict::Pass : Verdict::Fail;
      } catch (const CheckSkip& e) {
        rep.verdicts.feasibility.verdict = Verdict::NotApplicable;
        rep.verdicts.feasibility.reason_code = e.reason;
        rep.verdicts.feasibility.reason = e.what();
      }
    }
  } else {
    rep.verdicts.feasibility.reason = "check disabled";
  }

  return rep;
}

// --- serialization -----------------------------------------------------------

namespace detail {

inline nlohmann::json outcome_to_json(const CheckOutcome& o) {
  nlohmann::json j{{"verdict", to_string(o.verdict)}};
  if (o.reason_code) j["reason_code"] = to_string(*o.reason_code);
  if (!o.reason.empty()) j["reason"] = o.reason;
  return j;
}

inline CheckOutcome outcome_from_json(const nlohmann::json& j) {
  CheckOutcome o;
  std::string v = j.at("verdict").get<std::string>();
  o.verdict = v == "pass" ? Verdict::Pass : v == "fail" ? Verdict::Fail : Verdict::NotApplicable;
  if (j.contains("reason_code"))
    o.reason_code = skip_reason_from_string(j["reason_code"].get<std::string>());
  if (j.contains("reason")) o.reason = j["reason"].get<std::string>();
  return o;
}

}  // namespace detail

inline nlohmann::json report_to_json(const QualityReport& r) {
  nlohmann::json dist;
  for (const auto& [label, fraction] : r.label_distribution) dist[to_string(label)] = fraction;

  nlohmann::json keyword;
  if (r.keyword_tf) keyword["tf"] = check_result_to_json(*r.keyword_tf);
  if (r.keyword_tfm) keyword["tfm"] = check_result_to_json(*r.keyword_tfm);

  nlohmann::json j{{"dataset_id", r.dataset_id},
                   {"n_records", r.n_records},
                   {"label_distribution", dist},
                   {"verdicts",
                    {{"keywords", detail::outcome_to_json(r.verdicts.keywords)},
                     {"temporal", detail::outcome_to_json(r.verdicts.temporal)},
                     {"feasibility", detail::outcome_to_json(r.verdicts.feasibility)}}},
                   {"toolkit_version", r.toolkit_version},
                   {"seed", r.seed},
                   {"config_digest", r.config_digest},
                   {"config", r.config_echo}};
  if (!keyword.is_null()) j["keyword"] = keyword;
  if (r.temporal) j["temporal"] = check_result_to_json(*r.temporal);
  if (r.feasibility) j["feasibility"] = feasibility_report_to_json(*r.feasibility);
  return j;
}

inline QualityReport report_from_json(const nlohmann::json& j) {
  QualityReport r;
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.n_records = j.at("n_records").get<std::int64_t>();
  for (const auto& [key, value] : j.at("label_distribution").items())
    r.label_distribution[parse_label_or_throw(key)] = value.get<double>();
  if (j.contains("keyword")) {
    if (j["keyword"].contains("tf")) r.keyword_tf = check_result_from_json(j["keyword"]["tf"]);
    if (j["keyword"].contains("tfm")) r.keyword_tfm = check_result_from_json(j["keyword"]["tfm"]);
  }
  if (j.contains("temporal")) r.temporal = check_result_from_json(j["temporal"]);
  if (j.contains("feasibility")) r.feasibility = feasibility_report_from_json(j["feasibility"]);
  r.verdicts.keywords = detail::outcome_from_json(j.at("verdicts").at("keywords"));
  r.verdicts.temporal = detail::outcome_from_json(j.at("verdicts").at("temporal"));
  r.verdicts.feasibility = detail::outcome_from_json(j.at("verdicts").at("feasibility"));
  r.toolkit_version = j.at("toolkit_version").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_digest = j.at("config_digest").get<std::string>();
  if (j.contains("config")) r.config_echo = j["config"];
  return r;
}

enum class ReportFormat { Json, Text };

namespace detail {

inline std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

inline std::string check_line(const char* name, const CheckOutcome& outcome,
                              const std::vector<std::pair<std::string, const CheckResult*>>& results) {
  std::ostringstream out;
  out << name << ": ";
  switch (outcome.verdict) {
    case Verdict::NotApplicable:
      out << "N/A";
      if (!outcome.reason.empty()) out << " (" << outcome.reason << ")";
      return out.str();
    case Verdict::Pass: out << "PASS"; break;
    case Verdict::Fail: out << "FAIL"; break;
  }
  bool first = true;
  out << " (";
  for (const auto& [tag, cr] : results) {
    if (!cr) continue;
    if (!first) out << "; ";
    first = false;
    if (!tag.empty()) out << tag << " ";
    out << "margin " << pct(cr->margin) << " pts, predictivity " << pct(cr->predictivity)
        << ", baseline " << pct(cr->baseline);
    if (cr->temporal_encoding)
      out << ", " << (*cr->temporal_encoding == TemporalEncoding::TweetIdPrefix ? "tweet-id"
                                                                                : "day-offset");
  }
  out << ")";
  return out.str();
}

}  // namespace detail

inline std::string render_report(const QualityReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(r).dump(2) + "\n";

  std::ostringstream out;
  out << "dataset: " << r.dataset_id << " (n=" << r.n_records << ")\n";
  out << "labels: ";
  bool first = true;
  for (const auto& [label, fraction] : r.label_distribution) {
    if (!first) out << " | ";
    first = false;
    out << to_string(label) << " " << detail::pct(fraction) << "%";
  }
  out << "\n";
  out << detail::check_line("keywords", r.verdicts.keywords,
                            {{"T-F", r.keyword_tf ? &*r.keyword_tf : nullptr},
                             {"T-F-M", r.keyword_tfm ? &*r.keyword_tfm : nullptr}})
      << "\n";
  out << detail::check_line("temporal", r.verdicts.temporal,
                            {{"", r.temporal ? &*r.temporal : nullptr}})
      << "\n";
  out << "feasibility: ";
  switch (r.verdicts.feasibility.verdict) {
    case Verdict::NotApplicable:
      out << "N/A";
      if (!r.verdicts.feasibility.reason.empty())
        out << " (" << r.verdicts.feasibility.reason << ")";
      break;
    case Verdict::Pass:
    case Verdict::Fail: {
      out << (r.verdicts.feasibility.verdict == Verdict::Pass ? "PASS" : "FAIL");
      const auto& f = *r.feasibility;
      out << " (rate " << detail::pct(f.rate_average) << "% avg, " << detail::pct(f.rate_lower)
          << "% lower, " << detail::pct(f.rate_upper) << "% upper; policy " << to_string(f.policy)
          << ", n=" << f.n_annotated << ")";
      break;
    }
  }
  out << "\n";
  out << "seed: " << r.seed << "  config: " << r.config_digest.substr(0, 12)
      << "  version: " << r.toolkit_version << "\n";
  return out.str();
}

}  // namespace dqa
