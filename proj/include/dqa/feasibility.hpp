#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/csv.hpp"
#include "dqa/error.hpp"
#include "dqa/llm.hpp"
#include "dqa/metrics.hpp"
#include "dqa/parse.hpp"
#include "dqa/prompts.hpp"
#include "dqa/records.hpp"
#include "dqa/rng.hpp"

namespace dqa {

// Can this claim be veracity-checked at all: directly, only with retrieval,
// or not at all?
enum class Feasibility { Feasible, FeasibleWithSearch, NotFeasible };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible: return "feasible";
    case Feasibility::FeasibleWithSearch: return "feasible_with_search";
    case Feasibility::NotFeasible: return "not_feasible";
  }
  return "not_feasible";
}

inline std::optional<Feasibility> feasibility_from_string(std::string_view s) {
  if (s == "feasible") return Feasibility::Feasible;
  if (s == "feasible_with_search") return Feasibility::FeasibleWithSearch;
  if (s == "not_feasible") return Feasibility::NotFeasible;
  return std::nullopt;
}

enum class RatingSource { Human, AI };

struct AnnotatorRating {
  std::string annotator_id;
  Feasibility rating = Feasibility::NotFeasible;
  RatingSource source = RatingSource::Human;
};

struct AnnotationSet {
  std::string record_id;
  std::vector<AnnotatorRating> ratings;  // annotator_id unique per record
};

enum class TiebreakPolicy { Lower, Upper, Average };

inline const char* to_string(TiebreakPolicy p) {
  switch (p) {
    case TiebreakPolicy::Lower: return "lower";
    case TiebreakPolicy::Upper: return "upper";
    case TiebreakPolicy::Average: return "average";
  }
  return "average";
}

// --- prompts and parsing -----------------------------------------------------

inline std::string build_feasibility_prompt(std::string_view statement, bool search_enabled) {
  if (trim(statement).empty()) throw Error("build_feasibility_prompt: empty statement");
  std::string prompt(prompts::kFeasibilityTemplate);
  auto slot = prompt.find("{search_sentence}");
  prompt.replace(slot, std::string("{search_sentence}").size(),
                 search_enabled ? std::string(prompts::kSearchSentence) : std::string());
  auto stmt = prompt.find("{statement}");
  prompt.replace(stmt, std::string("{statement}").size(), std::string(statement));
  return prompt;
}

// "<explanation> | <0 or 1>"
inline ParsedValue parse_rating(std::string_view response) {
  return parse_after_bar(response, 0, 1);
}

// Reconstructs the three-way schema from the two binary prompt variants; the
// search-enabled verdict dominates.
inline Feasibility derive_three_way(int enabled_rating, int disabled_rating) {
  if (enabled_rating == 0) return Feasibility::NotFeasible;
  return disabled_rating == 1 ? Feasibility::Feasible : Feasibility::FeasibleWithSearch;
}

// Last "Factuality:" marker followed by 0 or 1.
inline ParsedValue parse_factuality(std::string_view response) {
  static constexpr std::string_view marker = "Factuality:";
  auto pos = response.rfind(marker);
  if (pos == std::string_view::npos) return {std::nullopt, ParseErrorKind::MissingMarker};
  std::string tail = trim(response.substr(pos + marker.size()));
  auto v = detail::leading_integer(tail);
  if (!v) return {std::nullopt, ParseErrorKind::NotAnInteger};
  if (*v != 0 && *v != 1) return {std::nullopt, ParseErrorKind::OutOfRange};
  return {int(*v), ParseErrorKind::None};
}

// --- aggregation ---------------------------------------------------------------

// Collapse one record's ratings to a feasibility value in [0, 1]. Ratings
// first fold to binary (feasible with or without search counts as feasible);
// ties between annotators resolve per policy.
inline double aggregate_annotations(const AnnotationSet& a, TiebreakPolicy policy) {
  if (a.ratings.empty()) throw Error("aggregate_annotations: no ratings for " + a.record_id);
  std::int64_t feasible = 0;
  for (const auto& r : a.ratings)
    if (r.rating != Feasibility::NotFeasible) ++feasible;
  const std::int64_t n = std::int64_t(a.ratings.size());
  if (2 * feasible > n) return 1.0;
  if (2 * feasible < n) return 0.0;
  switch (policy) {
    case TiebreakPolicy::Lower: return 0.0;
    case TiebreakPolicy::Upper: return 1.0;
    case TiebreakPolicy::Average: return 0.5;
  }
  return 0.5;
}

inline constexpr double kFeasibilityGateThreshold = 0.75;

inline bool feasibility_gate(double rate) { return rate >= kFeasibilityGateThreshold; }

struct FeasibilityReport {
  std::string dataset_id;
  std::int64_t n_annotated = 0;
  double rate_lower = 0.0;
  double rate_upper = 0.0;
  double rate_average = 0.0;
  bool gate_passed = false;  // on the configured policy's rate
  TiebreakPolicy policy = TiebreakPolicy::Average;
};

enum class SourceFilter { Auto, Human, AI, Mixed };

inline const char* to_string(SourceFilter f) {
  switch (f) {
    case SourceFilter::Auto: return "auto";
    case SourceFilter::Human: return "human";
    case SourceFilter::AI: return "ai";
    case SourceFilter::Mixed: return "mixed";
  }
  return "auto";
}

// Human and AI ratings are never pooled unless the caller asks for Mixed;
// Auto prefers human ratings and falls back to AI-only files.
inline std::vector<AnnotationSet> filter_ratings(const std::vector<AnnotationSet>& sets,
                                                 SourceFilter filter) {
  RatingSource wanted = RatingSource::Human;
  if (filter == SourceFilter::AI) wanted = RatingSource::AI;
  if (filter == SourceFilter::Auto) {
    bool any_human = false;
    for (const auto& s : sets)
      for (const auto& r : s.ratings)
        if (r.source == RatingSource::Human) any_human = true;
    wanted = any_human ? RatingSource::Human : RatingSource::AI;
  }
  std::vector<AnnotationSet> out;
  for (const auto& s : sets) {
    AnnotationSet kept;
    kept.record_id = s.record_id;
    for (const auto& r : s.ratings) {
      if (filter == SourceFilter::Mixed || r.source == wanted) kept.ratings.push_back(r);
    }
    if (!kept.ratings.empty()) out.push_back(std::move(kept));
  }
  return out;
}

inline FeasibilityReport build_feasibility_report(const std::string& dataset_id,
                                                  const std::vector<AnnotationSet>& sets,
                                                  TiebreakPolicy policy = TiebreakPolicy::Average,
                                                  SourceFilter filter = SourceFilter::Auto) {
  auto usable = filter_ratings(sets, filter);
  if (usable.empty())
    throw CheckSkip(CheckSkip::Reason::NoAnnotations,
                    "no annotations for dataset \"" + dataset_id + "\"");
  FeasibilityReport rep;
  rep.dataset_id = dataset_id;
  rep.n_annotated = std::int64_t(usable.size());
  rep.policy = policy;
  double lo = 0, up = 0, avg = 0;
  for (const auto& s : usable) {
    lo += aggregate_annotations(s, TiebreakPolicy::Lower);
    up += aggregate_annotations(s, TiebreakPolicy::Upper);
    avg += aggregate_annotations(s, TiebreakPolicy::Average);
  }
  rep.rate_lower = lo / double(usable.size());
  rep.rate_upper = up / double(usable.size());
  rep.rate_average = avg / double(usable.size());
  double gate_rate = policy == TiebreakPolicy::Lower ? rep.rate_lower
                     : policy == TiebreakPolicy::Upper ? rep.rate_upper
                                                       : rep.rate_average;
  rep.gate_passed = feasibility_gate(gate_rate);
  return rep;
}

inline nlohmann::json feasibility_report_to_json(const FeasibilityReport& r) {
  return {{"dataset_id", r.dataset_id}, {"n_annotated", r.n_annotated},
          {"rate_lower", r.rate_lower}, {"rate_upper", r.rate_upper},
          {"rate_average", r.rate_average}, {"gate_passed", r.gate_passed},
          {"policy", to_string(r.policy)}};
}

inline FeasibilityReport feasibility_report_from_json(const nlohmann::json& j) {
  FeasibilityReport r;
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.n_annotated = j.at("n_annotated").get<std::int64_t>();
  r.rate_lower = j.at("rate_lower").get<double>();
  r.rate_upper = j.at("rate_upper").get<double>();
  r.rate_average = j.at("rate_average").get<double>();
  r.gate_passed = j.at("gate_passed").get<bool>();
  std::string p = j.at("policy").get<std::string>();
  r.policy = p == "lower" ? TiebreakPolicy::Lower
             : p == "upper" ? TiebreakPolicy::Upper
                            : TiebreakPolicy::Average;
  return r;
}

// --- annotation file I/O --------------------------------------------------------
// CSV columns: record_id, annotator_id, rating. The AI annotator uses the
// reserved annotator_id "AI".

inline std::vector<AnnotationSet> annotations_from_csv_text(const std::string& text) {
  auto rows = parse_csv(text);
  std::erase_if(rows, [](const CsvRow& r) { return r.size() == 1 && trim(r[0]).empty(); });
  if (rows.empty()) throw Error("empty annotation file");
  std::map<std::string, std::size_t> header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header[trim(rows[0][i])] = i;
  for (const char* col : {"record_id", "annotator_id", "rating"}) {
    if (!header.count(col)) throw Error(std::string("annotation file missing column ") + col);
  }

  std::map<std::string, AnnotationSet> by_record;
  std::vector<std::string> order;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw MalformedRowError(i + 1, "wrong field count in annotation file");
    std::string record_id = trim(rows[i][header["record_id"]]);
    std::string annotator = trim(rows[i][header["annotator_id"]]);
    std::string rating_s = to_lower(trim(rows[i][header["rating"]]));
    auto rating = feasibility_from_string(rating_s);
    if (!rating) throw MalformedRowError(i + 1, "unknown rating \"" + rating_s + "\"");
    auto [it, fresh] = by_record.try_emplace(record_id);
    if (fresh) {
      it->second.record_id = record_id;
      order.push_back(record_id);
    }
    for (const auto& existing : it->second.ratings) {
      if (existing.annotator_id == annotator)
        throw MalformedRowError(i + 1, "duplicate annotator \"" + annotator + "\" for record \"" +
                                           record_id + "\"");
    }
    AnnotatorRating r;
    r.annotator_id = annotator;
    r.rating = *rating;
    r.source = annotator == "AI" ? RatingSource::AI : RatingSource::Human;
    it->second.ratings.push_back(std::move(r));
  }
  std::vector<AnnotationSet> out;
  for (const auto& id : order) out.push_back(by_record[id]);
  return out;
}

inline std::vector<AnnotationSet> read_annotations_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open annotation file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return annotations_from_csv_text(buf.str());
}

inline std::string annotations_to_csv_text(const std::vector<AnnotationSet>& sets) {
  std::ostringstream out;
  out << "record_id,annotator_id,rating\n";
  for (const auto& s : sets) {
    for (const auto& r : s.ratings) {
      out << csv_escape(s.record_id) << ',' << csv_escape(r.annotator_id) << ','
          << to_string(r.rating) << '\n';
    }
  }
  return out.str();
}

inline void write_annotations_csv(const std::string& path, const std::vector<AnnotationSet>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write annotation file: " + path);
  out << annotations_to_csv_text(sets);
}

// --- AI annotation pipeline -------------------------------------------------------

struct AnnotateConfig {
  int sample_size = 300;  // per dataset; smaller datasets annotated in full
  std::uint64_t seed = 0;
  std::string model_id;
  double temperature = 0.0;
  std::string annotator_id = "AI";
};

struct AnnotateResult {
  std::vector<AnnotationSet> annotations;
  std::vector<std::string> warnings;
};

namespace detail {

// One rated prompt with parse-retry; each attempt is a distinct cache entry.
inline ParsedValue ask_rating(Gateway& gw, const AnnotateConfig& cfg, const std::string& prompt,
                              int base_run) {
  constexpr int kMaxAttempts = 3;
  ChatRequest req;
  req.model_id = cfg.model_id;
  req.prompt = prompt;
  req.temperature = cfg.temperature;
  ParsedValue last;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto resp = gw.cached_complete(req, base_run * kMaxAttempts + attempt);
    last = parse_rating(resp.text);
    if (last.ok()) return last;
  }
  return last;
}

}  // namespace detail

// Samples records uniformly without replacement (seeded) and rates each with
// both prompt variants to derive the three-way label.
inline AnnotateResult annotate_dataset(const Dataset& d, Gateway& gw, const AnnotateConfig& cfg) {
  AnnotateResult result;
  const std::size_t n = d.records.size();
  if (n == 0) return result;

  std::vector<std::size_t> chosen;
  if (n <= std::size_t(cfg.sample_size)) {
    for (std::size_t i = 0; i < n; ++i) chosen.push_back(i);
  } else {
    Rng rng(derive_seed(cfg.seed, kSeedSampling));
    chosen = sample_without_replacement(n, std::size_t(cfg.sample_size), rng);
    std::sort(chosen.begin(), chosen.end());  // keep record order in the output
  }

  for (std::size_t i : chosen) {
    const auto& r = d.records[i];
    auto enabled =
        detail::ask_rating(gw, cfg, build_feasibility_prompt(r.text, true), /*base_run=*/0);
    auto disabled =
        detail::ask_rating(gw, cfg, build_feasibility_prompt(r.text, false), /*base_run=*/0);
    if (!enabled.ok() || !disabled.ok()) {
      auto kind = !enabled.ok() ? enabled.error : disabled.error;
      result.warnings.push_back("record " + r.record_id + ": rating parse failed (" +
                                to_string(kind) + ")");
      continue;
    }
    AnnotationSet set;
    set.record_id = r.record_id;
    AnnotatorRating rating;
    rating.annotator_id = cfg.annotator_id;
    rating.rating = derive_three_way(*enabled.value, *disabled.value);
    rating.source = RatingSource::AI;
    set.ratings.push_back(std::move(rating));
    result.annotations.push_back(std::move(set));
  }
  return result;
}

// --- feasibility vs. predictability ------------------------------------------------

struct ExampleOutcome {
  std::string dataset_id;
  bool feasible = false;
  bool prediction_correct = false;
};

struct DatasetPredictability {
  std::string dataset_id;
  double feasibility_rate = 0.0;
  double prediction_macro_f1 = 0.0;  // feasibility predicting correctness
  double example_level_f1 = 0.0;     // F1 of the feasible -> correct rule
};

struct PredictabilityStats {
  std::vector<DatasetPredictability> per_dataset;
  double cross_dataset_pearson = 0.0;
};

inline PredictabilityStats predictability_stats(const std::vector<ExampleOutcome>& examples) {
  std::map<std::string, std::vector<const ExampleOutcome*>> by_dataset;
  for (const auto& e : examples) by_dataset[e.dataset_id].push_back(&e);
  if (by_dataset.size() < 2)
    throw Error("predictability_stats: need at least 2 datasets for a correlation");

  PredictabilityStats stats;
  std::vector<double> rates, f1s;
  for (const auto& [id, rows] : by_dataset) {
    if (rows.size() < 2)
      throw Error("predictability_stats: dataset \"" + id + "\" has fewer than 2 examples");
    DatasetPredictability dp;
    dp.dataset_id = id;
    std::vector<int> pred, truth;
    std::int64_t feasible = 0, tp = 0, pred_pos = 0, truth_pos = 0;
    for (const auto* e : rows) {
      pred.push_back(e->feasible ? 1 : 0);
      truth.push_back(e->prediction_correct ? 1 : 0);
      if (e->feasible) ++feasible;
      if (e->feasible && e->prediction_correct) ++tp;
      if (e->feasible) ++pred_pos;
      if (e->prediction_correct) ++truth_pos;
    }
    dp.feasibility_rate = double(feasible) / double(rows.size());
    dp.prediction_macro_f1 = macro_f1(pred, truth, 2).macro_f1;
    double precision = pred_pos > 0 ? double(tp) / double(pred_pos) : 0.0;
    double recall = truth_pos > 0 ? double(tp) / double(truth_pos) : 0.0;
    dp.example_level_f1 =
        (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    rates.push_back(dp.feasibility_rate);
    f1s.push_back(dp.prediction_macro_f1);
    stats.per_dataset.push_back(std::move(dp));
  }
  try {
    stats.cross_dataset_pearson = pearson(rates, f1s);
  } catch (const Error&) {
    throw Error(
        "predictability_stats: cross-dataset correlation undefined (all datasets share the same "
        "feasibility rate or the same prediction F1)");
  }
  return stats;
}

inline nlohmann::json predictability_stats_to_json(const PredictabilityStats& s) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& d : s.per_dataset) {
    per.push_back({{"dataset_id", d.dataset_id},
                   {"feasibility_rate", d.feasibility_rate},
                   {"prediction_macro_f1", d.prediction_macro_f1},
                   {"example_level_f1", d.example_level_f1}});
  }
  return {{"per_dataset", per}, {"cross_dataset_pearson", s.cross_dataset_pearson}};
}

}  // namespace dqa
