#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/cv.hpp"
#include "dqa/error.hpp"
#include "dqa/forest.hpp"
#include "dqa/metrics.hpp"
#include "dqa/records.hpp"
#include "dqa/text.hpp"

namespace dqa {

enum class CheckKind { Keyword, Temporal };
enum class LabelSet { TF, TFM };
enum class TemporalEncoding { TweetIdPrefix, DayOffset };
enum class EvalProtocol { CrossValidation, Holdout };

inline const char* to_string(CheckKind k) { return k == CheckKind::Keyword ? "keyword" : "temporal"; }
inline const char* to_string(LabelSet s) { return s == LabelSet::TF ? "tf" : "tfm"; }
inline const char* to_string(TemporalEncoding e) {
  return e == TemporalEncoding::TweetIdPrefix ? "tweet_id_prefix" : "day_offset";
}

// One quality check outcome: shallow-model predictivity against the
// label-distribution baseline, and whether the margin trips the flag.
struct CheckResult {
  CheckKind kind = CheckKind::Keyword;
  LabelSet label_set = LabelSet::TF;
  double predictivity = 0.0;  // macro F1 in [0, 1]
  double baseline = 0.0;      // macro F1 in [0, 1]
  double margin = 0.0;        // predictivity - baseline
  bool flagged = false;
  std::int64_t n_records = 0;
  std::optional<TemporalEncoding> temporal_encoding;
};

inline nlohmann::json check_result_to_json(const CheckResult& r) {
  nlohmann::json j{{"kind", to_string(r.kind)},
                   {"label_set", to_string(r.label_set)},
                   {"predictivity", r.predictivity},
                   {"baseline", r.baseline},
                   {"margin", r.margin},
                   {"flagged", r.flagged},
                   {"n_records", r.n_records}};
  if (r.temporal_encoding) j["temporal_encoding"] = to_string(*r.temporal_encoding);
  return j;
}

inline CheckResult check_result_from_json(const nlohmann::json& j) {
  CheckResult r;
  r.kind = j.at("kind").get<std::string>() == "keyword" ? CheckKind::Keyword : CheckKind::Temporal;
  r.label_set = j.at("label_set").get<std::string>() == "tf" ? LabelSet::TF : LabelSet::TFM;
  r.predictivity = j.at("predictivity").get<double>();
  r.baseline = j.at("baseline").get<double>();
  r.margin = j.at("margin").get<double>();
  r.flagged = j.at("flagged").get<bool>();
  r.n_records = j.at("n_records").get<std::int64_t>();
  if (j.contains("temporal_encoding")) {
    r.temporal_encoding = j["temporal_encoding"].get<std::string>() == "tweet_id_prefix"
                              ? TemporalEncoding::TweetIdPrefix
                              : TemporalEncoding::DayOffset;
  }
  return r;
}

struct LeakageConfig {
  int vocab_k = 40;
  int folds = 5;
  int baseline_repetitions = 100;
  double flag_threshold = 0.10;  // margin in F1 units (10 percentage points)
  ForestParams forest;           // max_depth 20, 100 trees, seeded
  EvalProtocol protocol = EvalProtocol::CrossValidation;
  double holdout_fraction = 0.2;
  FrequencyMode frequency_mode = FrequencyMode::TotalOccurrences;
  FeatureKind feature_kind = FeatureKind::Counts;
  StopwordSet stopwords = default_stopwords();
  std::string stopwords_id = "en-default";  // provenance tag for reports
};

namespace detail {

inline std::set<Label> allowed_labels(LabelSet s) {
  if (s == LabelSet::TF) return {Label::True, Label::False};
  return {Label::True, Label::False, Label::Mixed};
}

// Records sorted by record_id so results do not depend on input order.
inline Dataset canonical_subset(const Dataset& d, LabelSet s) {
  Dataset filtered = filter_by_labels(d, allowed_labels(s));
  std::sort(filtered.records.begin(), filtered.records.end(),
            [](const ClaimRecord& a, const ClaimRecord& b) { return a.record_id < b.record_id; });
  return filtered;
}

inline void require_trainable(const FeatureMatrix& m, int folds) {
  std::map<int, std::int64_t> counts;
  for (int l : m.labels) counts[l]++;
  if (counts.size() < 2)
    throw CheckSkip(CheckSkip::Reason::SingleClass, "fewer than 2 classes present");
  for (auto [c, n] : counts) {
    if (n < folds)
      throw CheckSkip(CheckSkip::Reason::SingleClass,
                      "class \"" + m.class_names[std::size_t(c)] + "\" has " + std::to_string(n) +
                          " records, fewer than folds=" + std::to_string(folds));
  }
}

inline CheckResult run_check(const FeatureMatrix& m, CheckKind kind, LabelSet label_set,
                             const LeakageConfig& cfg) {
  require_trainable(m, cfg.folds);
  double predictivity = cfg.protocol == EvalProtocol::CrossValidation
                            ? cross_validated_f1(m, cfg.forest, cfg.folds)
                            : holdout_f1(m, cfg.forest, cfg.holdout_fraction);
  double baseline =
      label_distribution_baseline(m.labels, int(m.class_names.size()),
                                  cfg.baseline_repetitions, derive_seed(cfg.forest.seed, kSeedSampling));
  CheckResult r;
  r.kind = kind;
  r.label_set = label_set;
  r.predictivity = predictivity;
  r.baseline = baseline;
  r.margin = predictivity - baseline;
  r.flagged = r.margin >= cfg.flag_threshold;
  r.n_records = std::int64_t(m.rows);
  return r;
}

}  // namespace detail

// Does a shallow classifier over the top-k tokens beat the label-distribution
// baseline? A wide margin means keywords leak the label.
inline CheckResult keyword_check(const Dataset& d, LabelSet label_set, const LeakageConfig& cfg) {
  Dataset subset = detail::canonical_subset(d, label_set);
  if (subset.records.empty())
    throw CheckSkip(CheckSkip::Reason::SingleClass, "no records with the requested labels");
  Vocabulary vocab = top_k_vocabulary(subset, cfg.vocab_k, cfg.stopwords, cfg.frequency_mode);
  FeatureMatrix m = featurize(subset, vocab, cfg.feature_kind);
  return detail::run_check(m, CheckKind::Keyword, label_set, cfg);
}

// Collection-time signal for one record: numeric value of the first three
// tweet-ID digits when available, else whole days since the dataset's first
// date. Records with neither are excluded from the check.
inline std::optional<double> temporal_feature(const ClaimRecord& r, std::optional<Date> min_date) {
  if (r.tweet_id && r.tweet_id->size() >= 3) {
    const std::string& t = *r.tweet_id;
    return double((t[0] - '0') * 100 + (t[1] - '0') * 10 + (t[2] - '0'));
  }
  if (r.date && min_date) return double(days_between(*min_date, *r.date));
  return std::nullopt;
}

inline std::optional<double> temporal_feature(const ClaimRecord& r, const Dataset& d) {
  std::optional<Date> min_date;
  for (const auto& rec : d.records) {
    if (rec.date && (!min_date || *rec.date < *min_date)) min_date = rec.date;
  }
  return temporal_feature(r, min_date);
}

inline CheckResult temporal_check(const Dataset& d, const LeakageConfig& cfg,
                                  LabelSet label_set = LabelSet::TF) {
  Dataset subset = detail::canonical_subset(d, label_set);
  std::erase_if(subset.records,
                [](const ClaimRecord& r) { return !r.tweet_id.has_value() && !r.date.has_value(); });
  if (subset.records.empty())
    throw CheckSkip(CheckSkip::Reason::NoTemporalInfo,
                    "no records with tweet_id or date among the requested labels");

  std::optional<Date> min_date;
  bool any_tweet = false;
  for (const auto& r : subset.records) {
    if (r.tweet_id) any_tweet = true;
    if (r.date && (!min_date || *r.date < *min_date)) min_date = r.date;
  }

  // single-feature matrix over the temporal encoding
  FeatureMatrix m;
  std::set<Label> present;
  for (const auto& r : subset.records) present.insert(r.label);
  std::map<Label, int> class_index;
  for (Label l : kLabelOrder) {
    if (present.count(l)) {
      class_index[l] = int(m.class_names.size());
      m.class_names.emplace_back(to_string(l));
    }
  }
  m.rows = subset.records.size();
  m.cols = 1;
  m.feature_names = {"temporal"};
  m.counts.reserve(m.rows);
  m.labels.reserve(m.rows);
  for (const auto& r : subset.records) {
    auto f = temporal_feature(r, min_date);
    m.counts.push_back(std::int32_t(*f));
    m.labels.push_back(class_index.at(r.label));
  }

  CheckResult result = detail::run_check(m, CheckKind::Temporal, label_set, cfg);
  result.temporal_encoding =
      any_tweet ? TemporalEncoding::TweetIdPrefix : TemporalEncoding::DayOffset;
  return result;
}

}  // namespace dqa
