#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/error.hpp"
#include "dqa/llm.hpp"
#include "dqa/parse.hpp"
#include "dqa/prompts.hpp"

namespace dqa {

enum class JudgeMode { Score, Binary, Trinary };
enum class RationaleClass { NotWrong, Wrong, Unsure };

inline const char* to_string(JudgeMode m) {
  switch (m) {
    case JudgeMode::Score: return "score";
    case JudgeMode::Binary: return "binary";
    case JudgeMode::Trinary: return "trinary";
  }
  return "score";
}

inline std::optional<JudgeMode> judge_mode_from_string(std::string_view s) {
  if (s == "score") return JudgeMode::Score;
  if (s == "binary") return JudgeMode::Binary;
  if (s == "trinary") return JudgeMode::Trinary;
  return std::nullopt;
}

inline const char* to_string(RationaleClass c) {
  switch (c) {
    case RationaleClass::NotWrong: return "not_wrong";
    case RationaleClass::Wrong: return "wrong";
    case RationaleClass::Unsure: return "unsure";
  }
  return "unsure";
}

inline std::optional<RationaleClass> rationale_class_from_string(std::string_view s) {
  if (s == "not_wrong") return RationaleClass::NotWrong;
  if (s == "wrong") return RationaleClass::Wrong;
  if (s == "unsure") return RationaleClass::Unsure;
  return std::nullopt;
}

struct JudgeConfig {
  JudgeMode mode = JudgeMode::Score;
  int runs = 5;
  double temperature = 0.0;
  int not_wrong_max = 3;  // score <= this -> rationale not wrong
  int wrong_min = 4;      // score >= this -> rationale wrong
  std::string model_id;

  void validate() const {
    if (runs < 1) throw Error("judge: runs must be >= 1");
    if (not_wrong_max >= wrong_min) throw Error("judge: not_wrong_max must be < wrong_min");
  }
};

struct ContradictionVerdict {
  JudgeMode mode = JudgeMode::Score;
  std::vector<int> raw_values;  // one per run
  double aggregate = 0.0;       // mean for Score, majority value otherwise
  RationaleClass classification = RationaleClass::Unsure;
};

inline std::pair<int, int> verdict_range(JudgeMode mode) {
  switch (mode) {
    case JudgeMode::Score: return {0, 10};
    case JudgeMode::Binary: return {0, 1};
    case JudgeMode::Trinary: return {-1, 1};
  }
  return {0, 10};
}

inline std::string build_contradiction_prompt(std::string_view statement,
                                              std::string_view assessment1,
                                              std::string_view assessment2, JudgeMode mode) {
  if (trim(statement).empty() || trim(assessment1).empty() || trim(assessment2).empty())
    throw Error("build_contradiction_prompt: empty field");
  std::string prompt(prompts::kContradictionBase);
  auto substitute = [&prompt](std::string_view slot, std::string_view text) {
    auto pos = prompt.find(slot);
    prompt.replace(pos, slot.size(), std::string(text));
  };
  substitute("<statement>", statement);
  substitute("<article>", assessment1);
  substitute("<prediction>", assessment2);
  switch (mode) {
    case JudgeMode::Score: prompt += prompts::kContradictionScoreTail; break;
    case JudgeMode::Binary: prompt += prompts::kContradictionBinaryTail; break;
    case JudgeMode::Trinary: prompt += prompts::kContradictionTrinaryTail; break;
  }
  return prompt;
}

inline ParsedValue parse_verdict(std::string_view response, JudgeMode mode) {
  auto [lo, hi] = verdict_range(mode);
  return parse_after_bar(response, lo, hi);
}

namespace detail {

// Majority vote; ties resolve toward the smaller value (toward "no
// contradiction"). Ties cannot happen with the default odd run count.
inline int majority_value(const std::vector<int>& values) {
  std::map<int, int> counts;
  for (int v : values) counts[v]++;
  int best_value = values.front();
  int best_count = -1;
  for (const auto& [value, count] : counts) {  // ascending keys
    if (count > best_count) {
      best_count = count;
      best_value = value;
    }
  }
  return best_value;
}

inline RationaleClass classify(JudgeMode mode, double aggregate, const JudgeConfig& cfg) {
  switch (mode) {
    case JudgeMode::Score:
      if (aggregate <= double(cfg.not_wrong_max)) return RationaleClass::NotWrong;
      if (aggregate >= double(cfg.wrong_min)) return RationaleClass::Wrong;
      return RationaleClass::Unsure;
    case JudgeMode::Binary:
      return aggregate == 0.0 ? RationaleClass::NotWrong : RationaleClass::Wrong;
    case JudgeMode::Trinary:
      if (aggregate == -1.0) return RationaleClass::Unsure;
      return aggregate == 0.0 ? RationaleClass::NotWrong : RationaleClass::Wrong;
  }
  return RationaleClass::Unsure;
}

}  // namespace detail

// cfg.runs judged samples of the same prompt (run_index keeps cache entries
// distinct); per-run parse failures re-request up to twice before the whole
// evaluation errors.
inline ContradictionVerdict evaluate_contradiction(std::string_view statement,
                                                   std::string_view article,
                                                   std::string_view prediction_rationale,
                                                   Gateway& gateway, const JudgeConfig& cfg) {
  cfg.validate();
  ChatRequest req;
  req.model_id = cfg.model_id;
  req.prompt = build_contradiction_prompt(statement, article, prediction_rationale, cfg.mode);
  req.temperature = cfg.temperature;

  constexpr int kMaxAttempts = 3;
  ContradictionVerdict verdict;
  verdict.mode = cfg.mode;
  for (int run = 0; run < cfg.runs; ++run) {
    ParsedValue parsed;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      auto resp = gateway.cached_complete(req, run * kMaxAttempts + attempt);
      parsed = parse_verdict(resp.text, cfg.mode);
      if (parsed.ok()) break;
    }
    if (!parsed.ok())
      throw Error("judge: run " + std::to_string(run) + " unparseable after " +
                  std::to_string(kMaxAttempts) + " attempts (" + to_string(parsed.error) + ")");
    verdict.raw_values.push_back(*parsed.value);
  }

  if (cfg.mode == JudgeMode::Score) {
    double sum = 0;
    for (int v : verdict.raw_values) sum += v;
    verdict.aggregate = sum / double(verdict.raw_values.size());
  } else {
    verdict.aggregate = double(detail::majority_value(verdict.raw_values));
  }
  verdict.classification = detail::classify(cfg.mode, verdict.aggregate, cfg);
  return verdict;
}

// Fraction of verdicts matching the human label. Unsure counts as
// disagreement unless drop_unsure removes those pairs from the denominator.
inline double agreement_with_labels(const std::vector<ContradictionVerdict>& verdicts,
                                    const std::vector<RationaleClass>& human,
                                    bool drop_unsure = false) {
  if (verdicts.size() != human.size()) throw Error("agreement_with_labels: length mismatch");
  if (verdicts.empty()) throw Error("agreement_with_labels: empty input");
  std::int64_t considered = 0, matched = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (verdicts[i].classification == RationaleClass::Unsure && drop_unsure) continue;
    ++considered;
    if (verdicts[i].classification == human[i]) ++matched;
  }
  if (considered == 0) throw Error("agreement_with_labels: every verdict was unsure");
  return double(matched) / double(considered);
}

// --- batch I/O ---------------------------------------------------------------
// Input: JSONL {record_id, statement, article, prediction}
// Output: JSONL verdicts plus a config echo line for provenance.

struct JudgeBatchItem {
  std::string record_id;
  std::string statement;
  std::string article;
  std::string prediction;
};

inline std::vector<JudgeBatchItem> read_judge_batch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open judge batch: " + path);
  std::vector<JudgeBatchItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRowError(lineno, "invalid JSON");
    JudgeBatchItem item;
    item.record_id = j.at("record_id").get<std::string>();
    item.statement = j.at("statement").get<std::string>();
    item.article = j.at("article").get<std::string>();
    item.prediction = j.at("prediction").get<std::string>();
    items.push_back(std::move(item));
  }
  return items;
}

inline nlohmann::json verdict_to_json(const ContradictionVerdict& v) {
  return {{"mode", to_string(v.mode)},
          {"raw_values", v.raw_values},
          {"aggregate", v.aggregate},
          {"classification", to_string(v.classification)}};
}

inline std::string judge_batch_to_jsonl(const std::vector<JudgeBatchItem>& items,
                                        const std::vector<ContradictionVerdict>& verdicts,
                                        const JudgeConfig& cfg) {
  nlohmann::json echo{{"config",
                       {{"mode", to_string(cfg.mode)},
                        {"runs", cfg.runs},
                        {"temperature", cfg.temperature},
                        {"not_wrong_max", cfg.not_wrong_max},
                        {"wrong_min", cfg.wrong_min},
                        {"between_thresholds", "unsure"},
                        {"model_id", cfg.model_id}}}};
  std::ostringstream out;
  out << echo.dump() << '\n';
  for (std::size_t i = 0; i < items.size(); ++i) {
    nlohmann::json j = verdict_to_json(verdicts[i]);
    j["record_id"] = items[i].record_id;
    out << j.dump() << '\n';
  }
  return out.str();
}

inline std::string run_judge_batch(const std::vector<JudgeBatchItem>& items, Gateway& gateway,
                                   const JudgeConfig& cfg) {
  std::vector<ContradictionVerdict> verdicts;
  verdicts.reserve(items.size());
  for (const auto& item : items) {
    verdicts.push_back(
        evaluate_contradiction(item.statement, item.article, item.prediction, gateway, cfg));
  }
  return judge_batch_to_jsonl(items, verdicts, cfg);
}

}  // namespace dqa
