#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/error.hpp"
#include "dqa/labels.hpp"

namespace dqa {

struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  bool operator==(const Date&) const = default;
  auto operator<=>(const Date&) const = default;

  bool valid() const {
    const std::chrono::year_month_day ymd{std::chrono::year{year},
                                          std::chrono::month{static_cast<unsigned>(month)},
                                          std::chrono::day{static_cast<unsigned>(day)}};
    return ymd.ok();
  }
};

inline std::chrono::sys_days to_sys_days(const Date& d) {
  const std::chrono::year_month_day ymd{std::chrono::year{d.year},
                                        std::chrono::month{static_cast<unsigned>(d.month)},
                                        std::chrono::day{static_cast<unsigned>(d.day)}};
  return std::chrono::sys_days{ymd};
}

// Whole days from a to b (positive when b is later).
inline long days_between(const Date& a, const Date& b) {
  return (to_sys_days(b) - to_sys_days(a)).count();
}

inline std::string iso8601(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

// One claim (or paragraph) with its raw and harmonized label.
struct ClaimRecord {
  std::string record_id;
  std::string dataset_id;
  std::string text;
  std::string raw_label;
  Label label = Label::Unknown;
  std::optional<Date> date;
  std::optional<std::string> tweet_id;  // decimal digits, length >= 3
  std::optional<std::string> language;

  bool operator==(const ClaimRecord&) const = default;
};

struct Dataset {
  std::string dataset_id;
  std::vector<ClaimRecord> records;
  std::string source_path;
  std::vector<std::string> load_warnings;
};

inline Dataset filter_by_labels(const Dataset& d, const std::set<Label>& allowed) {
  if (allowed.empty()) throw Error("filter_by_labels: empty label set");
  Dataset out;
  out.dataset_id = d.dataset_id;
  out.source_path = d.source_path;
  for (const auto& r : d.records) {
    if (allowed.count(r.label)) out.records.push_back(r);
  }
  return out;
}

inline std::map<Label, double> label_distribution(const Dataset& d) {
  if (d.records.empty()) throw Error("label_distribution: empty dataset");
  std::map<Label, long> counts;
  for (const auto& r : d.records) counts[r.label]++;
  std::map<Label, double> out;
  for (auto [l, c] : counts) out[l] = double(c) / double(d.records.size());
  return out;
}

// --- fixed-schema JSONL serialization -------------------------------------
// Fields: record_id, dataset_id, text, raw_label, label, date, tweet_id,
// language. Dates as ISO-8601; absent optionals omitted.

inline nlohmann::json record_to_json(const ClaimRecord& r) {
  nlohmann::json j;
  j["record_id"] = r.record_id;
  j["dataset_id"] = r.dataset_id;
  j["text"] = r.text;
  j["raw_label"] = r.raw_label;
  j["label"] = to_string(r.label);
  if (r.date) j["date"] = iso8601(*r.date);
  if (r.tweet_id) j["tweet_id"] = *r.tweet_id;
  if (r.language) j["language"] = *r.language;
  return j;
}

inline std::optional<Date> parse_iso8601(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return -1;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  Date d{num(0, 4), num(5, 2), num(8, 2)};
  if (d.year < 0 || d.month < 0 || d.day < 0 || !d.valid()) return std::nullopt;
  return d;
}

inline ClaimRecord record_from_json(const nlohmann::json& j) {
  ClaimRecord r;
  r.record_id = j.at("record_id").get<std::string>();
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.text = j.at("text").get<std::string>();
  r.raw_label = j.value("raw_label", std::string());
  r.label = parse_label_or_throw(j.at("label").get<std::string>());
  if (j.contains("date")) {
    auto d = parse_iso8601(j["date"].get<std::string>());
    if (!d) throw Error("bad date in record " + r.record_id);
    r.date = *d;
  }
  if (j.contains("tweet_id")) r.tweet_id = j["tweet_id"].get<std::string>();
  if (j.contains("language")) r.language = j["language"].get<std::string>();
  return r;
}

inline std::string dataset_to_jsonl(const Dataset& d) {
  std::ostringstream out;
  for (const auto& r : d.records) out << record_to_json(r).dump() << '\n';
  return out.str();
}

inline Dataset dataset_from_jsonl_text(const std::string& text, const std::string& source = "") {
  Dataset d;
  d.source_path = source;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRowError(lineno, "invalid JSON");
    ClaimRecord r = record_from_json(j);
    if (d.records.empty()) d.dataset_id = r.dataset_id;
    if (!seen_ids.insert(r.record_id).second)
      throw MalformedRowError(lineno, "duplicate record_id \"" + r.record_id + "\"");
    d.records.push_back(std::move(r));
  }
  return d;
}

inline Dataset read_dataset_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_jsonl_text(buf.str(), path);
}

inline void write_dataset_jsonl(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset file: " + path);
  out << dataset_to_jsonl(d);
}

}  // namespace dqa
