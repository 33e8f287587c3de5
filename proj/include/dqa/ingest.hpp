#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/csv.hpp"
#include "dqa/error.hpp"
#include "dqa/labels.hpp"
#include "dqa/records.hpp"
#include "dqa/strings.hpp"

namespace dqa {

enum class SourceFormat { Csv, Tsv, Jsonl };

// Maps one source file onto the unified record schema.
struct MappingConfig {
  SourceFormat format = SourceFormat::Csv;
  std::string dataset_id;  // default: source file stem

  // source field name per schema slot; only "text" is mandatory
  std::map<std::string, std::string> column_map;

  // normalized (lowercased, trimmed) raw label -> harmonized label
  std::unordered_map<std::string, Label> label_map;

  // tried in order; first success wins
  std::vector<std::string> date_formats = {"%Y-%m-%d", "%d/%m/%Y", "%m/%Y"};

  bool text_fallback_id = true;  // synthesize record_id from row index
};

// Case-insensitive, whitespace-trimmed lookup. Total over mapped keys;
// anything else is an error so silent label drift cannot happen.
inline Label harmonize_label(std::string_view raw,
                             const std::unordered_map<std::string, Label>& label_map) {
  std::string key = to_lower(trim(raw));
  auto it = label_map.find(key);
  if (it == label_map.end()) throw UnmappedLabelError(std::string(raw));
  return it->second;
}

// --- date parsing -----------------------------------------------------------
// Patterns support %Y %m %d separated by literal characters. A pattern
// without %d yields day = 1.

inline std::optional<Date> parse_date(std::string_view s, std::string_view pattern) {
  Date d{0, 1, 1};
  bool saw_year = false, saw_month = false;
  std::size_t si = 0;
  auto read_int = [&](int width_max, int& out) -> bool {
    int v = 0, n = 0;
    while (si < s.size() && n < width_max && std::isdigit(static_cast<unsigned char>(s[si]))) {
      v = v * 10 + (s[si] - '0');
      ++si;
      ++n;
    }
    if (n == 0) return false;
    out = v;
    return true;
  };
  for (std::size_t pi = 0; pi < pattern.size(); ++pi) {
    if (pattern[pi] == '%' && pi + 1 < pattern.size()) {
      char spec = pattern[++pi];
      bool ok = false;
      switch (spec) {
        case 'Y': ok = read_int(4, d.year); saw_year = ok; break;
        case 'm': ok = read_int(2, d.month); saw_month = ok; break;
        case 'd': ok = read_int(2, d.day); break;
        default: return std::nullopt;
      }
      if (!ok) return std::nullopt;
    } else {
      if (si >= s.size() || s[si] != pattern[pi]) return std::nullopt;
      ++si;
    }
  }
  if (si != s.size()) return std::nullopt;
  if (!saw_year || !saw_month) return std::nullopt;
  if (!d.valid()) return std::nullopt;
  return d;
}

inline std::optional<Date> parse_date_any(std::string_view s,
                                          const std::vector<std::string>& patterns) {
  for (const auto& p : patterns) {
    if (auto d = parse_date(s, p)) return d;
  }
  return std::nullopt;
}

// --- mapping config I/O ------------------------------------------------------

inline MappingConfig mapping_from_json(const nlohmann::json& j) {
  MappingConfig cfg;
  std::string fmt = to_lower(j.value("format", std::string("csv")));
  if (fmt == "csv") cfg.format = SourceFormat::Csv;
  else if (fmt == "tsv") cfg.format = SourceFormat::Tsv;
  else if (fmt == "jsonl") cfg.format = SourceFormat::Jsonl;
  else throw Error("mapping: unknown format \"" + fmt + "\"");

  cfg.dataset_id = j.value("dataset_id", std::string());
  if (!j.contains("column_map") || !j["column_map"].contains("text"))
    throw Error("mapping: column_map.text is required");
  for (auto& [k, v] : j["column_map"].items()) cfg.column_map[k] = v.get<std::string>();

  if (j.contains("label_map")) {
    for (auto& [k, v] : j["label_map"].items())
      cfg.label_map[to_lower(trim(k))] = parse_label_or_throw(v.get<std::string>());
  }
  if (j.contains("date_formats"))
    cfg.date_formats = j["date_formats"].get<std::vector<std::string>>();
  cfg.text_fallback_id = j.value("text_fallback_id", true);
  return cfg;
}

inline MappingConfig load_mapping(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open mapping file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("mapping file is not valid JSON: " + path);
  return mapping_from_json(j);
}

// --- loading ------------------------------------------------------------------

namespace detail {

inline std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

inline std::string json_field_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    std::ostringstream os;
    os << v.get<double>();
    return os.str();
  }
  return {};
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// field values per schema slot for one source row; nullopt when absent
using RawRow = std::map<std::string, std::optional<std::string>>;

inline void append_record(Dataset& d, const RawRow& row, std::size_t row_index,
                          std::size_t report_row, const MappingConfig& cfg,
                          std::set<std::string>& seen_ids, std::size_t& dropped_empty) {
  auto get = [&](const char* slot) -> std::optional<std::string> {
    auto it = row.find(slot);
    if (it == row.end()) return std::nullopt;
    return it->second;
  };

  ClaimRecord r;
  r.dataset_id = d.dataset_id;

  auto text = get("text");
  r.text = text ? trim(*text) : std::string();
  if (r.text.empty()) {
    ++dropped_empty;
    return;
  }

  if (auto raw = get("label"); raw.has_value()) {
    r.raw_label = *raw;
    r.label = harmonize_label(*raw, cfg.label_map);
  } else if (cfg.column_map.count("label")) {
    // declared label column, value missing in this row
    r.raw_label.clear();
    r.label = harmonize_label("", cfg.label_map);
  } else {
    // dataset ships no veracity labels at all
    r.label = Label::Unknown;
  }

  if (auto id = get("record_id"); id && !trim(*id).empty()) {
    r.record_id = trim(*id);
  } else if (cfg.text_fallback_id) {
    r.record_id = "row-" + std::to_string(row_index);
  } else {
    throw MalformedRowError(report_row, "missing record_id");
  }
  if (!seen_ids.insert(r.record_id).second)
    throw MalformedRowError(report_row, "duplicate record_id \"" + r.record_id + "\"");

  if (auto ds = get("date"); ds && !trim(*ds).empty()) {
    auto parsed = parse_date_any(trim(*ds), cfg.date_formats);
    if (parsed) {
      r.date = *parsed;
    } else {
      d.load_warnings.push_back("row " + std::to_string(report_row) + ": unparseable date \"" +
                                trim(*ds) + "\"");
    }
  }

  if (auto tid = get("tweet_id"); tid && !trim(*tid).empty()) {
    std::string t = trim(*tid);
    if (all_digits(t) && t.size() >= 3) {
      r.tweet_id = t;
    } else {
      d.load_warnings.push_back("row " + std::to_string(report_row) + ": invalid tweet_id \"" + t +
                                "\"");
    }
  }

  if (auto lang = get("language"); lang && !trim(*lang).empty()) r.language = trim(*lang);

  d.records.push_back(std::move(r));
}

}  // namespace detail

inline Dataset load_dataset(const std::string& path, const MappingConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  Dataset d;
  d.source_path = path;
  d.dataset_id = cfg.dataset_id.empty() ? detail::file_stem(path) : cfg.dataset_id;

  std::set<std::string> seen_ids;
  std::size_t dropped_empty = 0;

  if (cfg.format == SourceFormat::Jsonl) {
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0, row_index = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object())
        throw MalformedRowError(lineno, "invalid JSON object");
      detail::RawRow row;
      for (const auto& [slot, field] : cfg.column_map) {
        if (j.contains(field) && !j[field].is_null())
          row[slot] = detail::json_field_to_string(j[field]);
      }
      detail::append_record(d, row, row_index, lineno, cfg, seen_ids, dropped_empty);
      ++row_index;
    }
  } else {
    const char delim = cfg.format == SourceFormat::Tsv ? '\t' : ',';
    auto rows = parse_csv(text, delim);
    // drop blank lines
    std::erase_if(rows, [](const CsvRow& r) { return r.size() == 1 && trim(r[0]).empty(); });
    if (rows.empty()) throw Error("empty file (header row required): " + path);

    std::map<std::string, std::size_t> header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header[trim(rows[0][i])] = i;
    std::map<std::string, std::size_t> slot_to_col;
    for (const auto& [slot, field] : cfg.column_map) {
      auto it = header.find(field);
      if (it == header.end()) {
        if (slot == "text") throw Error("column \"" + field + "\" not found in " + path);
        continue;  // optional column absent from this file
      }
      slot_to_col[slot] = it->second;
    }

    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& cells = rows[i];
      if (cells.size() != rows[0].size())
        throw MalformedRowError(i + 1, "expected " + std::to_string(rows[0].size()) +
                                           " fields, got " + std::to_string(cells.size()));
      detail::RawRow row;
      for (const auto& [slot, col] : slot_to_col) row[slot] = cells[col];
      detail::append_record(d, row, i - 1, i + 1, cfg, seen_ids, dropped_empty);
    }
  }

  if (dropped_empty > 0)
    d.load_warnings.push_back(std::to_string(dropped_empty) + " row(s) dropped: empty text");
  return d;
}

}  // namespace dqa
