#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/error.hpp"
#include "dqa/records.hpp"
#include "dqa/stopwords_en.hpp"
#include "dqa/strings.hpp"

namespace dqa {

namespace detail {

// Decode one UTF-8 code point at i; advances i. Invalid bytes decode as
// themselves so malformed input degrades instead of throwing.
inline std::uint32_t next_codepoint(std::string_view s, std::size_t& i) {
  unsigned char c = s[i];
  if (c < 0x80) {
    ++i;
    return c;
  }
  int extra = (c >= 0xF0) ? 3 : (c >= 0xE0) ? 2 : (c >= 0xC0) ? 1 : 0;
  std::uint32_t cp = c & (0x3F >> extra);
  std::size_t j = i + 1;
  for (int k = 0; k < extra && j < s.size(); ++k, ++j) {
    unsigned char cc = s[j];
    if ((cc & 0xC0) != 0x80) break;
    cp = (cp << 6) | (cc & 0x3F);
  }
  if (j == i + 1 && extra > 0) {  // lone lead byte
    ++i;
    return c;
  }
  i = j;
  return cp;
}

// Unicode punctuation/space blocks that should split tokens. Non-ASCII runes
// outside these ranges count as word characters, which keeps non-Latin
// scripts intact without a full Unicode property table.
inline bool is_separator_codepoint(std::uint32_t cp) {
  if (cp == 0x00A0 || cp == 0x00AD) return true;                  // nbsp, soft hyphen
  if (cp >= 0x00A1 && cp <= 0x00BF) return true;                  // latin-1 punctuation
  if (cp == 0x00D7 || cp == 0x00F7) return true;                  // multiply, divide
  if (cp >= 0x2000 && cp <= 0x206F) return true;                  // general punctuation
  if (cp >= 0x2E00 && cp <= 0x2E7F) return true;                  // supplemental punctuation
  if (cp >= 0x3000 && cp <= 0x3003) return true;                  // CJK space/quotes
  if (cp == 0x30FB || cp == 0xFF0C || cp == 0xFF0E) return true;  // CJK/fullwidth dots
  if (cp >= 0xFE50 && cp <= 0xFE6F) return true;                  // small form variants
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;                  // fullwidth punctuation
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;
  return false;
}

inline bool is_word_codepoint(std::uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  return !is_separator_codepoint(cp);
}

inline void append_codepoint_lower(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    char c = static_cast<char>(cp);
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
    return;
  }
  // re-encode as UTF-8 (no case folding outside ASCII)
  if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace detail

// Lowercases and splits on any non-alphanumeric rune. Language-agnostic; the
// tag parameter exists for callers that route per-language stop-word lists.
inline std::vector<std::string> tokenize(std::string_view text,
                                         std::string_view /*language*/ = {}) {
  std::vector<std::string> tokens;
  std::string cur;
  std::size_t i = 0;
  while (i < text.size()) {
    std::uint32_t cp = detail::next_codepoint(text, i);
    if (detail::is_word_codepoint(cp)) {
      detail::append_codepoint_lower(cur, cp);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

using StopwordSet = std::unordered_set<std::string>;

inline const StopwordSet& default_stopwords() {
  static const StopwordSet set = [] {
    StopwordSet s;
    for (auto w : kEnglishStopwords) s.emplace(w);
    return s;
  }();
  return set;
}

// One token per line; '#' starts a comment; blank lines ignored.
inline StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open stop-word file: " + path);
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string w = trim(line);
    if (!w.empty()) set.insert(to_lower(std::move(w)));
  }
  return set;
}

enum class FrequencyMode { TotalOccurrences, DocumentFrequency };

struct Vocabulary {
  std::vector<std::string> tokens;       // descending frequency, ties lexicographic
  std::vector<std::int64_t> frequencies;  // aligned with tokens
  int k = 40;
};

inline nlohmann::json vocabulary_to_json(const Vocabulary& v) {
  return {{"tokens", v.tokens}, {"frequencies", v.frequencies}, {"k", v.k}};
}

inline Vocabulary top_k_vocabulary(const Dataset& d, int k, const StopwordSet& stopwords,
                                   FrequencyMode mode = FrequencyMode::TotalOccurrences) {
  if (k < 1) throw Error("top_k_vocabulary: k must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  std::unordered_set<std::string> in_doc;
  for (const auto& r : d.records) {
    if (mode == FrequencyMode::DocumentFrequency) in_doc.clear();
    for (auto& tok : tokenize(r.text, r.language.value_or(""))) {
      if (stopwords.count(tok)) continue;
      if (mode == FrequencyMode::TotalOccurrences) {
        counts[tok]++;
      } else if (in_doc.insert(tok).second) {
        counts[tok]++;
      }
    }
  }
  if (counts.empty()) throw CheckSkip(CheckSkip::Reason::NoText, "no tokens after stop-word removal");

  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));

  Vocabulary v;
  v.k = k;
  for (auto& [tok, c] : ranked) {
    v.tokens.push_back(tok);
    v.frequencies.push_back(c);
  }
  return v;
}

enum class FeatureKind { Counts, Presence };

// Record-by-token matrix plus class indices; the classifier input.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> counts;  // rows x cols, row-major
  std::vector<std::string> feature_names;
  std::vector<int> labels;  // class index per row
  std::vector<std::string> class_names;

  std::int32_t at(std::size_t i, std::size_t j) const { return counts[i * cols + j]; }
  std::int32_t& at(std::size_t i, std::size_t j) { return counts[i * cols + j]; }
};

inline FeatureMatrix featurize(const Dataset& d, const Vocabulary& v,
                               FeatureKind kind = FeatureKind::Counts) {
  if (v.tokens.empty()) throw Error("featurize: empty vocabulary");

  // class names in canonical order, restricted to labels present
  std::set<Label> present;
  for (const auto& r : d.records) present.insert(r.label);
  std::map<Label, int> class_index;
  FeatureMatrix m;
  for (Label l : kLabelOrder) {
    if (present.count(l)) {
      class_index[l] = static_cast<int>(m.class_names.size());
      m.class_names.emplace_back(to_string(l));
    }
  }

  std::unordered_map<std::string_view, std::size_t> token_index;
  for (std::size_t j = 0; j < v.tokens.size(); ++j) token_index[v.tokens[j]] = j;

  m.rows = d.records.size();
  m.cols = v.tokens.size();
  m.feature_names = v.tokens;
  m.counts.assign(m.rows * m.cols, 0);
  m.labels.resize(m.rows);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    m.labels[i] = class_index.at(r.label);
    for (auto& tok : tokenize(r.text, r.language.value_or(""))) {
      auto it = token_index.find(std::string_view(tok));
      if (it == token_index.end()) continue;
      if (kind == FeatureKind::Counts) {
        m.at(i, it->second)++;
      } else {
        m.at(i, it->second) = 1;
      }
    }
  }
  return m;
}

}  // namespace dqa
