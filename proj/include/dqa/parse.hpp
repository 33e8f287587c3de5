#pragma once

// Shared response-parsing helpers: model replies end with "<analysis> | <value>".

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "dqa/strings.hpp"

namespace dqa {

enum class ParseErrorKind { None, MissingDelimiter, NotAnInteger, OutOfRange, MissingMarker };

inline const char* to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::None: return "none";
    case ParseErrorKind::MissingDelimiter: return "missing_delimiter";
    case ParseErrorKind::NotAnInteger: return "not_an_integer";
    case ParseErrorKind::OutOfRange: return "out_of_range";
    case ParseErrorKind::MissingMarker: return "missing_marker";
  }
  return "none";
}

struct ParsedValue {
  std::optional<int> value;
  ParseErrorKind error = ParseErrorKind::None;

  bool ok() const { return value.has_value(); }
};

namespace detail {

// Leading (optionally signed) integer of a trimmed string; trailing text such
// as ": contradiction" is ignored.
inline std::optional<long> leading_integer(std::string_view s) {
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    negative = s[i] == '-';
    ++i;
  }
  std::size_t digits_begin = i;
  long v = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    v = v * 10 + (s[i] - '0');
    if (v > 1000000) return std::nullopt;  // nothing legitimate is this large
    ++i;
  }
  if (i == digits_begin) return std::nullopt;
  return negative ? -v : v;
}

}  // namespace detail

// Integer after the LAST vertical bar, range-checked against [lo, hi].
inline ParsedValue parse_after_bar(std::string_view response, int lo, int hi) {
  auto bar = response.rfind('|');
  if (bar == std::string_view::npos) return {std::nullopt, ParseErrorKind::MissingDelimiter};
  std::string tail = trim(response.substr(bar + 1));
  auto v = detail::leading_integer(tail);
  if (!v) return {std::nullopt, ParseErrorKind::NotAnInteger};
  if (*v < lo || *v > hi) return {std::nullopt, ParseErrorKind::OutOfRange};
  return {int(*v), ParseErrorKind::None};
}

}  // namespace dqa
