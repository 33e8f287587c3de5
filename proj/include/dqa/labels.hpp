#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dqa/error.hpp"

namespace dqa {

// Unified four-way veracity label every dataset is harmonized to.
enum class Label { False = 0, Mixed = 1, True = 2, Unknown = 3 };

// Canonical class ordering (False < Mixed < True < Unknown). Classifier
// tie-breaks resolve toward the earlier class.
inline constexpr Label kLabelOrder[4] = {Label::False, Label::Mixed, Label::True, Label::Unknown};

inline const char* to_string(Label l) {
  switch (l) {
    case Label::True: return "true";
    case Label::False: return "false";
    case Label::Mixed: return "mixed";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<Label> label_from_string(std::string_view s) {
  if (s == "true") return Label::True;
  if (s == "false") return Label::False;
  if (s == "mixed") return Label::Mixed;
  if (s == "unknown") return Label::Unknown;
  return std::nullopt;
}

inline Label parse_label_or_throw(std::string_view s) {
  auto l = label_from_string(s);
  if (!l) throw Error("not a harmonized label: \"" + std::string(s) + "\"");
  return *l;
}

}  // namespace dqa
