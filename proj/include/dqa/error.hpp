#pragma once

#include <stdexcept>
#include <string>

namespace dqa {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raw label missing from a mapping's label table.
class UnmappedLabelError : public Error {
 public:
  explicit UnmappedLabelError(const std::string& raw)
      : Error("unmapped label \"" + raw + "\""), raw_label(raw) {}
  std::string raw_label;
};

class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_number(row) {}
  std::size_t row_number;
};

// A quality check could not run on this dataset (single class, no temporal
// info, ...). Reports downgrade these to NotApplicable instead of failing.
class CheckSkip : public Error {
 public:
  enum class Reason { NoText, NoTemporalInfo, SingleClass, NoAnnotations };

  CheckSkip(Reason r, const std::string& msg) : Error(msg), reason(r) {}
  Reason reason;
};

}  // namespace dqa
