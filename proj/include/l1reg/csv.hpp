#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace l1reg::csv {

/// Floats are written with 17 significant digits.
std::string format_double(double v);

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }
inline std::string cell(std::string_view v) { return std::string(v); }
inline std::string cell(const char* v) { return std::string(v); }

/// Comma-separated rows with a header line; fields are not quoted, so callers
/// must not pass text containing commas or newlines.
class Writer {
 public:
  Writer(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace l1reg::csv
