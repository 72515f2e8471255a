#include "l1reg/csv.hpp"

#include <fmt/format.h>

#include "l1reg/errors.hpp"

namespace l1reg::csv {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

Writer::Writer(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
  row(header);
}

void Writer::row(const std::vector<std::string>& cells) {
  require(cells.size() == columns_, "csv: row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace l1reg::csv
