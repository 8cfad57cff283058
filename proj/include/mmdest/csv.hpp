#pragma once

#include <string>
#include <vector>

#include "mmdest/mmd.hpp"

namespace mmdest {

/// Shortest decimal text that parses back to the same double ("inf", "-inf", "nan" otherwise).
/// Locale independent.
std::string format_number(double value);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(const std::string& text);

std::string csv_line(const std::vector<std::string>& fields);

/// Reads a numeric table, one observation per row. A first line that does not parse as
/// numbers is treated as a header and skipped. Rows must all have the same width.
Sample read_csv_sample(const std::string& path);

}  // namespace mmdest
