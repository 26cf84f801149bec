#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace phishcollect::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and line
/// breaks; CRLF and LF both end a record; a leading UTF-8 BOM is dropped.
/// Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string format_row(const Row& row);

}  // namespace phishcollect::csv
