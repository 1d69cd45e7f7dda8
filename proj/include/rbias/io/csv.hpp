#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rbias::csv {

using Row = std::vector<std::string>;

// Splits RFC-4180 style text into rows. Lines starting with '#' outside a
// quoted field are comments and are skipped, as are blank lines.
std::vector<Row> parse(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Quotes a field when it contains a separator, quote, or newline.
std::string escape(std::string_view field);
std::string join(const Row& row);

// Shortest text that parses back to the same double at 17 significant digits;
// +inf is written as "inf".
std::string format_double(double value);
// Accepts "inf"/"+inf"/"Infinity". Returns false on anything non-numeric.
bool parse_double(std::string_view text, double& out);

}  // namespace rbias::csv
