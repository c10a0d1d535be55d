#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace latentad::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Splits one RFC-4180 style record. Quoted fields may contain commas and
// doubled quotes; embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

// Reads a header plus rows. Blank lines and lines starting with '#' are
// skipped. Throws InvalidInput if the file cannot be opened or a row has the
// wrong number of fields.
Table read(const std::string& path);

// Strict numeric parse of a whole cell (surrounding blanks allowed).
// Accepts "inf"/"-inf"/"nan" as strtod does; returns nullopt for anything
// else that is not a number, including the empty string.
std::optional<double> parse_double(std::string_view cell);

// %.17g, the shortest width that round-trips every double.
std::string format_double(double v);

}  // namespace latentad::csv
