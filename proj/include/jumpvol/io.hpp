#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jumpvol
{

// Shortest decimal that round-trips to the same double; "inf"/"-inf"/"nan"
// for non-finite values.
std::string format_double(double value);

// Parse a full-precision decimal; accepts "inf" and "-inf".
double parse_double(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace jumpvol
