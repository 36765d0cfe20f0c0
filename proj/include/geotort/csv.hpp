#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace geotort {

/// Nine significant digits; infinities as "inf" / "-inf".
std::string format_number(double value);

std::vector<std::string> split(std::string_view text, char sep);

/// Parses "a,b,c" into doubles; throws std::invalid_argument on bad input.
std::vector<double> parse_number_list(std::string_view text);

}  // namespace geotort
