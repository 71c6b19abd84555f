#ifndef BIODIFF_CORE_TEXT_HPP
#define BIODIFF_CORE_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace biodiff {

/// Shortest round-trip decimal form of a double (std::to_chars).
/// Used for every number we write to disk so that output files are
/// byte-reproducible and re-parse to the identical bit pattern.
std::string format_double(double value);

std::string format_int(std::int64_t value);

/// Strict full-token parses; throw std::invalid_argument naming `what`
/// when the token is empty, malformed, or has trailing junk.
double parse_double(std::string_view token, std::string_view what);
std::int64_t parse_int(std::string_view token, std::string_view what);

std::vector<std::string> split_csv_line(std::string_view line);

std::string trim(std::string_view s);

} // namespace biodiff

#endif
