#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace pnnsr {

/// Shortest decimal that reads back to the same double.
std::string format_real(double v);

/// Strict decimal parse of a whole token; throws FormatError naming `what`.
double parse_real(std::string_view token, std::string_view what);
long long parse_integer(std::string_view token, std::string_view what);

/// Splits "k1=v1 k2=v2 ..." into a map; throws FormatError on a token
/// without '=' or a repeated key.
std::map<std::string, std::string> parse_key_values(std::string_view line);

/// Reads a whole text file; throws pnnsr::Error if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace pnnsr
