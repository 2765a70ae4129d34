#include "pnnsr/text_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pnnsr/error.hpp"

namespace pnnsr {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view token, std::string_view what) {
  double v = 0.0;
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, v);
  if (token.empty() || res.ec != std::errc() || res.ptr != end) {
    throw FormatError("invalid " + std::string(what) + " \"" + std::string(token) + "\"");
  }
  return v;
}

long long parse_integer(std::string_view token, std::string_view what) {
  long long v = 0;
  const char* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, v);
  if (token.empty() || res.ec != std::errc() || res.ptr != end) {
    throw FormatError("invalid " + std::string(what) + " \"" + std::string(token) + "\"");
  }
  return v;
}

std::map<std::string, std::string> parse_key_values(std::string_view line) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(line)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw FormatError("expected key=value, got \"" + token + "\"");
    }
    if (!out.emplace(token.substr(0, eq), token.substr(eq + 1)).second) {
      throw FormatError("repeated key \"" + token.substr(0, eq) + "\"");
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace pnnsr
