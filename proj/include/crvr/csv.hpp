#pragma once

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "crvr/errors.hpp"

// Minimal comma-separated reader/writer helpers for the simulator's flat files.
// No quoting: every field in these schemas is numeric or a bare token.
namespace crvr::csv {

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class Reader {
public:
  Reader(std::istream& in, std::vector<std::string> header) : in_(in), width_(header.size()) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("missing header", 1);
    line_ = 1;
    strip(line);
    if (split(line) != header) {
      std::string expected;
      for (std::size_t k = 0; k < header.size(); ++k) expected += (k ? "," : "") + header[k];
      throw ParseError("expected header '" + expected + "'", 1);
    }
  }

  /// Reads the next non-blank row. Returns false at end of input.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      strip(line);
      if (line.empty()) continue;
      fields = split(line);
      if (fields.size() != width_) {
        throw ParseError("expected " + std::to_string(width_) + " fields, got " + std::to_string(fields.size()), line_);
      }
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_; }

private:
  static void strip(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }

  std::istream& in_;
  std::size_t width_;
  std::size_t line_ = 0;
};

inline long long parse_int(const std::string& field, std::size_t line) {
  long long value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) throw ParseError("not an integer: '" + field + "'", line);
  return value;
}

inline double parse_double(const std::string& field, std::size_t line) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) throw ParseError("not a number: '" + field + "'", line);
  return value;
}

/// Shortest-enough text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

}  // namespace crvr::csv
