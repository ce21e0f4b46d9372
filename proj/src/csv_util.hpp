#pragma once

#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qtwist/error.hpp"

namespace qtwist::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string where(const std::string& source, std::size_t line) {
  std::ostringstream os;
  os << source << ":" << line;
  return os.str();
}

template <class Int>
Int parse_int(std::string_view s, const std::string& source, std::size_t line, const char* field) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DataError(where(source, line) + ": field '" + field + "' is not an integer: '" + std::string(s) + "'");
  return v;
}

inline double parse_double(std::string_view s, const std::string& source, std::size_t line, const char* field) {
  const std::string str(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (str.empty() || used != str.size())
    throw DataError(where(source, line) + ": field '" + field + "' is not a number: '" + str + "'");
  return v;
}

}  // namespace qtwist::detail
