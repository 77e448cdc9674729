#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vsl/errors.hpp"

namespace vsl::text {

/// Splits one CSV line on commas. Fields in this project never contain
/// commas or quotes, so no quoting is recognized.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

template <class Int>
Int parse_int(std::string_view s, const std::string& ctx) {
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ValidationError(ctx + ": expected integer, got '" + std::string(s) + "'");
  return v;
}

inline double parse_double(std::string_view s, const std::string& ctx) {
  // std::from_chars for double needs GCC 11+, which is the floor anyway.
  double v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ValidationError(ctx + ": expected number, got '" + std::string(s) + "'");
  return v;
}

inline bool parse_bool(std::string_view s, const std::string& ctx) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError(ctx + ": expected true|false, got '" + std::string(s) + "'");
}

/// Shortest round-trip representation, locale independent.
inline std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Fixed-point formatting with `digits` decimals, locale independent.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, p);
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading", path.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out) throw IoError("write failed", path.string());
}

}  // namespace vsl::text
