#pragma once

#include <charconv>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ovd/errors.hpp"

namespace ovd {

/// Flat view of a TOML-style file: `[section]` headers prefix the keys that
/// follow (`section.key`). Values keep their raw text with surrounding quotes
/// removed; lists keep their brackets.
///
///   preset = "unstable_paper"
///   [plan]
///   scheme = rk4
///   [diagnostics]
///   modes = [10, 20, 30]
using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

}  // namespace detail

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header" + where);
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError("empty section header" + where);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value" + where);
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key" + where);
    std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (out.contains(full)) throw ConfigError("duplicate key '" + full + "'" + where);
    out.emplace(std::move(full), detail::unquote(value));
  }
  return out;
}

inline double parse_double(std::string_view text, std::string_view what) {
  text = detail::trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("'" + std::string(what) + "': expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::size_t parse_count(std::string_view text, std::string_view what) {
  text = detail::trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("'" + std::string(what) + "': expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text, std::string_view what) {
  text = detail::trim(text);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("'" + std::string(what) + "': expected true or false");
}

/// Accepts `[1, 2, 3]` or `1,2,3`.
inline std::vector<std::string> split_list(std::string_view text) {
  text = detail::trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ConfigError("unterminated list '" + std::string(text) + "'");
    text = text.substr(1, text.size() - 2);
  }
  std::vector<std::string> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = detail::trim(text.substr(0, comma));
    if (!item.empty()) out.push_back(detail::unquote(item));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

inline std::vector<double> parse_double_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(item, what));
  return out;
}

inline std::vector<std::size_t> parse_count_list(std::string_view text, std::string_view what) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) out.push_back(parse_count(item, what));
  return out;
}

}  // namespace ovd
