#include "roundtable/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace roundtable::text {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string normalize_question(std::string_view s) {
  std::string out = collapse_whitespace(lower_ascii(s));
  while (!out.empty() && (out.back() == '.' || out.back() == '?' || out.back() == '!')) {
    out.pop_back();
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(s.substr(start));
      break;
    }
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

std::vector<std::pair<std::size_t, std::size_t>> paragraph_spans(std::string_view body) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  const std::size_t n = body.size();
  while (i < n) {
    // Skip leading whitespace (including blank lines) to the next block.
    while (i < n && is_space(static_cast<unsigned char>(body[i]))) ++i;
    if (i >= n) break;
    std::size_t start = i;
    std::size_t end = i;
    // A block ends at a line break followed by a blank line, or at EOF.
    while (i < n) {
      std::size_t nl = body.find('\n', i);
      if (nl == std::string_view::npos) {
        i = n;
        end = n;
        break;
      }
      // Peek past the newline: blank line (only spaces up to next '\n' or EOF)?
      std::size_t j = nl + 1;
      while (j < n && (body[j] == ' ' || body[j] == '\t' || body[j] == '\r')) ++j;
      if (j >= n || body[j] == '\n') {
        end = nl;
        i = j;
        break;
      }
      i = nl + 1;
      end = i;
    }
    // Trim trailing whitespace inside the block.
    while (end > start && is_space(static_cast<unsigned char>(body[end - 1]))) --end;
    if (end > start) spans.emplace_back(start, end);
  }
  return spans;
}

std::string format_fixed(double value, int precision) {
  if (precision < 0) throw std::invalid_argument("format_fixed: negative precision");
  if (!std::isfinite(value)) return value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
  if (res.ec != std::errc{}) throw std::runtime_error("format_fixed: conversion failed");
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  const bool needs_quote = s.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quote) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool is_iso_date(std::string_view s) {
  // YYYY-MM-DD, optionally followed by a time suffix which is ignored here.
  if (s.size() < 10) return false;
  auto digit = [&](std::size_t i) { return s[i] >= '0' && s[i] <= '9'; };
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!digit(i)) return false;
  }
  if (s[4] != '-' || s[7] != '-') return false;
  int month = (s[5] - '0') * 10 + (s[6] - '0');
  int day = (s[8] - '0') * 10 + (s[9] - '0');
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return false;
  return true;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace roundtable::text
