#include "roundtable/response_layout.hpp"

#include <algorithm>

#include "roundtable/text.hpp"

namespace roundtable::layout {

namespace {

// Returns the keyword matched at the start of `line`, or empty. A header
// line is "<KEYWORD>:" or "<KEYWORD> <arg>:".
std::string_view match_keyword(std::string_view line, const std::vector<std::string>& keywords) {
  for (const auto& kw : keywords) {
    if (line.size() <= kw.size()) continue;
    if (line.compare(0, kw.size(), kw) != 0) continue;
    const char next = line[kw.size()];
    if (next != ':' && next != ' ') continue;
    // Require a ':' somewhere on the line past the keyword.
    if (line.find(':', kw.size()) == std::string_view::npos) continue;
    return std::string_view(kw);
  }
  return {};
}

}  // namespace

std::vector<Block> parse_blocks(std::string_view response,
                                const std::vector<std::string>& keywords) {
  // Longest keyword first so overlapping keywords resolve deterministically.
  std::vector<std::string> ordered = keywords;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::vector<Block> blocks;
  std::string body;
  bool in_block = false;
  auto flush = [&] {
    if (in_block) {
      blocks.back().body = text::trim(body);
      body.clear();
    }
  };

  for (const auto& raw : text::split_lines(response)) {
    const std::string line = text::trim(raw);
    const std::string_view kw = match_keyword(line, ordered);
    if (!kw.empty()) {
      flush();
      Block block;
      block.header = std::string(kw);
      const std::size_t colon = line.find(':', kw.size());
      block.arg = text::trim(std::string_view(line).substr(kw.size(), colon - kw.size()));
      blocks.push_back(std::move(block));
      in_block = true;
      // Text after the ':' on the header line belongs to the body.
      std::string tail = text::trim(std::string_view(line).substr(colon + 1));
      if (!tail.empty()) {
        body = std::move(tail);
        body.push_back('\n');
      }
      continue;
    }
    if (in_block) {
      body += raw;
      body.push_back('\n');
    }
    // Prose before the first header is ignored.
  }
  flush();
  return blocks;
}

std::vector<std::string> parse_bullets(std::string_view body) {
  std::vector<std::string> items;
  for (const auto& raw : text::split_lines(body)) {
    const std::string line = text::trim(raw);
    if (line.empty()) continue;
    if (line[0] == '-' || line[0] == '*') {
      items.push_back(text::trim(std::string_view(line).substr(1)));
    } else if (!items.empty()) {
      items.back() += " " + line;  // continuation of the previous item
    }
  }
  return items;
}

bool split_at_prefix(std::string_view item, std::string& target, std::string& rest) {
  std::string_view s = item;
  if (s.empty() || s[0] != '@') return false;
  const std::size_t colon = s.find(':');
  if (colon == std::string_view::npos) return false;
  target = text::trim(s.substr(1, colon - 1));
  rest = text::trim(s.substr(colon + 1));
  return !target.empty();
}

}  // namespace roundtable::layout
