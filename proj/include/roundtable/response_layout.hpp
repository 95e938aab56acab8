#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace roundtable::layout {

/// One recognized block of a sectioned model response: "HEADER:" or
/// "HEADER <arg>:" at the start of a line, followed by body lines up to the
/// next recognized header.
struct Block {
  std::string header;  // keyword as matched, e.g. "SEGMENT"
  std::string arg;     // text between keyword and ':', trimmed; may be empty
  std::string body;    // trimmed body text
};

/// Tolerant scan: prose before the first recognized header is ignored, and
/// unrecognized lines stay part of the current block's body. Keywords are
/// matched longest-first so "CLARIFICATIONS GIVEN" wins over
/// "CLARIFICATIONS".
std::vector<Block> parse_blocks(std::string_view response,
                                const std::vector<std::string>& keywords);

/// Bullet items of a block body: lines starting with "-" or "*". Returns the
/// trimmed item texts; non-bullet lines between items are appended to the
/// preceding item.
std::vector<std::string> parse_bullets(std::string_view body);

/// Splits "@target: rest" bullets. Returns false when the item does not
/// start with '@' or has no ':'.
bool split_at_prefix(std::string_view item, std::string& target, std::string& rest);

}  // namespace roundtable::layout
