#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace roundtable::text {

std::string lower_ascii(std::string_view s);
std::string trim(std::string_view s);

/// Collapses every run of whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Canonical form used to deduplicate questions: lowercase, collapsed
/// whitespace, terminal .?! stripped.
std::string normalize_question(std::string_view s);

/// Metric tokenization: lowercase, punctuation stripped, whitespace split.
std::vector<std::string> tokenize(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

/// Byte ranges of paragraphs (blocks separated by blank lines). Ranges never
/// include the separating blank lines; whitespace-only blocks are skipped.
std::vector<std::pair<std::size_t, std::size_t>> paragraph_spans(std::string_view body);

/// Fixed-point decimal formatting via std::to_chars: locale-independent,
/// correctly rounded (ties to even on the binary value).
std::string format_fixed(double value, int precision);

/// RFC-4180: quote when the field contains comma, quote, or newline.
std::string csv_field(std::string_view s);

bool is_iso_date(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace roundtable::text
