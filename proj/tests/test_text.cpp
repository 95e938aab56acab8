#include <doctest.h>

#include "roundtable/text.hpp"

using namespace roundtable;

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(text::tokenize("The cat, sat!") == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(text::tokenize("") == std::vector<std::string>{});
  CHECK(text::tokenize("...") == std::vector<std::string>{});
  CHECK(text::tokenize("a-b c_d") == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("normalize_question collapses whitespace and strips terminal punctuation") {
  CHECK(text::normalize_question("  What   is\tthis?? ") == "what is this");
  CHECK(text::normalize_question("Already plain") == "already plain");
  CHECK(text::normalize_question("Ends with period.") == "ends with period");
}

TEST_CASE("paragraph_spans splits on blank lines and skips whitespace blocks") {
  const std::string body = "First para.\n\nSecond\nstill second.\n\n   \n\nThird.";
  const auto spans = text::paragraph_spans(body);
  REQUIRE(spans.size() == 3);
  CHECK(body.substr(spans[0].first, spans[0].second - spans[0].first) == "First para.");
  CHECK(body.substr(spans[1].first, spans[1].second - spans[1].first) ==
        "Second\nstill second.");
  CHECK(body.substr(spans[2].first, spans[2].second - spans[2].first) == "Third.");
}

TEST_CASE("paragraph_spans handles single block and empty input") {
  CHECK(text::paragraph_spans("").empty());
  CHECK(text::paragraph_spans("  \n \n").empty());
  const auto spans = text::paragraph_spans("only one");
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == std::pair<std::size_t, std::size_t>{0, 8});
}

TEST_CASE("format_fixed is fixed-point with ties-to-even on representable halves") {
  CHECK(text::format_fixed(0.70710678, 4) == "0.7071");
  CHECK(text::format_fixed(0.25, 1) == "0.2");   // exact binary tie, rounds to even
  CHECK(text::format_fixed(0.75, 1) == "0.8");
  CHECK(text::format_fixed(2.5, 0) == "2");
  CHECK(text::format_fixed(1.5, 0) == "2");
  CHECK(text::format_fixed(-0.70716, 4) == "-0.7072");
  CHECK(text::format_fixed(3.0, 2) == "3.00");
}

TEST_CASE("csv_field quotes only when needed") {
  CHECK(text::csv_field("plain") == "plain");
  CHECK(text::csv_field("a,b") == "\"a,b\"");
  CHECK(text::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(text::csv_field("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("is_iso_date accepts dates and rejects junk") {
  CHECK(text::is_iso_date("2025-03-14"));
  CHECK(text::is_iso_date("2025-03-14T09:00:00Z"));
  CHECK_FALSE(text::is_iso_date("14-03-2025"));
  CHECK_FALSE(text::is_iso_date("2025-13-01"));
  CHECK_FALSE(text::is_iso_date("2025-00-10"));
  CHECK_FALSE(text::is_iso_date("not a date"));
}
