#include <doctest.h>

#include <random>

#include "roundtable/corpus.hpp"
#include "roundtable/io.hpp"
#include "roundtable/text.hpp"
#include "support/scripted_model.hpp"
#include "support/test_env.hpp"

using namespace roundtable;
using roundtable::testing::TempDir;

namespace {

corpus::NewsArticle make_article(const std::string& id, const std::string& body) {
  corpus::NewsArticle article;
  article.id = id;
  article.title = "Title of " + id;
  article.body = body;
  article.source = "unit";
  return article;
}

corpus::Corpus random_corpus(std::mt19937& rng) {
  corpus::Corpus corpus;
  corpus.domain_set = corpus::default_domain_set();
  const int n_articles = 1 + static_cast<int>(rng() % 4);
  for (int a = 0; a < n_articles; ++a) {
    auto article = make_article("art-" + std::to_string(a), "");
    std::string body;
    const int n_segments = 1 + static_cast<int>(rng() % 4);
    for (int s = 0; s < n_segments; ++s) {
      const std::size_t start = body.size();
      body += "Paragraph " + std::to_string(s) + " with filler text number " +
              std::to_string(rng() % 100) + ".";
      corpus::Segment segment;
      segment.domain_label = corpus.domain_set[rng() % corpus.domain_set.size()];
      segment.char_start = start;
      segment.char_end = body.size();
      article.segments.push_back(segment);
      if (s + 1 < n_segments) body += "\n\n";
    }
    article.body = body;
    for (auto& seg : article.segments) {
      seg.text = body.substr(seg.char_start, seg.char_end - seg.char_start);
    }
    if (rng() % 2 == 0) article.published_at = "2025-01-0" + std::to_string(1 + rng() % 9);
    corpus.articles.push_back(std::move(article));
  }
  return corpus;
}

}  // namespace

TEST_CASE("load_corpus on an empty file yields no articles and default domains") {
  TempDir tmp;
  io::write_file_atomic(tmp.path() / "empty.jsonl", "");
  const auto corpus = corpus::load_corpus(tmp.path() / "empty.jsonl");
  CHECK(corpus.articles.empty());
  CHECK(corpus.domain_set == corpus::default_domain_set());
}

TEST_CASE("save then load round-trips and re-serializes byte-identically") {
  TempDir tmp;
  std::mt19937 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const auto corpus = random_corpus(rng);
    const auto first = tmp.path() / "first.jsonl";
    const auto second = tmp.path() / "second.jsonl";
    corpus::save_corpus(corpus, first);
    const auto reloaded = corpus::load_corpus(first);
    REQUIRE(reloaded.articles.size() == corpus.articles.size());
    for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
      const auto& a = corpus.articles[i];
      const auto& b = reloaded.articles[i];
      CHECK(a.id == b.id);
      CHECK(a.title == b.title);
      CHECK(a.body == b.body);
      CHECK(a.source == b.source);
      CHECK(a.published_at == b.published_at);
      REQUIRE(a.segments.size() == b.segments.size());
      for (std::size_t s = 0; s < a.segments.size(); ++s) {
        CHECK(a.segments[s].domain_label == b.segments[s].domain_label);
        CHECK(a.segments[s].char_start == b.segments[s].char_start);
        CHECK(a.segments[s].char_end == b.segments[s].char_end);
        CHECK(b.segments[s].text ==
              b.body.substr(b.segments[s].char_start,
                            b.segments[s].char_end - b.segments[s].char_start));
      }
    }
    corpus::save_corpus(reloaded, second);
    CHECK(io::read_file(first) == io::read_file(second));
  }
}

TEST_CASE("load_corpus reports malformed lines with their number") {
  TempDir tmp;
  io::write_file_atomic(tmp.path() / "bad.jsonl", "{\"id\": \"a\"\nnot json\n");
  try {
    corpus::load_corpus(tmp.path() / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("validation rejects inverted ranges naming the article") {
  auto article = make_article("bad-range", "0123456789");
  article.segments.push_back({"Finance", 5, 4, ""});
  try {
    corpus::validate_article(article, corpus::default_domain_set());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("bad-range") != std::string::npos);
    CHECK(what.find("inverted") != std::string::npos);
  }
}

TEST_CASE("validation rejects overlaps, bad labels, out-of-bounds, duplicates") {
  corpus::Corpus corpus;
  corpus.domain_set = corpus::default_domain_set();

  auto overlapping = make_article("overlap", "abcdefghij");
  overlapping.segments.push_back({"Finance", 0, 6, ""});
  overlapping.segments.push_back({"Law", 4, 9, ""});
  CHECK_THROWS_AS(corpus::validate_article(overlapping, corpus.domain_set), ValidationError);

  auto labeled = make_article("label", "abcdefghij");
  labeled.segments.push_back({"Sports", 0, 4, ""});
  CHECK_THROWS_AS(corpus::validate_article(labeled, corpus.domain_set), ValidationError);

  auto bounds = make_article("bounds", "abc");
  bounds.segments.push_back({"Finance", 0, 9, ""});
  CHECK_THROWS_AS(corpus::validate_article(bounds, corpus.domain_set), ValidationError);

  corpus.articles.push_back(make_article("dup", "abc"));
  corpus.articles.push_back(make_article("dup", "def"));
  CHECK_THROWS_AS(corpus::validate_corpus(corpus), ValidationError);
}

TEST_CASE("save_corpus rejects invalid corpora before writing") {
  TempDir tmp;
  corpus::Corpus corpus;
  corpus.domain_set = corpus::default_domain_set();
  corpus.articles.push_back(make_article("dup", "abc"));
  corpus.articles.push_back(make_article("dup", "def"));
  const auto path = tmp.path() / "never.jsonl";
  CHECK_THROWS_AS(corpus::save_corpus(corpus, path), ValidationError);
  CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("segment_article returns pre-segmented articles unchanged") {
  TempDir tmp;
  auto provider = testing::make_recording_provider(tmp.path() / "fx");
  auto article = make_article("pre", "Some body text.");
  article.segments.push_back({"Finance", 0, 4, "Some"});
  const auto out = corpus::segment_article(article, corpus::default_domain_set(), provider);
  CHECK(out.segments.size() == 1);
  CHECK(out.segments[0].domain_label == "Finance");
}

TEST_CASE("segment_article labels paragraphs and merges adjacent same labels") {
  TempDir tmp;
  auto provider = testing::make_recording_provider(tmp.path() / "fx");

  // Keyword-routed labels: Finance, Law, Agriculture, Technology in order.
  auto article = make_article(
      "four-part",
      "Markets and futures moved as traders repriced revenue.\n\n"
      "The statute directs regulators to issue compliance rules.\n\n"
      "Farmers plan crop rotation around the harvest.\n\n"
      "Sensor networks and routing software track shipments.");
  const auto out = corpus::segment_article(article, corpus::default_domain_set(), provider);
  REQUIRE(out.segments.size() == 4);
  CHECK(out.segments[0].domain_label == "Finance");
  CHECK(out.segments[1].domain_label == "Law");
  CHECK(out.segments[2].domain_label == "Agriculture");
  CHECK(out.segments[3].domain_label == "Technology");
  for (const auto& seg : out.segments) {
    CHECK(seg.text == out.body.substr(seg.char_start, seg.char_end - seg.char_start));
  }

  // Two adjacent Finance paragraphs merge into one span.
  auto merged = make_article("merge",
                             "Markets rallied and futures climbed for traders.\n\n"
                             "Investors added capital as revenue forecasts rose.\n\n"
                             "The court ruling binds regulators to the statute.");
  const auto merged_out =
      corpus::segment_article(merged, corpus::default_domain_set(), provider);
  REQUIRE(merged_out.segments.size() == 2);
  CHECK(merged_out.segments[0].domain_label == "Finance");
  CHECK(merged_out.segments[0].char_start == 0);
  CHECK(merged_out.segments[1].domain_label == "Law");
  // The merged span covers both paragraphs including the separator.
  CHECK(merged_out.segments[0].text.find("Investors added capital") != std::string::npos);
}

TEST_CASE("segment_article is deterministic under replay") {
  TempDir tmp;
  auto article = make_article("det",
                              "Markets and futures moved as traders repriced revenue.\n\n"
                              "Farmers plan crop rotation around the harvest.");
  {
    auto recorder = testing::make_recording_provider(tmp.path() / "fx");
    corpus::segment_article(article, corpus::default_domain_set(), recorder);
  }
  auto replay_a = testing::make_replay_provider(tmp.path() / "fx");
  auto replay_b = testing::make_replay_provider(tmp.path() / "fx");
  const auto a = corpus::segment_article(article, corpus::default_domain_set(), replay_a);
  const auto b = corpus::segment_article(article, corpus::default_domain_set(), replay_b);
  REQUIRE(a.segments.size() == b.segments.size());
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    CHECK(a.segments[i].domain_label == b.segments[i].domain_label);
    CHECK(a.segments[i].char_start == b.segments[i].char_start);
    CHECK(a.segments[i].char_end == b.segments[i].char_end);
  }
}

TEST_CASE("segmentation covers every non-whitespace paragraph exactly once") {
  TempDir tmp;
  auto provider = testing::make_recording_provider(tmp.path() / "fx");
  auto article = make_article("cover",
                              "Markets rallied for traders.\n\n"
                              "The statute binds regulators.\n\n"
                              "Sensor software platforms expanded.");
  const auto out = corpus::segment_article(article, corpus::default_domain_set(), provider);
  const auto paragraphs = text::paragraph_spans(out.body);
  for (const auto& [start, end] : paragraphs) {
    int covering = 0;
    for (const auto& seg : out.segments) {
      if (seg.char_start <= start && end <= seg.char_end) ++covering;
    }
    CHECK(covering == 1);
  }
}
