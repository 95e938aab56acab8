#include <doctest.h>

#include <algorithm>

#include "roundtable/supplement.hpp"
#include "roundtable/text.hpp"
#include "support/scripted_model.hpp"
#include "support/test_env.hpp"

using namespace roundtable;
using roundtable::testing::TempDir;

namespace {

const std::vector<std::string>& domains() {
  static const auto d = corpus::default_domain_set();
  return d;
}

struct Pipeline {
  Pipeline()
      : corpus_data(testing::load_fixture_corpus()),
        provider(testing::make_recording_provider(store.path() / "fx")) {
    for (auto& profile : testing::load_fixture_profiles(domains())) {
      profile.store = memory::embed_store(profile.store, provider);
      agents.push_back(std::move(profile));
    }
    article = corpus::segment_article(corpus_data.articles[0], domains(), provider);
    options.domain_set = domains();
    transcript = discussion::run_discussion(agents, article, 2, provider, options);
    gaps = discussion::extract_gaps(transcript);
  }

  TempDir store;
  corpus::Corpus corpus_data;
  llm::Provider provider;
  std::vector<memory::AgentProfile> agents;
  corpus::NewsArticle article;
  discussion::EngineOptions options;
  discussion::DiscussionTranscript transcript;
  std::vector<discussion::Gap> gaps;
};

std::vector<discussion::Gap> make_gaps(const std::vector<std::string>& questions, bool resolved) {
  std::vector<discussion::Gap> gaps;
  for (const auto& q : questions) {
    discussion::Gap gap;
    gap.from_agent = "finance";
    gap.asked_of_domain = "Law";
    gap.question = q;
    gap.normalized = text::normalize_question(q);
    gap.resolved = resolved;
    gaps.push_back(gap);
  }
  return gaps;
}

}  // namespace

TEST_CASE("parse_supplement_sections splits sections and matches gap lines") {
  const auto gaps = make_gaps({"What is a permit?"}, false);
  const std::string content =
      "SECTION Overview:\nGeneral context.\n\n"
      "SECTION Permits explained:\nGAP: What is a permit?\nA permit is a legal authorization.\n";
  const auto sections = supplement::parse_supplement_sections(content, gaps);
  REQUIRE(sections.size() == 2);
  CHECK(sections[0].heading == "Overview");
  CHECK_FALSE(sections[0].gap_question.has_value());
  CHECK(sections[1].heading == "Permits explained");
  REQUIRE(sections[1].gap_question.has_value());
  CHECK(*sections[1].gap_question == "What is a permit?");
  CHECK(sections[1].body == "A permit is a legal authorization.");
}

TEST_CASE("parse_supplement_sections rejects unknown gaps and missing sections") {
  CHECK_THROWS_AS(supplement::parse_supplement_sections(
                      "SECTION A:\nGAP: Never asked?\ntext\n", make_gaps({"Other?"}, false)),
                  ParseError);
  CHECK_THROWS_AS(supplement::parse_supplement_sections("prose with no sections", {}),
                  ParseError);
  CHECK_THROWS_AS(supplement::parse_supplement_sections("", {}), ParseError);
}

TEST_CASE("discussion supplement covers every unresolved gap with provenance") {
  Pipeline p;
  const auto material = supplement::generate_discussion_supplement(p.transcript, p.gaps,
                                                                   p.article, p.provider);
  CHECK(material.kind == supplement::Kind::discussion);
  CHECK(material.article_id == p.article.id);
  CHECK_FALSE(material.full_text.empty());

  int gap_sections = 0;
  for (const auto& section : material.sections) {
    if (!section.gap_question) continue;
    ++gap_sections;
    const std::string norm = text::normalize_question(*section.gap_question);
    const bool known = std::any_of(p.gaps.begin(), p.gaps.end(), [&](const discussion::Gap& g) {
      return g.normalized == norm;
    });
    CHECK(known);
  }
  CHECK(gap_sections > 0);
  for (const auto& gap : p.gaps) {
    if (gap.resolved) continue;
    const bool covered = std::any_of(
        material.sections.begin(), material.sections.end(), [&](const supplement::Section& s) {
          return s.gap_question &&
                 text::normalize_question(*s.gap_question) == gap.normalized;
        });
    CHECK(covered);
  }
}

TEST_CASE("discussion supplement requires a complete transcript") {
  Pipeline p;
  auto truncated = p.transcript;
  truncated.rounds.pop_back();
  CHECK_THROWS_AS(supplement::generate_discussion_supplement(truncated, p.gaps, p.article,
                                                             p.provider),
                  ValidationError);
}

TEST_CASE("per-gap mode produces one gap section per call") {
  Pipeline p;
  supplement::GeneratorOptions options;
  options.per_gap = true;
  const int before = static_cast<int>(p.provider.request_log().size());
  const auto material = supplement::generate_discussion_supplement(p.transcript, p.gaps,
                                                                   p.article, p.provider, options);
  const int calls = static_cast<int>(p.provider.request_log().size()) - before;
  CHECK(calls == static_cast<int>(p.gaps.size()));
  for (const auto& gap : p.gaps) {
    if (gap.resolved) continue;
    const bool covered = std::any_of(
        material.sections.begin(), material.sections.end(), [&](const supplement::Section& s) {
          return s.gap_question &&
                 text::normalize_question(*s.gap_question) == gap.normalized;
        });
    CHECK(covered);
  }
}

TEST_CASE("vanilla supplement has sections and no gap references") {
  Pipeline p;
  const auto material = supplement::generate_vanilla_supplement(p.article, p.provider);
  CHECK(material.kind == supplement::Kind::vanilla);
  REQUIRE(material.sections.size() == 3);
  for (const auto& section : material.sections) {
    CHECK_FALSE(section.gap_question.has_value());
  }

  corpus::NewsArticle empty;
  empty.id = "empty";
  CHECK_THROWS_AS(supplement::generate_vanilla_supplement(empty, p.provider), ValidationError);
}

TEST_CASE("vanilla supplement prompt excludes transcript content") {
  Pipeline p;
  p.provider.clear_request_log();
  supplement::generate_vanilla_supplement(p.article, p.provider);
  const auto log = p.provider.request_log();
  REQUIRE(log.size() == 1);
  CHECK(log[0].tag == "vanilla_supplement:" + p.article.id);
  // Nothing from the discussion: no summaries, no gaps, no utterances.
  CHECK(log[0].payload.find("Round summaries") == std::string::npos);
  CHECK(log[0].payload.find("KEY POINTS") == std::string::npos);
  CHECK(log[0].payload.find("Comprehension gaps") == std::string::npos);
  for (const auto& gap : p.gaps) {
    CHECK(log[0].payload.find(gap.question) == std::string::npos);
  }
}

TEST_CASE("two replay runs produce identical supplements") {
  Pipeline p;
  supplement::generate_vanilla_supplement(p.article, p.provider);
  auto replay_a = testing::make_replay_provider(p.store.path() / "fx");
  auto replay_b = testing::make_replay_provider(p.store.path() / "fx");
  const auto a = supplement::generate_vanilla_supplement(p.article, replay_a);
  const auto b = supplement::generate_vanilla_supplement(p.article, replay_b);
  CHECK(supplement::supplement_to_json(a).dump() == supplement::supplement_to_json(b).dump());
}

TEST_CASE("supplement serialization round-trips") {
  Pipeline p;
  const auto material = supplement::generate_discussion_supplement(p.transcript, p.gaps,
                                                                   p.article, p.provider);
  const auto doc = supplement::supplement_to_json(material);
  const auto back = supplement::supplement_from_json(doc);
  CHECK(supplement::supplement_to_json(back).dump() == doc.dump());
}

TEST_CASE("zero-gap transcripts still yield a supplement") {
  Pipeline p;
  const auto material = supplement::generate_discussion_supplement(p.transcript, {}, p.article,
                                                                   p.provider);
  CHECK(material.kind == supplement::Kind::discussion);
  CHECK_FALSE(material.sections.empty());
  for (const auto& section : material.sections) {
    CHECK_FALSE(section.gap_question.has_value());
  }
}
