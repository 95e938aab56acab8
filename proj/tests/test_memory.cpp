#include <doctest.h>

#include <algorithm>
#include <random>

#include "roundtable/agent_memory.hpp"
#include "roundtable/io.hpp"
#include "roundtable/metrics.hpp"
#include "support/scripted_model.hpp"
#include "support/test_env.hpp"

using namespace roundtable;
using roundtable::testing::TempDir;

namespace {

memory::SemanticEntry sem(const std::string& term, std::vector<double> v) {
  memory::SemanticEntry e;
  e.term = term;
  e.definition = "definition of " + term;
  e.embedding = std::move(v);
  return e;
}

memory::EpisodicEntry epi(const std::string& id, const std::string& date, std::vector<double> v) {
  memory::EpisodicEntry e;
  e.article_id = id;
  e.occurred_at = date;
  e.summary = "summary of " + id;
  e.embedding = std::move(v);
  return e;
}

}  // namespace

TEST_CASE("retrieve_semantic on an empty store returns nothing") {
  memory::MemoryStore store;
  CHECK(memory::retrieve_semantic(store, {1.0, 0.0}, 5).empty());
  CHECK_THROWS_AS(memory::retrieve_semantic(store, {1.0}, 0), ValidationError);
}

TEST_CASE("retrieve_semantic finds the exact match with score one") {
  memory::MemoryStore store;
  store.semantic.push_back(sem("exact", {0.6, 0.8}));
  store.embedding_dim = 2;
  const auto out = memory::retrieve_semantic(store, {0.6, 0.8}, 5);
  REQUIRE(out.size() == 1);
  CHECK(out[0].term == "exact");
  CHECK(eval::cosine_similarity(*out[0].embedding, std::vector<double>{0.6, 0.8}) ==
        doctest::Approx(1.0));
}

TEST_CASE("retrieval matches a brute-force cosine sort and is prefix-monotone") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    memory::MemoryStore store;
    store.embedding_dim = 6;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> v(6);
      for (auto& x : v) x = value(rng);
      v[0] += 1.5;
      store.semantic.push_back(sem("term-" + std::to_string(i), v));
    }
    std::vector<double> query(6);
    for (auto& x : query) x = value(rng);
    query[0] += 1.5;

    // Oracle: full sort by (cosine desc, term asc, index asc).
    std::vector<std::size_t> order(store.semantic.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ca = eval::cosine_similarity(*store.semantic[a].embedding, query);
      const double cb = eval::cosine_similarity(*store.semantic[b].embedding, query);
      if (ca != cb) return ca > cb;
      return store.semantic[a].term < store.semantic[b].term;
    });

    const auto top3 = memory::retrieve_semantic(store, query, 3);
    REQUIRE(top3.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(top3[i].term == store.semantic[order[i]].term);

    const auto top4 = memory::retrieve_semantic(store, query, 4);
    for (int i = 0; i < 3; ++i) CHECK(top4[i].term == top3[i].term);  // prefix property
  }
}

TEST_CASE("episodic ties break by recency then article id") {
  memory::MemoryStore store;
  store.embedding_dim = 2;
  store.episodic.push_back(epi("older", "2024-01-01", {1.0, 0.0}));
  store.episodic.push_back(epi("newer", "2025-01-01", {1.0, 0.0}));
  store.episodic.push_back(epi("alpha", "2025-01-01", {1.0, 0.0}));
  const auto out = memory::retrieve_episodic(store, {1.0, 0.0}, 3);
  REQUIRE(out.size() == 3);
  CHECK(out[0].article_id == "alpha");  // same date as newer, id ties ascending
  CHECK(out[1].article_id == "newer");
  CHECK(out[2].article_id == "older");
}

TEST_CASE("episodic retrieval matches brute force on random stores") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  memory::MemoryStore store;
  store.embedding_dim = 4;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> v(4);
    for (auto& x : v) x = value(rng);
    v[0] += 1.2;
    store.episodic.push_back(
        epi("id-" + std::to_string(i), "2024-0" + std::to_string(1 + i % 9) + "-11", v));
  }
  std::vector<double> query{0.4, 0.1, -0.2, 0.9};

  std::vector<std::size_t> order(store.episodic.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ca = eval::cosine_similarity(*store.episodic[a].embedding, query);
    const double cb = eval::cosine_similarity(*store.episodic[b].embedding, query);
    if (ca != cb) return ca > cb;
    if (store.episodic[a].occurred_at != store.episodic[b].occurred_at) {
      return store.episodic[a].occurred_at > store.episodic[b].occurred_at;
    }
    return store.episodic[a].article_id < store.episodic[b].article_id;
  });
  const auto top4 = memory::retrieve_episodic(store, query, 4);
  REQUIRE(top4.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(top4[i].article_id == store.episodic[order[i]].article_id);
}

TEST_CASE("retrieval rejects dimension mismatches and un-embedded stores") {
  memory::MemoryStore store;
  store.embedding_dim = 3;
  store.semantic.push_back(sem("a", {1, 0, 0}));
  CHECK_THROWS_AS(memory::retrieve_semantic(store, {1.0, 0.0}, 2), ValidationError);

  memory::MemoryStore unembedded;
  memory::SemanticEntry raw;
  raw.term = "raw";
  raw.definition = "no vector";
  unembedded.semantic.push_back(raw);
  CHECK_THROWS_AS(memory::retrieve_semantic(unembedded, {1.0}, 2), ValidationError);
}

TEST_CASE("render_template substitutes placeholders and names unbound ones") {
  const auto tpl = memory::ProceduralTemplate::make(memory::Stage::independent_read,
                                                    "Analyze {title} for {persona}");
  CHECK(tpl.placeholder_names == std::set<std::string>{"title", "persona"});
  CHECK(memory::render_template(tpl, {{"title", "Tax news"}, {"persona", "a reader"}}) ==
        "Analyze Tax news for a reader");

  const auto plain = memory::ProceduralTemplate::make(memory::Stage::discuss, "no markers here");
  CHECK(memory::render_template(plain, {}) == "no markers here");

  try {
    memory::render_template(tpl, {{"title", "x"}});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("persona") != std::string::npos);
  }
}

TEST_CASE("render_procedure requires a template for the stage") {
  memory::MemoryStore store;
  CHECK_THROWS_AS(memory::render_procedure(store, memory::Stage::discuss, {}), ValidationError);
  store = memory::with_default_templates(std::move(store));
  CHECK_NOTHROW(memory::render_procedure(
      store, memory::Stage::segment_classify,
      {{"domains", "Finance"}, {"paragraph", "markets move"}}));
}

TEST_CASE("rendering is referentially transparent in its bindings") {
  const auto tpl =
      memory::ProceduralTemplate::make(memory::Stage::discuss, "{a}+{a} and {b}");
  const std::map<std::string, std::string> bindings{{"a", "1"}, {"b", "2"}};
  CHECK(memory::render_template(tpl, bindings) == memory::render_template(tpl, bindings));
  CHECK(memory::render_template(tpl, bindings) == "1+1 and 2");
}

TEST_CASE("default templates exist for every stage with the engine's placeholders") {
  using memory::Stage;
  for (const Stage stage :
       {Stage::independent_read, Stage::discuss, Stage::summarize, Stage::supplement,
        Stage::control_read, Stage::vanilla_supplement, Stage::segment_classify}) {
    const auto& tpl = memory::default_template(stage);
    CHECK(!tpl.template_text.empty());
    CHECK(tpl.placeholder_names == memory::parse_placeholders(tpl.template_text));
  }
}

TEST_CASE("embed_store fills missing vectors, is idempotent, and checks dims") {
  TempDir tmp;
  auto provider = testing::make_recording_provider(tmp.path() / "fx");

  memory::MemoryStore store;
  memory::SemanticEntry entry;
  entry.term = "grain futures";
  entry.definition = "contracts on future grain markets";
  store.semantic.push_back(entry);
  memory::EpisodicEntry event;
  event.article_id = "past";
  event.occurred_at = "2024-02-02";
  event.summary = "markets rallied after tariff news";
  store.episodic.push_back(event);

  const auto embedded = memory::embed_store(store, provider);
  CHECK(embedded.fully_embedded());
  CHECK(embedded.embedding_dim == testing::scripted_embedding_dim());
  CHECK(*embedded.semantic[0].embedding ==
        testing::scripted_embedding("grain futures: contracts on future grain markets"));
  CHECK(*embedded.episodic[0].embedding ==
        testing::scripted_embedding("markets rallied after tariff news"));
  CHECK_FALSE(store.fully_embedded());  // input untouched

  const auto again = memory::embed_store(embedded, provider);
  CHECK(*again.semantic[0].embedding == *embedded.semantic[0].embedding);

  memory::MemoryStore mixed = embedded;
  mixed.semantic.push_back(sem("odd", {1.0, 2.0}));  // wrong dimension
  CHECK_THROWS_AS(memory::embed_store(mixed, provider), ValidationError);
}

TEST_CASE("profile validation enforces kind rules") {
  const auto domains = corpus::default_domain_set();

  memory::AgentProfile expert;
  expert.id = "x";
  expert.kind = memory::ProfileKind::domain_expert;
  expert.persona = "Finance expert";
  CHECK_THROWS_AS(memory::validate_profile(expert, domains), ValidationError);
  expert.expertise_domain = "Sports";
  CHECK_THROWS_AS(memory::validate_profile(expert, domains), ValidationError);
  expert.expertise_domain = "Finance";
  CHECK_NOTHROW(memory::validate_profile(expert, domains));

  memory::AgentProfile young;
  young.id = "young";
  young.kind = memory::ProfileKind::age_group;
  young.persona = "a reader aged 6-12";
  CHECK_NOTHROW(memory::validate_profile(young, domains));
  young.expertise_domain = "Finance";
  CHECK_THROWS_AS(memory::validate_profile(young, domains), ValidationError);

  memory::AgentProfile dated;
  dated.id = "dated";
  dated.kind = memory::ProfileKind::custom;
  dated.persona = "custom reader";
  memory::EpisodicEntry bad;
  bad.article_id = "a";
  bad.occurred_at = "last Tuesday";
  bad.summary = "s";
  dated.store.episodic.push_back(bad);
  CHECK_THROWS_AS(memory::validate_profile(dated, domains), ValidationError);
}

TEST_CASE("profiles load from fixture files with defaults applied") {
  const auto profiles = testing::load_fixture_profiles(corpus::default_domain_set());
  REQUIRE(profiles.size() == 4);
  CHECK(profiles[0].id == "finance");
  CHECK(profiles[0].kind == memory::ProfileKind::domain_expert);
  CHECK(profiles[0].expertise_domain == "Finance");
  CHECK(profiles[0].store.semantic.size() == 3);
  CHECK(profiles[0].store.episodic.size() == 2);
  // Defaults fill every stage.
  CHECK(profiles[0].store.procedural.size() == 7);
}
