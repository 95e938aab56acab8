#include "roundtable/agent_memory.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <numeric>
#include <regex>

#include "roundtable/io.hpp"
#include "roundtable/metrics.hpp"
#include "roundtable/text.hpp"

namespace roundtable::memory {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 7> kStageNames{{
    {Stage::independent_read, "independent_read"},
    {Stage::discuss, "discuss"},
    {Stage::summarize, "summarize"},
    {Stage::supplement, "supplement"},
    {Stage::control_read, "control_read"},
    {Stage::vanilla_supplement, "vanilla_supplement"},
    {Stage::segment_classify, "segment_classify"},
}};

const std::regex kPlaceholderPattern(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");

}  // namespace

std::string_view stage_name(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "independent_read";
}

Stage stage_from_name(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  throw ParseError("unknown template stage: " + std::string(name));
}

std::string_view profile_kind_name(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::domain_expert: return "domain_expert";
    case ProfileKind::age_group: return "age_group";
    case ProfileKind::custom: return "custom";
  }
  return "custom";
}

ProfileKind profile_kind_from_name(std::string_view name) {
  if (name == "domain_expert") return ProfileKind::domain_expert;
  if (name == "age_group") return ProfileKind::age_group;
  if (name == "custom") return ProfileKind::custom;
  throw ParseError("unknown profile kind: " + std::string(name));
}

std::set<std::string> parse_placeholders(std::string_view text) {
  std::set<std::string> names;
  auto begin = std::cregex_iterator(text.data(), text.data() + text.size(), kPlaceholderPattern);
  for (auto it = begin; it != std::cregex_iterator(); ++it) {
    names.insert((*it)[1].str());
  }
  return names;
}

ProceduralTemplate ProceduralTemplate::make(Stage stage, std::string textual) {
  ProceduralTemplate tpl;
  tpl.stage = stage;
  tpl.placeholder_names = parse_placeholders(textual);
  tpl.template_text = std::move(textual);
  return tpl;
}

bool MemoryStore::fully_embedded() const {
  auto embedded = [](const auto& entry) { return entry.embedding.has_value(); };
  return std::all_of(semantic.begin(), semantic.end(), embedded) &&
         std::all_of(episodic.begin(), episodic.end(), embedded);
}

namespace {

template <typename Entry>
void check_retrieval_preconditions(const std::vector<Entry>& entries,
                                   const std::optional<int>& store_dim,
                                   const std::vector<double>& query, int k) {
  if (k <= 0) throw ValidationError("retrieval k must be positive");
  for (const auto& e : entries) {
    if (!e.embedding) throw ValidationError("store has un-embedded entries");
  }
  if (store_dim && static_cast<int>(query.size()) != *store_dim) {
    throw ValidationError("query embedding dimension " + std::to_string(query.size()) +
                          " does not match store dimension " + std::to_string(*store_dim));
  }
}

template <typename Entry, typename TieLess>
std::vector<Entry> rank_entries(const std::vector<Entry>& entries,
                                const std::vector<double>& query, int k, TieLess tie_less) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    scored.emplace_back(eval::cosine_similarity(*entries[i].embedding, query), i);
  }
  std::stable_sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return tie_less(entries[a.second], entries[b.second]);
  });
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::vector<Entry> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(entries[scored[i].second]);
  return out;
}

}  // namespace

std::vector<SemanticEntry> retrieve_semantic(const MemoryStore& store,
                                             const std::vector<double>& query_embedding, int k) {
  if (store.semantic.empty()) {
    if (k <= 0) throw ValidationError("retrieval k must be positive");
    return {};
  }
  check_retrieval_preconditions(store.semantic, store.embedding_dim, query_embedding, k);
  return rank_entries(store.semantic, query_embedding, k,
                      [](const SemanticEntry& a, const SemanticEntry& b) {
                        return a.term < b.term;  // stable sort keeps insertion order after this
                      });
}

std::vector<EpisodicEntry> retrieve_episodic(const MemoryStore& store,
                                             const std::vector<double>& query_embedding, int k) {
  if (store.episodic.empty()) {
    if (k <= 0) throw ValidationError("retrieval k must be positive");
    return {};
  }
  check_retrieval_preconditions(store.episodic, store.embedding_dim, query_embedding, k);
  return rank_entries(store.episodic, query_embedding, k,
                      [](const EpisodicEntry& a, const EpisodicEntry& b) {
                        if (a.occurred_at != b.occurred_at) return a.occurred_at > b.occurred_at;
                        return a.article_id < b.article_id;
                      });
}

std::string render_template(const ProceduralTemplate& tpl,
                            const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(tpl.template_text.size());
  const std::string& text = tpl.template_text;
  auto begin = std::cregex_iterator(text.data(), text.data() + text.size(), kPlaceholderPattern);
  std::size_t last = 0;
  for (auto it = begin; it != std::cregex_iterator(); ++it) {
    const auto& match = *it;
    const std::string name = match[1].str();
    auto bound = bindings.find(name);
    if (bound == bindings.end()) {
      throw ValidationError("unbound placeholder {" + name + "} for stage " +
                            std::string(stage_name(tpl.stage)));
    }
    out.append(text, last, static_cast<std::size_t>(match.position()) - last);
    out.append(bound->second);
    last = static_cast<std::size_t>(match.position() + match.length());
  }
  out.append(text, last, text.size() - last);
  return out;
}

std::string render_procedure(const MemoryStore& store, Stage stage,
                             const std::map<std::string, std::string>& bindings) {
  auto it = store.procedural.find(stage);
  if (it == store.procedural.end()) {
    throw ValidationError("no template for stage " + std::string(stage_name(stage)));
  }
  return render_template(it->second, bindings);
}

MemoryStore embed_store(const MemoryStore& store, llm::Provider& embedder) {
  MemoryStore out = store;
  auto embed_one = [&](const std::string& text) {
    auto vectors = embedder.embed({text});
    return vectors.front().values;
  };
  for (auto& entry : out.semantic) {
    if (!entry.embedding) entry.embedding = embed_one(entry.term + ": " + entry.definition);
  }
  for (auto& entry : out.episodic) {
    if (!entry.embedding) entry.embedding = embed_one(entry.summary);
  }

  std::optional<int> dim = out.embedding_dim;
  auto check_dim = [&](const std::vector<double>& v) {
    if (!dim) dim = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != *dim) {
      throw ValidationError("mixed embedding dimensions in store (" + std::to_string(v.size()) +
                            " vs " + std::to_string(*dim) + ")");
    }
  };
  for (const auto& e : out.semantic) check_dim(*e.embedding);
  for (const auto& e : out.episodic) check_dim(*e.embedding);
  out.embedding_dim = dim;
  return out;
}

// ---------------------------------------------------------------------------
// Built-in templates

namespace {

const std::map<Stage, ProceduralTemplate>& builtin_templates() {
  static const std::map<Stage, ProceduralTemplate> templates = [] {
    std::map<Stage, ProceduralTemplate> m;
    auto add = [&m](Stage stage, std::string text) {
      m.emplace(stage, ProceduralTemplate::make(stage, std::move(text)));
    };

    add(Stage::independent_read, R"(You are {persona}.

Read the news article below and state your understanding of it. Cover every part of the article: be confident inside your own field, and for unfamiliar material state your uncertainty, offer hypotheses, and raise questions for experts of the other fields.

Article:
{article}

Background knowledge you hold:
{semantic_context}

Past events you recall:
{episodic_context}

Reply using exactly this layout. The domain labels are: {domains}.

ANALYSIS:
<your overall understanding of the article>

SEGMENT <domain>:
<your understanding of that domain's part of the article; one SEGMENT block per domain label>

QUESTIONS:
- @<domain>: <a question for an expert of that domain>

UNCERTAINTIES:
- <a point you are unsure about>
)");

    add(Stage::discuss, R"(You are {persona}, taking part in round {round_index} of a group discussion of the news article below.

Article:
{article}

Initial readings shared before the discussion:
{initial_context}

Summaries of earlier rounds:
{prior_summaries}

Your own prior contributions:
{own_prior}

Said so far this round:
{round_so_far}

Open questions raised so far this round, by number (answer the ones inside your expertise):
{round_questions}

Share your interpretation, ask experts of other domains about points of confusion, and clarify points raised for your own domain. Reply using exactly this layout.

ANALYSIS:
<your contribution this round>

QUESTIONS:
- @<domain>: <a question for an expert of that domain>

CLARIFICATIONS:
- @<question number>: <your answer to that numbered open question>
)");

    add(Stage::summarize, R"(You are the neutral record keeper of a group discussion. Summarize round {round_index} from the utterances below: the key points discussed, the questions raised, and the clarifications provided.

Round utterances:
{round_utterances}

Reply using exactly this layout.

KEY POINTS:
<the key points discussed this round>

OPEN QUESTIONS:
- <a question raised this round that was not answered>

CLARIFICATIONS GIVEN:
- <a question answered this round, quoted verbatim, followed by the gist of the answer>
)");

    add(Stage::supplement, R"(Write supplementary material to accompany the news article below. A panel of readers from different backgrounds discussed the article; their round summaries and the comprehension gaps they surfaced are listed. Address every unresolved gap explicitly and reinforce what was clarified.

Article:
{article}

Round summaries:
{summaries}

Comprehension gaps:
{gaps}

Reply as a sequence of sections using exactly this layout. When a section addresses a listed gap, repeat that gap's question verbatim on the GAP line; otherwise omit the GAP line.

SECTION <heading>:
GAP: <question text>
<explanation>
)");

    add(Stage::vanilla_supplement, R"(Write supplementary material that explains the news article below for a general audience.

Article:
{article}

Reply as a sequence of sections using exactly this layout.

SECTION <heading>:
<explanation>
)");

    add(Stage::control_read, R"(You are {persona}.

Read the news article below together with the supplementary material (when provided), then state your understanding of the article itself.

Article:
{article}

Supplementary material:
{supplement}

Background knowledge you hold:
{semantic_context}

Past events you recall:
{episodic_context}

Reply using exactly this layout. The domain labels are: {domains}.

ANALYSIS:
<your overall understanding of the article>

SEGMENT <domain>:
<your understanding of that domain's part of the article; one SEGMENT block per domain label>

QUESTIONS:
- @<domain>: <a question for an expert of that domain>

UNCERTAINTIES:
- <a point you are unsure about>
)");

    add(Stage::segment_classify, R"(Classify the paragraph below into exactly one of these domains: {domains}.

Paragraph:
{paragraph}

Answer with the domain label only.
)");

    return m;
  }();
  return templates;
}

}  // namespace

const ProceduralTemplate& default_template(Stage stage) {
  return builtin_templates().at(stage);
}

MemoryStore with_default_templates(MemoryStore store) {
  for (const auto& [stage, tpl] : builtin_templates()) {
    store.procedural.emplace(stage, tpl);  // no overwrite of explicit templates
  }
  return store;
}

// ---------------------------------------------------------------------------
// Validation and profile loading

void validate_profile(const AgentProfile& profile, const std::vector<std::string>& domain_set) {
  if (profile.id.empty()) throw ValidationError("agent profile has empty id");
  if (profile.persona.empty()) {
    throw ValidationError("agent profile " + profile.id + " has empty persona");
  }
  auto in_domains = [&](const std::string& d) {
    return std::find(domain_set.begin(), domain_set.end(), d) != domain_set.end();
  };
  if (profile.kind == ProfileKind::domain_expert) {
    if (!profile.expertise_domain) {
      throw ValidationError("domain_expert profile " + profile.id + " lacks expertise_domain");
    }
    if (!in_domains(*profile.expertise_domain)) {
      throw ValidationError("profile " + profile.id + " expertise_domain '" +
                            *profile.expertise_domain + "' is not in the domain set");
    }
  } else if (profile.kind == ProfileKind::age_group) {
    if (profile.expertise_domain) {
      throw ValidationError("age_group profile " + profile.id +
                            " must not carry an expertise_domain");
    }
  } else if (profile.expertise_domain && !in_domains(*profile.expertise_domain)) {
    throw ValidationError("profile " + profile.id + " expertise_domain '" +
                          *profile.expertise_domain + "' is not in the domain set");
  }

  for (const auto& e : profile.store.semantic) {
    if (e.term.empty()) throw ValidationError("profile " + profile.id + ": semantic term empty");
  }
  for (const auto& e : profile.store.episodic) {
    if (e.summary.empty()) {
      throw ValidationError("profile " + profile.id + ": episodic summary empty");
    }
    if (!text::is_iso_date(e.occurred_at)) {
      throw ValidationError("profile " + profile.id + ": episodic occurred_at '" + e.occurred_at +
                            "' is not an ISO-8601 date");
    }
  }

  // Embeddings, where present, must agree on dimension.
  std::optional<int> dim = profile.store.embedding_dim;
  auto check_dim = [&](const std::optional<std::vector<double>>& v) {
    if (!v) return;
    if (!dim) dim = static_cast<int>(v->size());
    if (static_cast<int>(v->size()) != *dim) {
      throw ValidationError("profile " + profile.id + ": mixed embedding dimensions");
    }
  };
  for (const auto& e : profile.store.semantic) check_dim(e.embedding);
  for (const auto& e : profile.store.episodic) check_dim(e.embedding);
}

namespace {

std::vector<std::string> tags_from(const json& j) {
  std::vector<std::string> tags;
  if (j.contains("domain_tags")) tags = j.at("domain_tags").get<std::vector<std::string>>();
  return tags;
}

std::optional<std::vector<double>> embedding_from(const json& j) {
  if (!j.contains("embedding") || j.at("embedding").is_null()) return std::nullopt;
  return j.at("embedding").get<std::vector<double>>();
}

}  // namespace

AgentProfile load_profile(const std::filesystem::path& path,
                          const std::vector<std::string>& domain_set) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ParseError("profile " + path.string() + ": " + e.what());
  }

  AgentProfile profile;
  try {
    profile.id = doc.at("id").get<std::string>();
    profile.kind = profile_kind_from_name(doc.at("kind").get<std::string>());
    profile.persona = doc.at("persona").get<std::string>();
    if (doc.contains("expertise_domain") && !doc.at("expertise_domain").is_null()) {
      profile.expertise_domain = doc.at("expertise_domain").get<std::string>();
    }
    for (const auto& e : doc.value("semantic", json::array())) {
      profile.store.semantic.push_back({e.at("term").get<std::string>(),
                                        e.at("definition").get<std::string>(), tags_from(e),
                                        embedding_from(e)});
    }
    for (const auto& e : doc.value("episodic", json::array())) {
      profile.store.episodic.push_back({e.at("article_id").get<std::string>(),
                                        e.at("occurred_at").get<std::string>(),
                                        e.at("summary").get<std::string>(), tags_from(e),
                                        embedding_from(e)});
    }
    for (const auto& [name, value] : doc.value("templates", json::object()).items()) {
      Stage stage = stage_from_name(name);
      profile.store.procedural.insert_or_assign(
          stage, ProceduralTemplate::make(stage, value.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ParseError("profile " + path.string() + ": " + e.what());
  }

  profile.store = with_default_templates(std::move(profile.store));
  validate_profile(profile, domain_set);
  return profile;
}

}  // namespace roundtable::memory
