#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "roundtable/llm_provider.hpp"

namespace roundtable::memory {

/// The staged "how-to" prompts an agent (or the engine) carries.
enum class Stage {
  independent_read,
  discuss,
  summarize,
  supplement,
  control_read,
  vanilla_supplement,
  segment_classify,
};

std::string_view stage_name(Stage stage);
Stage stage_from_name(std::string_view name);

struct SemanticEntry {
  std::string term;
  std::string definition;
  std::vector<std::string> domain_tags;
  std::optional<std::vector<double>> embedding;
};

struct EpisodicEntry {
  std::string article_id;
  std::string occurred_at;  // ISO-8601 date
  std::string summary;
  std::vector<std::string> domain_tags;
  std::optional<std::vector<double>> embedding;
};

struct ProceduralTemplate {
  Stage stage = Stage::independent_read;
  std::string template_text;
  std::set<std::string> placeholder_names;

  /// Derives placeholder_names from {name} markers in the text.
  static ProceduralTemplate make(Stage stage, std::string text);
};

/// Placeholder names that appear in `text` as {name} markers.
std::set<std::string> parse_placeholders(std::string_view text);

struct MemoryStore {
  std::vector<SemanticEntry> semantic;
  std::vector<EpisodicEntry> episodic;
  std::map<Stage, ProceduralTemplate> procedural;
  std::optional<int> embedding_dim;

  bool fully_embedded() const;
};

enum class ProfileKind { domain_expert, age_group, custom };
std::string_view profile_kind_name(ProfileKind kind);
ProfileKind profile_kind_from_name(std::string_view name);

struct AgentProfile {
  std::string id;
  ProfileKind kind = ProfileKind::custom;
  std::string persona;
  std::optional<std::string> expertise_domain;
  MemoryStore store;
};

/// Top-k by cosine similarity; ties by ascending term, then insertion order.
std::vector<SemanticEntry> retrieve_semantic(const MemoryStore& store,
                                             const std::vector<double>& query_embedding, int k);

/// Top-k by cosine similarity; ties by most recent occurred_at, then
/// ascending article_id, then insertion order.
std::vector<EpisodicEntry> retrieve_episodic(const MemoryStore& store,
                                             const std::vector<double>& query_embedding, int k);

/// Single-pass substitution of {name} markers. Unbound placeholders are an
/// error naming the placeholder; extra bindings are ignored.
std::string render_template(const ProceduralTemplate& tpl,
                            const std::map<std::string, std::string>& bindings);

std::string render_procedure(const MemoryStore& store, Stage stage,
                             const std::map<std::string, std::string>& bindings);

/// Returns a copy in which every semantic/episodic entry carries an
/// embedding (one singleton embed call per missing entry). Idempotent; the
/// input store is untouched on failure.
MemoryStore embed_store(const MemoryStore& store, llm::Provider& embedder);

/// Built-in prompt for a stage; profiles may override per stage.
const ProceduralTemplate& default_template(Stage stage);

/// Fills any stage missing from the store's procedural map with the
/// built-in default.
MemoryStore with_default_templates(MemoryStore store);

void validate_profile(const AgentProfile& profile, const std::vector<std::string>& domain_set);

/// Loads one agent profile document (JSON) and fills template defaults.
AgentProfile load_profile(const std::filesystem::path& path,
                          const std::vector<std::string>& domain_set);

}  // namespace roundtable::memory
