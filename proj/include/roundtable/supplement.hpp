#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roundtable/discussion.hpp"

namespace roundtable::supplement {

enum class Kind { discussion, vanilla };
std::string_view kind_name(Kind k);
Kind kind_from_name(std::string_view name);

struct Section {
  /// Question text of the gap this section addresses, when any. Always
  /// resolvable against extract_gaps output for the same transcript.
  std::optional<std::string> gap_question;
  std::string heading;
  std::string body;
};

struct SupplementaryMaterial {
  std::string article_id;
  Kind kind = Kind::vanilla;
  std::vector<Section> sections;
  std::string full_text;  // concatenation used for prompts and scoring
};

struct GeneratorOptions {
  int max_tokens = 1024;
  /// One completion per unresolved gap instead of a single call.
  bool per_gap = false;
  memory::MemoryStore system_templates;

  const memory::ProceduralTemplate& system_template(memory::Stage stage) const;
};

/// Builds the gap-targeted supplement from the full discussion record. Every
/// unresolved gap must come back as a gap-referencing section; with zero
/// gaps the material may consist of general sections only.
SupplementaryMaterial generate_discussion_supplement(
    const discussion::DiscussionTranscript& transcript, const std::vector<discussion::Gap>& gaps,
    const corpus::NewsArticle& article, llm::Provider& provider,
    const GeneratorOptions& options = {});

/// Baseline supplement from the article text alone.
SupplementaryMaterial generate_vanilla_supplement(const corpus::NewsArticle& article,
                                                  llm::Provider& provider,
                                                  const GeneratorOptions& options = {});

/// Sections of a sectioned supplement response; gap lines are matched
/// (normalized) against `gaps`.
std::vector<Section> parse_supplement_sections(const std::string& content,
                                               const std::vector<discussion::Gap>& gaps);

std::string sections_full_text(const std::vector<Section>& sections);

nlohmann::ordered_json supplement_to_json(const SupplementaryMaterial& material);
SupplementaryMaterial supplement_from_json(const nlohmann::json& doc);

}  // namespace roundtable::supplement
