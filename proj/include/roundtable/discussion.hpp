#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roundtable/agent_memory.hpp"
#include "roundtable/corpus.hpp"
#include "roundtable/llm_provider.hpp"

namespace roundtable::discussion {

enum class Condition { original, vanilla, discussion };
std::string_view condition_name(Condition c);
Condition condition_from_name(std::string_view name);

/// An agent's stated understanding of one article under one condition.
struct ComprehensionResponse {
  std::string agent_id;
  std::string article_id;
  Condition condition = Condition::original;
  std::string whole_text;
  std::map<std::string, std::string> per_segment_texts;  // domain label -> text
  std::vector<std::string> declared_questions;  // raw "@Domain: ..." bullet texts
  std::vector<std::string> declared_uncertainties;
};

struct QuestionRef {
  std::string asked_of_domain;
  std::string question;
};

struct ClarificationRef {
  int question_index = 0;  // index into the round's question list so far
  std::string answer;
};

struct Utterance {
  std::string agent_id;
  int round_index = 0;
  std::string analysis;
  std::vector<QuestionRef> questions;
  std::vector<ClarificationRef> clarifications;
};

struct RoundSummary {
  int round_index = 0;
  std::string key_points;
  std::vector<std::string> open_questions;
  std::vector<std::string> clarifications_given;
};

struct Round {
  std::vector<Utterance> utterances;
  RoundSummary summary;
};

struct DiscussionTranscript {
  std::string article_id;
  std::vector<ComprehensionResponse> initial_responses;
  std::vector<Round> rounds;
  int n_rounds_config = 0;
};

struct EngineOptions {
  int retrieval_k = 5;
  int max_tokens = 1024;
  /// Whether round-0 discuss prompts include the full initial readings.
  bool initial_responses_in_round0 = true;
  /// Experiment domain set used to validate question targets; falls back to
  /// the article's segment labels when empty.
  std::vector<std::string> domain_set;
  /// Engine-level templates (summarize, supplement, ...); stages not present
  /// fall back to the built-in defaults.
  memory::MemoryStore system_templates;

  const memory::ProceduralTemplate& system_template(memory::Stage stage) const;
};

/// Carries the rounds that did complete when a discussion dies mid-flight.
class DiscussionAborted : public Error {
public:
  DiscussionAborted(const std::string& what, DiscussionTranscript partial)
      : Error(what), partial_(std::move(partial)) {}
  const DiscussionTranscript& partial() const { return partial_; }

private:
  DiscussionTranscript partial_;
};

ComprehensionResponse independent_read(const memory::AgentProfile& agent,
                                       const corpus::NewsArticle& article,
                                       llm::Provider& provider,
                                       const EngineOptions& options = {});

/// One full round: every agent speaks once in the given order, then a
/// neutral summarize call produces the round summary. The round is built
/// off to the side; nothing is appended to `so_far`.
Round run_round(const std::vector<memory::AgentProfile>& agents,
                const corpus::NewsArticle& article, const DiscussionTranscript& so_far,
                llm::Provider& provider, const EngineOptions& options = {});

DiscussionTranscript run_discussion(const std::vector<memory::AgentProfile>& agents,
                                    const corpus::NewsArticle& article, int n_rounds,
                                    llm::Provider& provider, const EngineOptions& options = {});

struct Gap {
  std::string from_agent;       // who first asked
  std::string asked_of_domain;  // which expertise it was aimed at
  std::string question;         // first-seen original text
  std::string normalized;
  bool resolved = false;
  std::vector<int> evidence_rounds;  // rounds where asked or resolved, ascending
};

/// Union of initial-response questions and round questions, deduplicated by
/// normalized text. A gap counts as resolved when a clarification links to
/// it or a round summary lists it under clarifications given.
std::vector<Gap> extract_gaps(const DiscussionTranscript& transcript);

/// Stable plain-text rendering of an utterance used in prompts and
/// summaries.
std::string render_utterance(const Utterance& utterance);

// Prompt-binding renderers shared with the control-group read path.
std::string semantic_context_binding(const std::vector<memory::SemanticEntry>& entries);
std::string episodic_context_binding(const std::vector<memory::EpisodicEntry>& entries);
std::vector<std::string> segment_labels_of(const corpus::NewsArticle& article);

// Parsers for the documented response layouts. Parse failures carry the raw
// response text.
ComprehensionResponse parse_read_response(const std::string& content,
                                          const std::vector<std::string>& segment_labels,
                                          const std::vector<std::string>& domain_set);
Utterance parse_utterance(const std::string& content, const std::vector<std::string>& domain_set,
                          int questions_so_far);
RoundSummary parse_round_summary(const std::string& content);

nlohmann::ordered_json transcript_to_json(const DiscussionTranscript& transcript);
DiscussionTranscript transcript_from_json(const nlohmann::json& doc);

}  // namespace roundtable::discussion
