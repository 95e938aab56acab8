#include "roundtable/discussion.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "roundtable/response_layout.hpp"
#include "roundtable/text.hpp"

namespace roundtable::discussion {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::original: return "original";
    case Condition::vanilla: return "vanilla";
    case Condition::discussion: return "discussion";
  }
  return "original";
}

Condition condition_from_name(std::string_view name) {
  if (name == "original") return Condition::original;
  if (name == "vanilla") return Condition::vanilla;
  if (name == "discussion") return Condition::discussion;
  throw ParseError("unknown condition: " + std::string(name));
}

const memory::ProceduralTemplate& EngineOptions::system_template(memory::Stage stage) const {
  auto it = system_templates.procedural.find(stage);
  if (it != system_templates.procedural.end()) return it->second;
  return memory::default_template(stage);
}

// ---------------------------------------------------------------------------
// Prompt binding helpers

std::vector<std::string> segment_labels_of(const corpus::NewsArticle& article) {
  std::vector<std::string> labels;
  for (const auto& seg : article.segments) {
    if (std::find(labels.begin(), labels.end(), seg.domain_label) == labels.end()) {
      labels.push_back(seg.domain_label);
    }
  }
  return labels;
}

std::string semantic_context_binding(const std::vector<memory::SemanticEntry>& entries) {
  if (entries.empty()) return "(no background entries)";
  std::string out;
  for (const auto& e : entries) {
    out += "- " + e.term + ": " + e.definition + "\n";
  }
  return text::trim(out);
}

std::string episodic_context_binding(const std::vector<memory::EpisodicEntry>& entries) {
  if (entries.empty()) return "(no recalled events)";
  std::string out;
  for (const auto& e : entries) {
    out += "- [" + e.occurred_at + "] " + e.summary + "\n";
  }
  return text::trim(out);
}

namespace {

std::string article_binding(const corpus::NewsArticle& article) {
  return article.title + "\n\n" + article.body;
}

std::string summary_text(const RoundSummary& s) {
  std::string out = "Round " + std::to_string(s.round_index) + " summary:\n";
  out += "KEY POINTS: " + s.key_points + "\n";
  out += "OPEN QUESTIONS:\n";
  for (const auto& q : s.open_questions) out += "- " + q + "\n";
  out += "CLARIFICATIONS GIVEN:\n";
  for (const auto& c : s.clarifications_given) out += "- " + c + "\n";
  return out;
}

std::string prior_summaries_binding(const DiscussionTranscript& transcript) {
  if (transcript.rounds.empty()) return "(none yet)";
  std::string out;
  for (const auto& round : transcript.rounds) {
    out += summary_text(round.summary);
    out.push_back('\n');
  }
  return text::trim(out);
}

std::string initial_context_binding(const DiscussionTranscript& transcript, int round_index,
                                    bool enabled) {
  if (round_index != 0 || !enabled) return "(not shown)";
  std::string out;
  for (const auto& r : transcript.initial_responses) {
    out += "[" + r.agent_id + "]\n" + r.whole_text + "\n";
    for (const auto& q : r.declared_questions) out += "- " + q + "\n";
    out.push_back('\n');
  }
  return out.empty() ? "(none)" : text::trim(out);
}

std::string own_prior_binding(const DiscussionTranscript& transcript, const std::string& agent_id) {
  std::string out;
  for (const auto& r : transcript.initial_responses) {
    if (r.agent_id == agent_id) {
      out += "Initial reading: " + r.whole_text + "\n";
    }
  }
  for (const auto& round : transcript.rounds) {
    for (const auto& u : round.utterances) {
      if (u.agent_id == agent_id) {
        out += "Round " + std::to_string(u.round_index) + ": " + u.analysis + "\n";
      }
    }
  }
  return out.empty() ? "(none)" : text::trim(out);
}

std::string round_questions_binding(const std::vector<QuestionRef>& questions) {
  if (questions.empty()) return "(none yet)";
  std::string out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    out += std::to_string(i) + ". @" + questions[i].asked_of_domain + ": " +
           questions[i].question + "\n";
  }
  return text::trim(out);
}

llm::ChatRequest chat_request(const llm::Provider& provider, std::string prompt, std::string tag,
                              int max_tokens) {
  llm::ChatRequest request;
  request.model_name = provider.config().chat_model;
  request.max_tokens = max_tokens;
  request.request_tag = std::move(tag);
  request.messages = {{llm::Role::user, std::move(prompt)}};
  return request;
}

}  // namespace

std::string render_utterance(const Utterance& u) {
  std::string out = "[" + u.agent_id + "]\nANALYSIS: " + u.analysis + "\n";
  if (!u.questions.empty()) {
    out += "QUESTIONS:\n";
    for (const auto& q : u.questions) {
      out += "- @" + q.asked_of_domain + ": " + q.question + "\n";
    }
  }
  if (!u.clarifications.empty()) {
    out += "CLARIFICATIONS:\n";
    for (const auto& c : u.clarifications) {
      out += "- @" + std::to_string(c.question_index) + ": " + c.answer + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Response parsers

namespace {

[[noreturn]] void parse_fail(const std::string& why, const std::string& raw) {
  throw ParseError(why + "; raw response follows:\n" + raw);
}

}  // namespace

ComprehensionResponse parse_read_response(const std::string& content,
                                          const std::vector<std::string>& segment_labels,
                                          const std::vector<std::string>& domain_set) {
  if (text::trim(content).empty()) parse_fail("empty response content", content);
  const auto blocks =
      layout::parse_blocks(content, {"ANALYSIS", "SEGMENT", "QUESTIONS", "UNCERTAINTIES"});

  ComprehensionResponse response;
  for (const auto& block : blocks) {
    if (block.header == "ANALYSIS") {
      if (!response.whole_text.empty()) response.whole_text += "\n";
      response.whole_text += block.body;
    } else if (block.header == "SEGMENT") {
      if (std::find(segment_labels.begin(), segment_labels.end(), block.arg) ==
          segment_labels.end()) {
        parse_fail("SEGMENT label '" + block.arg + "' is not one of the article's domains",
                   content);
      }
      response.per_segment_texts[block.arg] = block.body;
    } else if (block.header == "QUESTIONS") {
      for (const auto& item : layout::parse_bullets(block.body)) {
        std::string domain, question;
        if (layout::split_at_prefix(item, domain, question)) {
          if (std::find(domain_set.begin(), domain_set.end(), domain) == domain_set.end()) {
            parse_fail("question aimed at unknown domain '" + domain + "'", content);
          }
        }
        response.declared_questions.push_back(item);
      }
    } else if (block.header == "UNCERTAINTIES") {
      for (const auto& item : layout::parse_bullets(block.body)) {
        response.declared_uncertainties.push_back(item);
      }
    }
  }
  if (text::trim(response.whole_text).empty()) {
    parse_fail("missing or empty ANALYSIS section", content);
  }
  return response;
}

Utterance parse_utterance(const std::string& content, const std::vector<std::string>& domain_set,
                          int questions_so_far) {
  if (text::trim(content).empty()) parse_fail("empty response content", content);
  const auto blocks = layout::parse_blocks(content, {"ANALYSIS", "QUESTIONS", "CLARIFICATIONS"});

  Utterance utterance;
  for (const auto& block : blocks) {
    if (block.header == "ANALYSIS") {
      if (!utterance.analysis.empty()) utterance.analysis += "\n";
      utterance.analysis += block.body;
    } else if (block.header == "QUESTIONS") {
      for (const auto& item : layout::parse_bullets(block.body)) {
        std::string domain, question;
        if (!layout::split_at_prefix(item, domain, question)) {
          parse_fail("question bullet lacks an @<domain>: prefix: '" + item + "'", content);
        }
        if (std::find(domain_set.begin(), domain_set.end(), domain) == domain_set.end()) {
          parse_fail("question aimed at unknown domain '" + domain + "'", content);
        }
        if (question.empty()) parse_fail("empty question text", content);
        utterance.questions.push_back({domain, question});
      }
    } else if (block.header == "CLARIFICATIONS") {
      for (const auto& item : layout::parse_bullets(block.body)) {
        std::string index_text, answer;
        if (!layout::split_at_prefix(item, index_text, answer)) {
          parse_fail("clarification bullet lacks an @<number>: prefix: '" + item + "'", content);
        }
        int index = -1;
        auto [ptr, ec] =
            std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
        if (ec != std::errc{} || ptr != index_text.data() + index_text.size()) {
          parse_fail("clarification index '" + index_text + "' is not a number", content);
        }
        if (index < 0 || index >= questions_so_far) {
          parse_fail("clarification index " + std::to_string(index) +
                         " does not name an open question of this round",
                     content);
        }
        utterance.clarifications.push_back({index, answer});
      }
    }
  }
  if (text::trim(utterance.analysis).empty()) {
    parse_fail("missing or empty ANALYSIS section", content);
  }
  return utterance;
}

RoundSummary parse_round_summary(const std::string& content) {
  if (text::trim(content).empty()) parse_fail("empty response content", content);
  const auto blocks =
      layout::parse_blocks(content, {"KEY POINTS", "OPEN QUESTIONS", "CLARIFICATIONS GIVEN"});

  RoundSummary summary;
  bool saw_key_points = false;
  for (const auto& block : blocks) {
    if (block.header == "KEY POINTS") {
      summary.key_points = block.body;
      saw_key_points = true;
    } else if (block.header == "OPEN QUESTIONS") {
      summary.open_questions = layout::parse_bullets(block.body);
    } else if (block.header == "CLARIFICATIONS GIVEN") {
      summary.clarifications_given = layout::parse_bullets(block.body);
    }
  }
  if (!saw_key_points || text::trim(summary.key_points).empty()) {
    parse_fail("missing or empty KEY POINTS section", content);
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Engine operations

ComprehensionResponse independent_read(const memory::AgentProfile& agent,
                                       const corpus::NewsArticle& article,
                                       llm::Provider& provider, const EngineOptions& options) {
  if (article.segments.empty()) {
    throw ValidationError("article '" + article.id + "' is not segmented");
  }
  if (!agent.store.fully_embedded()) {
    throw ValidationError("agent '" + agent.id + "' has un-embedded memory entries");
  }

  std::vector<memory::SemanticEntry> semantic;
  std::vector<memory::EpisodicEntry> episodic;
  if (!agent.store.semantic.empty() || !agent.store.episodic.empty()) {
    const std::vector<double> query = provider.embed({article.body}).front().values;
    semantic = memory::retrieve_semantic(agent.store, query, options.retrieval_k);
    episodic = memory::retrieve_episodic(agent.store, query, options.retrieval_k);
  }

  const auto labels = segment_labels_of(article);
  const std::map<std::string, std::string> bindings{
      {"persona", agent.persona},
      {"article", article_binding(article)},
      {"semantic_context", semantic_context_binding(semantic)},
      {"episodic_context", episodic_context_binding(episodic)},
      {"domains", text::join(labels, ", ")},
  };
  const std::string prompt =
      memory::render_procedure(agent.store, memory::Stage::independent_read, bindings);

  const llm::ChatResponse reply =
      provider.complete(chat_request(provider, prompt, "independent_read:" + article.id + ":" + agent.id,
                                     options.max_tokens));

  ComprehensionResponse response = parse_read_response(
      reply.content, labels, options.domain_set.empty() ? labels : options.domain_set);
  response.agent_id = agent.id;
  response.article_id = article.id;
  response.condition = Condition::original;
  return response;
}

Round run_round(const std::vector<memory::AgentProfile>& agents,
                const corpus::NewsArticle& article, const DiscussionTranscript& so_far,
                llm::Provider& provider, const EngineOptions& options) {
  if (agents.size() < 2) throw ValidationError("discussion requires at least two agents");
  if (so_far.initial_responses.empty()) {
    throw ValidationError("run_round requires populated initial responses");
  }

  const int round_index = static_cast<int>(so_far.rounds.size());
  const auto labels = segment_labels_of(article);

  Round round;
  round.summary.round_index = round_index;
  std::vector<QuestionRef> round_questions;

  std::string round_so_far_text;
  for (const auto& agent : agents) {
    const std::map<std::string, std::string> bindings{
        {"persona", agent.persona},
        {"article", article_binding(article)},
        {"round_index", std::to_string(round_index)},
        {"initial_context",
         initial_context_binding(so_far, round_index, options.initial_responses_in_round0)},
        {"prior_summaries", prior_summaries_binding(so_far)},
        {"own_prior", own_prior_binding(so_far, agent.id)},
        {"round_so_far",
         round_so_far_text.empty() ? "(you speak first)" : text::trim(round_so_far_text)},
        {"round_questions", round_questions_binding(round_questions)},
    };
    const std::string prompt =
        memory::render_procedure(agent.store, memory::Stage::discuss, bindings);
    const llm::ChatResponse reply = provider.complete(
        chat_request(provider, prompt,
                     "discuss:" + article.id + ":r" + std::to_string(round_index) + ":" + agent.id,
                     options.max_tokens));

    Utterance utterance =
        parse_utterance(reply.content, options.domain_set.empty() ? labels : options.domain_set,
                        static_cast<int>(round_questions.size()));
    utterance.agent_id = agent.id;
    utterance.round_index = round_index;

    for (const auto& q : utterance.questions) round_questions.push_back(q);
    round_so_far_text += render_utterance(utterance) + "\n";
    round.utterances.push_back(std::move(utterance));
  }

  // Neutral summary over the round's utterances.
  std::string utterances_text;
  for (const auto& u : round.utterances) utterances_text += render_utterance(u) + "\n";
  const std::map<std::string, std::string> summary_bindings{
      {"round_index", std::to_string(round_index)},
      {"round_utterances", text::trim(utterances_text)},
  };
  const std::string summary_prompt = memory::render_template(
      options.system_template(memory::Stage::summarize), summary_bindings);
  const llm::ChatResponse summary_reply = provider.complete(chat_request(
      provider, summary_prompt, "summarize:" + article.id + ":r" + std::to_string(round_index),
      options.max_tokens));
  RoundSummary summary = parse_round_summary(summary_reply.content);
  summary.round_index = round_index;
  round.summary = std::move(summary);
  return round;
}

DiscussionTranscript run_discussion(const std::vector<memory::AgentProfile>& agents,
                                    const corpus::NewsArticle& article, int n_rounds,
                                    llm::Provider& provider, const EngineOptions& options) {
  if (n_rounds < 1) throw ValidationError("n_rounds must be >= 1");
  if (agents.size() < 2) throw ValidationError("discussion requires at least two agents");

  DiscussionTranscript transcript;
  transcript.article_id = article.id;
  transcript.n_rounds_config = n_rounds;

  try {
    for (const auto& agent : agents) {
      transcript.initial_responses.push_back(
          independent_read(agent, article, provider, options));
    }
    for (int r = 0; r < n_rounds; ++r) {
      transcript.rounds.push_back(run_round(agents, article, transcript, provider, options));
    }
  } catch (const Error& e) {
    throw DiscussionAborted("discussion of article '" + article.id + "' aborted after " +
                                std::to_string(transcript.rounds.size()) +
                                " completed round(s): " + e.what(),
                            std::move(transcript));
  }
  return transcript;
}

// ---------------------------------------------------------------------------
// Gap extraction

std::vector<Gap> extract_gaps(const DiscussionTranscript& transcript) {
  if (transcript.rounds.empty()) {
    throw ValidationError("extract_gaps requires a transcript with at least one round");
  }

  std::vector<Gap> gaps;
  std::map<std::string, std::size_t> index_by_norm;

  auto upsert = [&](const std::string& from_agent, const std::string& domain,
                    const std::string& question_text, std::optional<int> round) -> Gap& {
    const std::string norm = text::normalize_question(question_text);
    auto it = index_by_norm.find(norm);
    if (it == index_by_norm.end()) {
      Gap gap;
      gap.from_agent = from_agent;
      gap.asked_of_domain = domain;
      gap.question = question_text;
      gap.normalized = norm;
      gaps.push_back(std::move(gap));
      it = index_by_norm.emplace(norm, gaps.size() - 1).first;
    }
    Gap& gap = gaps[it->second];
    if (round && (gap.evidence_rounds.empty() || gap.evidence_rounds.back() != *round)) {
      gap.evidence_rounds.push_back(*round);
    }
    return gap;
  };

  // Initial-response questions precede round 0 and contribute no round index.
  for (const auto& response : transcript.initial_responses) {
    for (const auto& raw : response.declared_questions) {
      std::string domain, question;
      if (!layout::split_at_prefix(raw, domain, question)) {
        domain.clear();
        question = raw;
      }
      upsert(response.agent_id, domain, question, std::nullopt);
    }
  }

  for (std::size_t r = 0; r < transcript.rounds.size(); ++r) {
    const auto& round = transcript.rounds[r];
    const int round_index = static_cast<int>(r);
    // Question list as it accumulated during this round; clarification
    // indices refer to it.
    std::vector<std::string> round_norms;
    for (const auto& u : round.utterances) {
      for (const auto& c : u.clarifications) {
        if (c.question_index < 0 || c.question_index >= static_cast<int>(round_norms.size())) {
          throw ValidationError("transcript corrupt: clarification index " +
                                std::to_string(c.question_index) + " out of range in round " +
                                std::to_string(round_index));
        }
        auto it = index_by_norm.find(round_norms[static_cast<std::size_t>(c.question_index)]);
        Gap& gap = gaps[it->second];
        gap.resolved = true;
        if (gap.evidence_rounds.empty() || gap.evidence_rounds.back() != round_index) {
          gap.evidence_rounds.push_back(round_index);
        }
      }
      for (const auto& q : u.questions) {
        Gap& gap = upsert(u.agent_id, q.asked_of_domain, q.question, round_index);
        round_norms.push_back(gap.normalized);
      }
    }
    // A summary listing a question under "clarifications given" also
    // resolves it, which is how cross-round answers are detected.
    for (const auto& line : round.summary.clarifications_given) {
      const std::string norm_line = text::normalize_question(line);
      for (auto& gap : gaps) {
        if (!gap.resolved && norm_line.find(gap.normalized) != std::string::npos) {
          gap.resolved = true;
          if (gap.evidence_rounds.empty() || gap.evidence_rounds.back() != round_index) {
            gap.evidence_rounds.push_back(round_index);
          }
        }
      }
    }
  }
  return gaps;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json response_to_json(const ComprehensionResponse& r) {
  ordered_json segments = ordered_json::object();
  for (const auto& [label, txt] : r.per_segment_texts) segments[label] = txt;
  return ordered_json{{"agent_id", r.agent_id},
                      {"article_id", r.article_id},
                      {"condition", condition_name(r.condition)},
                      {"whole_text", r.whole_text},
                      {"per_segment_texts", std::move(segments)},
                      {"declared_questions", r.declared_questions},
                      {"declared_uncertainties", r.declared_uncertainties}};
}

ComprehensionResponse response_from_json(const json& j) {
  ComprehensionResponse r;
  r.agent_id = j.at("agent_id").get<std::string>();
  r.article_id = j.at("article_id").get<std::string>();
  r.condition = condition_from_name(j.at("condition").get<std::string>());
  r.whole_text = j.at("whole_text").get<std::string>();
  for (const auto& [label, txt] : j.at("per_segment_texts").items()) {
    r.per_segment_texts[label] = txt.get<std::string>();
  }
  r.declared_questions = j.at("declared_questions").get<std::vector<std::string>>();
  r.declared_uncertainties = j.at("declared_uncertainties").get<std::vector<std::string>>();
  return r;
}

}  // namespace

ordered_json transcript_to_json(const DiscussionTranscript& transcript) {
  ordered_json initial = ordered_json::array();
  for (const auto& r : transcript.initial_responses) initial.push_back(response_to_json(r));

  ordered_json rounds = ordered_json::array();
  for (const auto& round : transcript.rounds) {
    ordered_json utterances = ordered_json::array();
    for (const auto& u : round.utterances) {
      ordered_json questions = ordered_json::array();
      for (const auto& q : u.questions) {
        questions.push_back(ordered_json{{"domain", q.asked_of_domain}, {"question", q.question}});
      }
      ordered_json clarifications = ordered_json::array();
      for (const auto& c : u.clarifications) {
        clarifications.push_back(
            ordered_json{{"question_index", c.question_index}, {"answer", c.answer}});
      }
      utterances.push_back(ordered_json{{"agent_id", u.agent_id},
                                        {"round_index", u.round_index},
                                        {"analysis", u.analysis},
                                        {"questions", std::move(questions)},
                                        {"clarifications", std::move(clarifications)}});
    }
    rounds.push_back(ordered_json{
        {"utterances", std::move(utterances)},
        {"summary", ordered_json{{"round_index", round.summary.round_index},
                                 {"key_points", round.summary.key_points},
                                 {"open_questions", round.summary.open_questions},
                                 {"clarifications_given", round.summary.clarifications_given}}}});
  }

  return ordered_json{{"article_id", transcript.article_id},
                      {"initial_responses", std::move(initial)},
                      {"rounds", std::move(rounds)},
                      {"n_rounds_config", transcript.n_rounds_config}};
}

DiscussionTranscript transcript_from_json(const json& doc) {
  DiscussionTranscript transcript;
  try {
    transcript.article_id = doc.at("article_id").get<std::string>();
    for (const auto& r : doc.at("initial_responses")) {
      transcript.initial_responses.push_back(response_from_json(r));
    }
    for (const auto& jr : doc.at("rounds")) {
      Round round;
      for (const auto& ju : jr.at("utterances")) {
        Utterance u;
        u.agent_id = ju.at("agent_id").get<std::string>();
        u.round_index = ju.at("round_index").get<int>();
        u.analysis = ju.at("analysis").get<std::string>();
        for (const auto& q : ju.at("questions")) {
          u.questions.push_back(
              {q.at("domain").get<std::string>(), q.at("question").get<std::string>()});
        }
        for (const auto& c : ju.at("clarifications")) {
          u.clarifications.push_back(
              {c.at("question_index").get<int>(), c.at("answer").get<std::string>()});
        }
        round.utterances.push_back(std::move(u));
      }
      const auto& js = jr.at("summary");
      round.summary.round_index = js.at("round_index").get<int>();
      round.summary.key_points = js.at("key_points").get<std::string>();
      round.summary.open_questions = js.at("open_questions").get<std::vector<std::string>>();
      round.summary.clarifications_given =
          js.at("clarifications_given").get<std::vector<std::string>>();
      transcript.rounds.push_back(std::move(round));
    }
    transcript.n_rounds_config = doc.at("n_rounds_config").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("transcript document malformed: ") + e.what());
  }
  return transcript;
}

}  // namespace roundtable::discussion
