#include "roundtable/supplement.hpp"

#include <algorithm>
#include <iostream>

#include "roundtable/response_layout.hpp"
#include "roundtable/text.hpp"

namespace roundtable::supplement {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view kind_name(Kind k) { return k == Kind::discussion ? "discussion" : "vanilla"; }

Kind kind_from_name(std::string_view name) {
  if (name == "discussion") return Kind::discussion;
  if (name == "vanilla") return Kind::vanilla;
  throw ParseError("unknown supplement kind: " + std::string(name));
}

const memory::ProceduralTemplate& GeneratorOptions::system_template(memory::Stage stage) const {
  auto it = system_templates.procedural.find(stage);
  if (it != system_templates.procedural.end()) return it->second;
  return memory::default_template(stage);
}

namespace {

std::string article_binding(const corpus::NewsArticle& article) {
  return article.title + "\n\n" + article.body;
}

std::string summaries_binding(const discussion::DiscussionTranscript& transcript) {
  std::string out;
  for (const auto& round : transcript.rounds) {
    const auto& s = round.summary;
    out += "Round " + std::to_string(s.round_index) + ":\n";
    out += "KEY POINTS: " + s.key_points + "\n";
    for (const auto& q : s.open_questions) out += "- open: " + q + "\n";
    for (const auto& c : s.clarifications_given) out += "- clarified: " + c + "\n";
    out.push_back('\n');
  }
  return out.empty() ? "(no rounds)" : text::trim(out);
}

std::string gaps_binding(const std::vector<discussion::Gap>& gaps) {
  if (gaps.empty()) return "(no gaps were identified)";
  std::string out;
  for (const auto& gap : gaps) {
    out += std::string("- [") + (gap.resolved ? "resolved" : "unresolved") + "] @" +
           (gap.asked_of_domain.empty() ? "general" : gap.asked_of_domain) + ": " + gap.question +
           "\n";
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

std::vector<Section> parse_supplement_sections(const std::string& content,
                                               const std::vector<discussion::Gap>& gaps) {
  if (text::trim(content).empty()) {
    throw ParseError("empty supplement response; raw response follows:\n" + content);
  }
  const auto blocks = layout::parse_blocks(content, {"SECTION", "GAP"});

  std::vector<Section> sections;
  for (const auto& block : blocks) {
    if (block.header == "SECTION") {
      Section section;
      section.heading = block.arg.empty() ? "Untitled" : block.arg;
      section.body = block.body;
      sections.push_back(std::move(section));
    } else if (block.header == "GAP") {
      if (sections.empty()) {
        throw ParseError("GAP line outside any SECTION; raw response follows:\n" + content);
      }
      // "GAP: <question>" is a one-line marker; anything after the first
      // line is ordinary section body.
      std::string question = block.body;
      std::string rest;
      if (const std::size_t nl = block.body.find('\n'); nl != std::string::npos) {
        question = block.body.substr(0, nl);
        rest = text::trim(block.body.substr(nl + 1));
      }
      question = text::trim(question);
      const std::string norm = text::normalize_question(question);
      auto match = std::find_if(gaps.begin(), gaps.end(),
                                [&](const discussion::Gap& g) { return g.normalized == norm; });
      if (match == gaps.end()) {
        throw ParseError("GAP line does not match any extracted gap: '" + question +
                         "'; raw response follows:\n" + content);
      }
      sections.back().gap_question = match->question;
      if (!rest.empty()) {
        if (!sections.back().body.empty()) sections.back().body += "\n";
        sections.back().body += rest;
      }
    }
  }
  if (sections.empty()) {
    throw ParseError("no SECTION blocks in supplement response; raw response follows:\n" +
                     content);
  }
  return sections;
}

std::string sections_full_text(const std::vector<Section>& sections) {
  std::string out;
  for (const auto& section : sections) {
    out += section.heading + "\n" + section.body + "\n\n";
  }
  return text::trim(out);
}

namespace {

SupplementaryMaterial assemble(const std::string& article_id, Kind kind,
                               std::vector<Section> sections) {
  SupplementaryMaterial material;
  material.article_id = article_id;
  material.kind = kind;
  material.full_text = sections_full_text(sections);
  material.sections = std::move(sections);
  if (material.full_text.empty()) {
    throw ValidationError("supplement for article '" + article_id + "' has empty text");
  }
  return material;
}

void check_unresolved_covered(const std::vector<discussion::Gap>& gaps,
                              const std::vector<Section>& sections,
                              const std::string& article_id) {
  for (const auto& gap : gaps) {
    if (gap.resolved) continue;
    const bool covered = std::any_of(sections.begin(), sections.end(), [&](const Section& s) {
      return s.gap_question &&
             text::normalize_question(*s.gap_question) == gap.normalized;
    });
    if (!covered) {
      throw ValidationError("supplement for article '" + article_id +
                            "' does not address unresolved gap: " + gap.question);
    }
  }
}

}  // namespace

SupplementaryMaterial generate_discussion_supplement(
    const discussion::DiscussionTranscript& transcript, const std::vector<discussion::Gap>& gaps,
    const corpus::NewsArticle& article, llm::Provider& provider, const GeneratorOptions& options) {
  if (transcript.rounds.empty() ||
      static_cast<int>(transcript.rounds.size()) != transcript.n_rounds_config) {
    throw ValidationError("transcript for article '" + article.id + "' is incomplete");
  }

  const auto& tpl = options.system_template(memory::Stage::supplement);
  std::vector<Section> sections;

  if (!options.per_gap || gaps.empty()) {
    const std::map<std::string, std::string> bindings{
        {"article", article_binding(article)},
        {"summaries", summaries_binding(transcript)},
        {"gaps", gaps_binding(gaps)},
    };
    const llm::ChatResponse reply = provider.complete(
        chat_request(provider, memory::render_template(tpl, bindings),
                     "supplement:" + article.id, options.max_tokens));
    sections = parse_supplement_sections(reply.content, gaps);
  } else {
    // Per-gap mode: one focused completion per gap, concatenated in gap
    // order.
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const std::map<std::string, std::string> bindings{
          {"article", article_binding(article)},
          {"summaries", summaries_binding(transcript)},
          {"gaps", gaps_binding({gaps[i]})},
      };
      const llm::ChatResponse reply = provider.complete(
          chat_request(provider, memory::render_template(tpl, bindings),
                       "supplement:" + article.id + ":gap" + std::to_string(i),
                       options.max_tokens));
      for (auto& section : parse_supplement_sections(reply.content, gaps)) {
        sections.push_back(std::move(section));
      }
    }
  }

  check_unresolved_covered(gaps, sections, article.id);
  const bool any_gap_ref = std::any_of(sections.begin(), sections.end(),
                                       [](const Section& s) { return s.gap_question.has_value(); });
  if (!gaps.empty() && !any_gap_ref) {
    throw ValidationError("discussion supplement for article '" + article.id +
                          "' references no gaps");
  }
  if (gaps.empty() && !any_gap_ref) {
    std::clog << "[supplement] article '" << article.id
              << "': no gaps extracted; general sections only\n";
  }
  return assemble(article.id, Kind::discussion, std::move(sections));
}

SupplementaryMaterial generate_vanilla_supplement(const corpus::NewsArticle& article,
                                                  llm::Provider& provider,
                                                  const GeneratorOptions& options) {
  if (article.body.empty()) {
    throw ValidationError("article '" + article.id + "': body is empty");
  }
  const auto& tpl = options.system_template(memory::Stage::vanilla_supplement);
  const llm::ChatResponse reply = provider.complete(
      chat_request(provider, memory::render_template(tpl, {{"article", article_binding(article)}}),
                   "vanilla_supplement:" + article.id, options.max_tokens));
  std::vector<Section> sections = parse_supplement_sections(reply.content, {});
  return assemble(article.id, Kind::vanilla, std::move(sections));
}

// ---------------------------------------------------------------------------
// Serialization

ordered_json supplement_to_json(const SupplementaryMaterial& material) {
  ordered_json sections = ordered_json::array();
  for (const auto& s : material.sections) {
    ordered_json js{{"gap", nullptr}, {"heading", s.heading}, {"body", s.body}};
    if (s.gap_question) js["gap"] = *s.gap_question;
    sections.push_back(std::move(js));
  }
  return ordered_json{{"article_id", material.article_id},
                      {"kind", kind_name(material.kind)},
                      {"sections", std::move(sections)},
                      {"full_text", material.full_text}};
}

SupplementaryMaterial supplement_from_json(const json& doc) {
  SupplementaryMaterial material;
  try {
    material.article_id = doc.at("article_id").get<std::string>();
    material.kind = kind_from_name(doc.at("kind").get<std::string>());
    for (const auto& js : doc.at("sections")) {
      Section s;
      if (!js.at("gap").is_null()) s.gap_question = js.at("gap").get<std::string>();
      s.heading = js.at("heading").get<std::string>();
      s.body = js.at("body").get<std::string>();
      material.sections.push_back(std::move(s));
    }
    material.full_text = doc.at("full_text").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("supplement document malformed: ") + e.what());
  }
  return material;
}

}  // namespace roundtable::supplement
