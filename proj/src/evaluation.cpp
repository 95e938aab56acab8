#include "roundtable/evaluation.hpp"

#include <algorithm>

#include "roundtable/io.hpp"
#include "roundtable/text.hpp"

namespace roundtable::eval {

const std::vector<double>& EmbeddingCache::get(const std::string& text) {
  if (text.empty()) throw ValidationError("cannot embed empty text");
  const std::string key = io::sha256_hex(text);
  {
    std::lock_guard lock(mutex_);
    auto it = by_hash_.find(key);
    if (it != by_hash_.end()) return it->second;
  }
  std::vector<double> values = provider_.embed({text}).front().values;
  std::lock_guard lock(mutex_);
  // std::map nodes are stable, so returned references survive later inserts.
  return by_hash_.emplace(key, std::move(values)).first->second;
}

namespace {

ScorePair score_texts(const std::string& candidate, const std::string& reference,
                      EmbeddingCache& embeddings, RougeVariant variant) {
  ScorePair pair;
  pair.cosine = cosine_similarity(embeddings.get(candidate), embeddings.get(reference));
  const RougeScore r = rouge(variant, candidate, reference);
  pair.rouge_f1 = r.f1;
  pair.rouge_precision = r.precision;
  pair.rouge_recall = r.recall;
  return pair;
}

}  // namespace

EvaluationResult score_response(const discussion::ComprehensionResponse& response,
                                const corpus::NewsArticle& article, EmbeddingCache& embeddings,
                                RougeVariant variant) {
  if (text::trim(response.whole_text).empty()) {
    throw ValidationError("response from agent '" + response.agent_id + "' has empty whole_text");
  }
  if (article.body.empty()) {
    throw ValidationError("article '" + article.id + "': body is empty");
  }

  EvaluationResult result;
  result.agent_id = response.agent_id;
  result.article_id = article.id;
  result.condition = response.condition;
  result.whole_article = score_texts(response.whole_text, article.body, embeddings, variant);

  // Reference text per label: concatenation of that label's segments in
  // article order (articles normally carry one segment per label).
  std::map<std::string, std::string> reference_by_label;
  for (const auto& seg : article.segments) {
    auto& ref = reference_by_label[seg.domain_label];
    if (!ref.empty()) ref += "\n\n";
    ref += seg.text;
  }

  for (const auto& [label, reference] : reference_by_label) {
    auto it = response.per_segment_texts.find(label);
    const bool missing = it == response.per_segment_texts.end() || text::trim(it->second).empty();
    const std::string& candidate = missing ? response.whole_text : it->second;
    result.per_segment[label] = score_texts(candidate, reference, embeddings, variant);
    if (missing) result.fallback_segments.insert(label);
  }
  return result;
}

discussion::ComprehensionResponse control_read(
    const memory::AgentProfile& agent, const corpus::NewsArticle& article,
    const supplement::SupplementaryMaterial* supplement_material, llm::Provider& provider,
    const discussion::EngineOptions& options) {
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

  const std::vector<std::string> labels = discussion::segment_labels_of(article);
  const std::map<std::string, std::string> bindings{
      {"persona", agent.persona},
      {"article", article.title + "\n\n" + article.body},
      {"supplement", supplement_material ? supplement_material->full_text : "(none provided)"},
      {"semantic_context", discussion::semantic_context_binding(semantic)},
      {"episodic_context", discussion::episodic_context_binding(episodic)},
      {"domains", text::join(labels, ", ")},
  };
  const std::string prompt =
      memory::render_procedure(agent.store, memory::Stage::control_read, bindings);

  discussion::Condition condition = discussion::Condition::original;
  if (supplement_material) {
    condition = supplement_material->kind == supplement::Kind::discussion
                    ? discussion::Condition::discussion
                    : discussion::Condition::vanilla;
  }

  llm::ChatRequest request;
  request.model_name = provider.config().chat_model;
  request.max_tokens = options.max_tokens;
  request.request_tag = "control_read:" + article.id + ":" + agent.id + ":" +
                        std::string(condition_name(condition));
  request.messages = {{llm::Role::user, prompt}};
  const llm::ChatResponse reply = provider.complete(request);

  discussion::ComprehensionResponse response = discussion::parse_read_response(
      reply.content, labels, options.domain_set.empty() ? labels : options.domain_set);
  response.agent_id = agent.id;
  response.article_id = article.id;
  response.condition = condition;
  return response;
}

ImprovementRecord improvement(const EvaluationResult& original, const EvaluationResult& treated) {
  if (original.agent_id != treated.agent_id || original.article_id != treated.article_id) {
    throw ValidationError("improvement: mismatched agent or article ids (" + original.agent_id +
                          "/" + original.article_id + " vs " + treated.agent_id + "/" +
                          treated.article_id + ")");
  }
  if (treated.condition == original.condition) {
    throw ValidationError("improvement: treated condition equals original condition");
  }
  ImprovementRecord record;
  record.agent_id = treated.agent_id;
  record.article_id = treated.article_id;
  record.condition = treated.condition;
  record.delta_cosine = treated.whole_article.cosine - original.whole_article.cosine;
  return record;
}

}  // namespace roundtable::eval
