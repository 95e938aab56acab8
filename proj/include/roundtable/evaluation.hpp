#pragma once

#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "roundtable/discussion.hpp"
#include "roundtable/metrics.hpp"
#include "roundtable/supplement.hpp"

namespace roundtable::eval {

struct ScorePair {
  double cosine = 0.0;
  double rouge_f1 = 0.0;
  double rouge_precision = 0.0;
  double rouge_recall = 0.0;
};

struct EvaluationResult {
  std::string agent_id;
  std::string article_id;
  discussion::Condition condition = discussion::Condition::original;
  ScorePair whole_article;
  std::map<std::string, ScorePair> per_segment;  // keyed by segment label
  /// Labels whose score fell back to whole_text (the response had no
  /// matching SEGMENT block).
  std::set<std::string> fallback_segments;
};

struct ImprovementRecord {
  std::string agent_id;
  std::string article_id;
  discussion::Condition condition = discussion::Condition::vanilla;
  double delta_cosine = 0.0;  // treated minus original, whole-article
};

struct TTestResult {
  int n = 0;
  double mean_delta = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool significant = false;
  /// Zero sample variance with nonzero mean: t is infinite, p pinned to 0.
  bool degenerate = false;
};

/// CDF of the Student t distribution, via the regularized incomplete beta
/// function. Exposed so tests can cross-check it against a reference.
double student_t_cdf(double t, double degrees_of_freedom);

/// One-sample two-tailed t test of the deltas against mean zero (the paired
/// test on score pairs). Sample standard deviation uses the n-1 denominator.
TTestResult paired_t_test(const std::vector<double>& deltas, double alpha = 0.05);

/// One embedding call per distinct text, keyed by content hash. Thread-safe.
class EmbeddingCache {
public:
  explicit EmbeddingCache(llm::Provider& provider) : provider_(provider) {}
  const std::vector<double>& get(const std::string& text);

private:
  llm::Provider& provider_;
  std::mutex mutex_;
  std::map<std::string, std::vector<double>> by_hash_;
};

/// Whole-article and per-segment cosine + ROUGE scores for one response.
/// Missing per-segment answers are scored from whole_text and flagged.
EvaluationResult score_response(const discussion::ComprehensionResponse& response,
                                const corpus::NewsArticle& article, EmbeddingCache& embeddings,
                                RougeVariant variant = RougeVariant::rouge_l);

/// Control-group reading: the article plus (optionally) a supplement,
/// prompted like the independent read. Condition comes from the supplement
/// kind; no supplement means the original condition.
discussion::ComprehensionResponse control_read(
    const memory::AgentProfile& agent, const corpus::NewsArticle& article,
    const supplement::SupplementaryMaterial* supplement_material, llm::Provider& provider,
    const discussion::EngineOptions& options = {});

/// delta = treated whole-article cosine minus original whole-article cosine.
ImprovementRecord improvement(const EvaluationResult& original, const EvaluationResult& treated);

}  // namespace roundtable::eval
