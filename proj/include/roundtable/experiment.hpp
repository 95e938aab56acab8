#pragma once

#include <string>
#include <vector>

#include "roundtable/evaluation.hpp"

namespace roundtable::experiment {

struct RunOptions {
  int n_rounds = 3;
  int retrieval_k = 5;
  int max_tokens = 1024;
  double alpha = 0.05;
  eval::RougeVariant rouge_variant = eval::RougeVariant::rouge_l;
  bool initial_responses_in_round0 = true;
  bool supplement_per_gap = false;
  int jobs = 1;  // articles processed concurrently
  memory::MemoryStore system_templates;

  discussion::EngineOptions engine_options(const std::vector<std::string>& domain_set) const;
  supplement::GeneratorOptions generator_options() const;
};

struct ArticleError {
  std::string article_id;
  std::string stage;  // which pipeline step failed
  std::string message;
};

/// Everything the pipeline produced for one article.
struct ArticleOutcome {
  corpus::NewsArticle article;  // segmented form actually used
  discussion::DiscussionTranscript transcript;
  std::vector<discussion::Gap> gaps;
  supplement::SupplementaryMaterial discussion_supplement;
  supplement::SupplementaryMaterial vanilla_supplement;
  std::vector<eval::EvaluationResult> results;  // |agents| x 3 conditions
  std::vector<eval::ImprovementRecord> improvements;  // |agents| x 2
};

struct TTestRow {
  std::string agent_id;
  discussion::Condition condition = discussion::Condition::vanilla;
  eval::TTestResult test;
};

struct ExperimentRun {
  std::vector<ArticleOutcome> articles;  // corpus order, successes only
  std::vector<ArticleError> errors;
  std::vector<TTestRow> ttests;  // present when >= 2 articles succeeded
};

/// Full protocol per article: discussion, both supplements, control reads
/// under all three conditions, scoring, improvement deltas; then t tests
/// across articles. Failing articles are recorded and skipped; throws only
/// when every article failed.
ExperimentRun run_experiment(const corpus::Corpus& corpus,
                             const std::vector<memory::AgentProfile>& agents,
                             const RunOptions& options, llm::Provider& provider);

struct SweepPoint {
  int rounds = 0;
  std::string agent_id;
  double mean_cosine = 0.0;  // discussion condition, whole article
};

/// Runs the pipeline at n_rounds = 1..max_rounds and reports the mean
/// discussion-condition cosine per agent at each setting. `runs`, when
/// non-null, receives each sub-run for artifact persistence.
std::vector<SweepPoint> iteration_sweep(const corpus::Corpus& corpus,
                                        const std::vector<memory::AgentProfile>& agents,
                                        int max_rounds, const RunOptions& options,
                                        llm::Provider& provider,
                                        std::vector<ExperimentRun>* runs = nullptr);

}  // namespace roundtable::experiment
