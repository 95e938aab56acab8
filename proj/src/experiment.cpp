#include "roundtable/experiment.hpp"

#include <algorithm>
#include <future>
#include <optional>

namespace roundtable::experiment {

discussion::EngineOptions RunOptions::engine_options(
    const std::vector<std::string>& domain_set) const {
  discussion::EngineOptions options;
  options.retrieval_k = retrieval_k;
  options.max_tokens = max_tokens;
  options.initial_responses_in_round0 = initial_responses_in_round0;
  options.domain_set = domain_set;
  options.system_templates = system_templates;
  return options;
}

supplement::GeneratorOptions RunOptions::generator_options() const {
  supplement::GeneratorOptions options;
  options.max_tokens = max_tokens;
  options.per_gap = supplement_per_gap;
  options.system_templates = system_templates;
  return options;
}

namespace {

struct ArticleResult {
  std::optional<ArticleOutcome> outcome;
  std::optional<ArticleError> error;
};

ArticleResult process_article(const corpus::NewsArticle& input,
                              const std::vector<std::string>& domain_set,
                              const std::vector<memory::AgentProfile>& agents,
                              const RunOptions& options, llm::Provider& provider) {
  std::string stage = "segment";
  try {
    ArticleOutcome outcome;
    outcome.article = input.segments.empty()
                          ? corpus::segment_article(input, domain_set, provider)
                          : input;
    const auto engine = options.engine_options(domain_set);
    const auto generator = options.generator_options();

    stage = "discussion";
    outcome.transcript = discussion::run_discussion(agents, outcome.article, options.n_rounds,
                                                    provider, engine);
    stage = "extract_gaps";
    outcome.gaps = discussion::extract_gaps(outcome.transcript);

    stage = "discussion_supplement";
    outcome.discussion_supplement = supplement::generate_discussion_supplement(
        outcome.transcript, outcome.gaps, outcome.article, provider, generator);
    stage = "vanilla_supplement";
    outcome.vanilla_supplement =
        supplement::generate_vanilla_supplement(outcome.article, provider, generator);

    stage = "control_reads";
    eval::EmbeddingCache embeddings(provider);
    // Condition order is fixed (original, vanilla, discussion) for stable
    // logs and artifacts.
    for (const auto& agent : agents) {
      const auto original_response =
          eval::control_read(agent, outcome.article, nullptr, provider, engine);
      const auto vanilla_response = eval::control_read(
          agent, outcome.article, &outcome.vanilla_supplement, provider, engine);
      const auto discussion_response = eval::control_read(
          agent, outcome.article, &outcome.discussion_supplement, provider, engine);

      const auto original = eval::score_response(original_response, outcome.article, embeddings,
                                                 options.rouge_variant);
      const auto vanilla = eval::score_response(vanilla_response, outcome.article, embeddings,
                                                options.rouge_variant);
      const auto treated = eval::score_response(discussion_response, outcome.article, embeddings,
                                                options.rouge_variant);

      outcome.improvements.push_back(eval::improvement(original, vanilla));
      outcome.improvements.push_back(eval::improvement(original, treated));
      outcome.results.push_back(original);
      outcome.results.push_back(vanilla);
      outcome.results.push_back(treated);
    }
    return {std::move(outcome), std::nullopt};
  } catch (const std::exception& e) {
    return {std::nullopt, ArticleError{input.id, stage, e.what()}};
  }
}

}  // namespace

ExperimentRun run_experiment(const corpus::Corpus& corpus,
                             const std::vector<memory::AgentProfile>& agents,
                             const RunOptions& options, llm::Provider& provider) {
  if (corpus.articles.empty()) throw ValidationError("corpus has no articles");
  if (agents.size() < 2) throw ValidationError("experiment requires at least two agents");
  for (const auto& agent : agents) {
    if (!agent.store.fully_embedded()) {
      throw ValidationError("agent '" + agent.id + "' has un-embedded memory entries");
    }
  }

  const int jobs = std::max(1, options.jobs);
  std::vector<ArticleResult> slots(corpus.articles.size());

  // Articles are independent; process up to `jobs` at a time and stitch the
  // outputs back together in corpus order.
  std::size_t next = 0;
  while (next < corpus.articles.size()) {
    const std::size_t batch = std::min<std::size_t>(jobs, corpus.articles.size() - next);
    std::vector<std::future<ArticleResult>> futures;
    futures.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      futures.push_back(std::async(std::launch::async, [&, idx = next + i] {
        return process_article(corpus.articles[idx], corpus.domain_set, agents, options,
                               provider);
      }));
    }
    for (std::size_t i = 0; i < batch; ++i) slots[next + i] = futures[i].get();
    next += batch;
  }

  ExperimentRun run;
  for (auto& slot : slots) {
    if (slot.outcome) run.articles.push_back(std::move(*slot.outcome));
    if (slot.error) run.errors.push_back(std::move(*slot.error));
  }
  if (run.articles.empty()) {
    std::string detail;
    for (const auto& e : run.errors) detail += "\n  " + e.article_id + " [" + e.stage + "]: " + e.message;
    throw Error("every article failed:" + detail);
  }

  // Paired t tests over per-article deltas, per agent and condition. Needs
  // at least two successful articles.
  if (run.articles.size() >= 2) {
    for (const auto condition :
         {discussion::Condition::vanilla, discussion::Condition::discussion}) {
      for (const auto& agent : agents) {
        std::vector<double> deltas;
        for (const auto& outcome : run.articles) {
          for (const auto& record : outcome.improvements) {
            if (record.agent_id == agent.id && record.condition == condition) {
              deltas.push_back(record.delta_cosine);
            }
          }
        }
        if (deltas.size() >= 2) {
          run.ttests.push_back({agent.id, condition, eval::paired_t_test(deltas, options.alpha)});
        }
      }
    }
  }
  return run;
}

std::vector<SweepPoint> iteration_sweep(const corpus::Corpus& corpus,
                                        const std::vector<memory::AgentProfile>& agents,
                                        int max_rounds, const RunOptions& options,
                                        llm::Provider& provider,
                                        std::vector<ExperimentRun>* runs) {
  if (max_rounds < 1) throw ValidationError("max_rounds must be >= 1");

  std::vector<SweepPoint> series;
  for (int rounds = 1; rounds <= max_rounds; ++rounds) {
    RunOptions sub = options;
    sub.n_rounds = rounds;
    ExperimentRun run = run_experiment(corpus, agents, sub, provider);

    for (const auto& agent : agents) {
      double sum = 0.0;
      int count = 0;
      for (const auto& outcome : run.articles) {
        for (const auto& result : outcome.results) {
          if (result.agent_id == agent.id &&
              result.condition == discussion::Condition::discussion) {
            sum += result.whole_article.cosine;
            ++count;
          }
        }
      }
      if (count > 0) series.push_back({rounds, agent.id, sum / count});
    }
    if (runs) runs->push_back(std::move(run));
  }
  return series;
}

}  // namespace roundtable::experiment
