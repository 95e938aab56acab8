#include "roundtable/runner.hpp"

#include <algorithm>
#include <thread>

#include "roundtable/io.hpp"
#include "roundtable/report.hpp"
#include "roundtable/text.hpp"

namespace roundtable::runner {

using nlohmann::ordered_json;

namespace {

std::string score_csv(double v) { return text::format_fixed(v, 6); }

std::string results_csv(const experiment::ExperimentRun& run) {
  std::string out =
      "article_id,agent_id,condition,scope,cosine,rouge_f1,rouge_precision,rouge_recall,"
      "fallback\n";
  auto row = [&](const eval::EvaluationResult& r, const std::string& scope,
                 const eval::ScorePair& s, bool fallback) {
    out += text::csv_field(r.article_id) + "," + text::csv_field(r.agent_id) + "," +
           std::string(condition_name(r.condition)) + "," + text::csv_field(scope) + "," +
           score_csv(s.cosine) + "," + score_csv(s.rouge_f1) + "," + score_csv(s.rouge_precision) +
           "," + score_csv(s.rouge_recall) + "," + (fallback ? "true" : "false") + "\n";
  };
  for (const auto& outcome : run.articles) {
    for (const auto& result : outcome.results) {
      row(result, "whole", result.whole_article, false);
      for (const auto& [label, score] : result.per_segment) {
        row(result, "segment:" + label, score, result.fallback_segments.count(label) > 0);
      }
    }
  }
  return out;
}

std::string improvements_csv(const experiment::ExperimentRun& run) {
  std::string out = "article_id,agent_id,condition,delta_cosine\n";
  for (const auto& outcome : run.articles) {
    for (const auto& rec : outcome.improvements) {
      out += text::csv_field(rec.article_id) + "," + text::csv_field(rec.agent_id) + "," +
             std::string(condition_name(rec.condition)) + "," + score_csv(rec.delta_cosine) + "\n";
    }
  }
  return out;
}

std::string ttests_csv(const experiment::ExperimentRun& run) {
  std::string out = "agent_id,condition,n,mean_delta,t_statistic,p_value,significant,degenerate\n";
  for (const auto& row : run.ttests) {
    out += text::csv_field(row.agent_id) + "," + std::string(condition_name(row.condition)) + "," +
           std::to_string(row.test.n) + "," + score_csv(row.test.mean_delta) + "," +
           score_csv(row.test.t_statistic) + "," + score_csv(row.test.p_value) + "," +
           (row.test.significant ? "true" : "false") + "," +
           (row.test.degenerate ? "true" : "false") + "\n";
  }
  return out;
}

std::vector<eval::EvaluationResult> all_results(const experiment::ExperimentRun& run) {
  std::vector<eval::EvaluationResult> results;
  for (const auto& outcome : run.articles) {
    results.insert(results.end(), outcome.results.begin(), outcome.results.end());
  }
  return results;
}

std::vector<eval::ImprovementRecord> all_improvements(const experiment::ExperimentRun& run) {
  std::vector<eval::ImprovementRecord> improvements;
  for (const auto& outcome : run.articles) {
    improvements.insert(improvements.end(), outcome.improvements.begin(),
                        outcome.improvements.end());
  }
  return improvements;
}

int effective_jobs(const config::ExperimentConfig& config) {
  if (config.jobs > 0) return config.jobs;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(
      std::min<unsigned>(hw, static_cast<unsigned>(std::max(1, config.provider.max_concurrent))));
}

config::ExperimentConfig load_with_overrides(const std::filesystem::path& config_path,
                                             const CliOverrides& overrides) {
  config::ExperimentConfig config = config::load_config(config_path);
  if (overrides.mode) config.provider.mode = *overrides.mode;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.run_id) config.run_id = *overrides.run_id;
  if (overrides.jobs) config.jobs = *overrides.jobs;
  return config;
}

struct PreparedExperiment {
  corpus::Corpus corpus;
  std::vector<memory::AgentProfile> agents;
  std::vector<std::string> agent_order;
  experiment::RunOptions options;
};

PreparedExperiment prepare(const config::ExperimentConfig& config, llm::Provider& provider) {
  PreparedExperiment prepared;
  prepared.corpus = corpus::load_corpus(config.corpus_path, config.domain_set);
  for (const auto& path : config.agent_profile_paths) {
    memory::AgentProfile profile = memory::load_profile(path, config.domain_set);
    profile.store = memory::embed_store(profile.store, provider);
    prepared.agent_order.push_back(profile.id);
    prepared.agents.push_back(std::move(profile));
  }
  prepared.options = config.run_options();
  prepared.options.jobs = effective_jobs(config);
  return prepared;
}

}  // namespace

std::vector<std::string> write_run_artifacts(const std::filesystem::path& run_dir,
                                             const experiment::ExperimentRun& run,
                                             const std::vector<std::string>& agent_order,
                                             const std::string& run_id) {
  std::vector<std::string> written;
  auto put = [&](const std::string& relative, const std::string& content) {
    io::write_file_atomic(run_dir / relative, content);
    written.push_back(relative);
  };

  for (const auto& outcome : run.articles) {
    put("transcript_" + outcome.article.id + ".json",
        discussion::transcript_to_json(outcome.transcript).dump(2) + "\n");
    put("supplement_discussion_" + outcome.article.id + ".json",
        supplement::supplement_to_json(outcome.discussion_supplement).dump(2) + "\n");
    put("supplement_vanilla_" + outcome.article.id + ".json",
        supplement::supplement_to_json(outcome.vanilla_supplement).dump(2) + "\n");
  }

  put("results_" + run_id + ".csv", results_csv(run));
  put("improvements_" + run_id + ".csv", improvements_csv(run));
  put("ttests_" + run_id + ".csv", ttests_csv(run));

  const auto results = all_results(run);
  const auto improvements = all_improvements(run);
  const auto conditions_table = report::table_conditions_by_agent(results, agent_order);
  const auto granular_table = report::table_granular(results, agent_order);
  const auto improvements_table =
      report::table_improvements(improvements, run.ttests, agent_order);
  report::emit(conditions_table, report::EmitFormat::csv,
               run_dir / ("table_conditions_" + run_id + ".csv"));
  report::emit(granular_table, report::EmitFormat::csv,
               run_dir / ("table_granular_" + run_id + ".csv"));
  report::emit(improvements_table, report::EmitFormat::csv,
               run_dir / ("table_improvements_" + run_id + ".csv"));
  written.push_back("table_conditions_" + run_id + ".csv");
  written.push_back("table_granular_" + run_id + ".csv");
  written.push_back("table_improvements_" + run_id + ".csv");

  if (!run.errors.empty()) {
    ordered_json errors = ordered_json::array();
    for (const auto& e : run.errors) {
      errors.push_back(ordered_json{
          {"article_id", e.article_id}, {"stage", e.stage}, {"message", e.message}});
    }
    put("errors_" + run_id + ".json", errors.dump(2) + "\n");
  }
  return written;
}

std::string write_sweep_series(const std::filesystem::path& run_dir,
                               const std::vector<experiment::SweepPoint>& series,
                               const std::string& run_id) {
  std::string out = "round,agent_id,mean_cosine\n";
  for (const auto& point : series) {
    out += std::to_string(point.rounds) + "," + text::csv_field(point.agent_id) + "," +
           score_csv(point.mean_cosine) + "\n";
  }
  const std::string name = "sweep_" + run_id + ".csv";
  io::write_file_atomic(run_dir / name, out);
  return name;
}

void write_manifest(const std::filesystem::path& run_dir, const std::string& run_id,
                    std::vector<std::string> relative_paths) {
  std::sort(relative_paths.begin(), relative_paths.end());
  ordered_json artifacts = ordered_json::array();
  for (const auto& rel : relative_paths) {
    const std::string bytes = io::read_file(run_dir / rel);
    artifacts.push_back(ordered_json{
        {"path", rel}, {"sha256", io::sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  ordered_json manifest{{"run_id", run_id}, {"artifacts", std::move(artifacts)}};
  io::write_file_atomic(run_dir / "manifest.json", manifest.dump(2) + "\n");
}

int cmd_validate(const std::filesystem::path& config_path, std::ostream& out) {
  config::ExperimentConfig config;
  try {
    config = config::load_config(config_path);
  } catch (const Error& e) {
    out << "ERROR: " << e.what() << "\n";
    return kExitValidation;
  }
  out << "effective configuration:\n" << config::config_to_json(config).dump(2) << "\n";
  const auto report = config::validate_config(config);
  for (const auto& error : report.errors) out << "ERROR: " << error << "\n";
  if (!report.ok()) {
    out << report.errors.size() << " error(s)\n";
    return kExitValidation;
  }
  out << "OK\n";
  return kExitOk;
}

namespace {

int run_pipeline(const std::filesystem::path& config_path, const CliOverrides& overrides,
                 std::ostream& out, bool sweep) {
  config::ExperimentConfig config;
  try {
    config = load_with_overrides(config_path, overrides);
  } catch (const Error& e) {
    out << "ERROR: " << e.what() << "\n";
    return kExitValidation;
  }
  const auto report = config::validate_config(config);
  if (!report.ok()) {
    for (const auto& error : report.errors) out << "ERROR: " << error << "\n";
    return kExitValidation;
  }

  try {
    llm::Provider provider(config.provider);
    const PreparedExperiment prepared = prepare(config, provider);
    const std::filesystem::path run_dir = config.output_dir / config.run_id;
    std::vector<std::string> written;

    if (!sweep) {
      const auto run =
          experiment::run_experiment(prepared.corpus, prepared.agents, prepared.options, provider);
      written = write_run_artifacts(run_dir, run, prepared.agent_order, config.run_id);
      for (const auto& e : run.errors) {
        out << "article " << e.article_id << " failed at " << e.stage << ": " << e.message
            << "\n";
      }
      out << "articles ok: " << run.articles.size() << ", failed: " << run.errors.size() << "\n";
    } else {
      std::vector<experiment::ExperimentRun> runs;
      const auto series = experiment::iteration_sweep(prepared.corpus, prepared.agents,
                                                      config.max_rounds_sweep, prepared.options,
                                                      provider, &runs);
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string round_dir = "round_" + std::to_string(i + 1);
        const auto sub = write_run_artifacts(run_dir / round_dir, runs[i], prepared.agent_order,
                                             config.run_id);
        for (const auto& rel : sub) written.push_back(round_dir + "/" + rel);
      }
      written.push_back(write_sweep_series(run_dir, series, config.run_id));
      out << "sweep rounds: " << runs.size() << "\n";
    }

    write_manifest(run_dir, config.run_id, std::move(written));
    out << "run directory: " << run_dir.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    out << "ERROR: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const CliOverrides& overrides,
            std::ostream& out) {
  return run_pipeline(config_path, overrides, out, /*sweep=*/false);
}

int cmd_sweep(const std::filesystem::path& config_path, const CliOverrides& overrides,
              std::ostream& out) {
  return run_pipeline(config_path, overrides, out, /*sweep=*/true);
}

int cmd_record(const std::filesystem::path& config_path, const CliOverrides& overrides,
               std::ostream& out) {
  CliOverrides forced = overrides;
  forced.mode = llm::ProviderMode::record;
  return run_pipeline(config_path, forced, out, /*sweep=*/false);
}

}  // namespace roundtable::runner
