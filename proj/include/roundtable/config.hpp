#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roundtable/corpus.hpp"
#include "roundtable/experiment.hpp"
#include "roundtable/llm_provider.hpp"

namespace roundtable::config {

/// One structured document describing a full experiment. Relative paths are
/// resolved against the config file's directory.
struct ExperimentConfig {
  std::filesystem::path corpus_path;
  std::vector<std::filesystem::path> agent_profile_paths;
  std::vector<std::string> domain_set = corpus::default_domain_set();
  int n_rounds = 3;
  int max_rounds_sweep = 3;
  int retrieval_k = 5;
  int max_tokens = 1024;
  eval::RougeVariant rouge_variant = eval::RougeVariant::rouge_l;
  double alpha = 0.05;
  std::filesystem::path output_dir = "out";
  std::string run_id = "run";
  int jobs = 0;  // 0: number of processors capped by the provider limiter
  bool initial_responses_in_round0 = true;
  bool supplement_per_gap = false;
  llm::ProviderConfig provider;

  experiment::RunOptions run_options() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// Effective configuration with every default made explicit.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

/// Collects every problem instead of stopping at the first: schema ranges,
/// referenced paths, domain consistency between corpus and agents.
ValidationReport validate_config(const ExperimentConfig& config);

}  // namespace roundtable::config
