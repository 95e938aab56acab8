#include "roundtable/config.hpp"

#include <set>

#include "roundtable/agent_memory.hpp"
#include "roundtable/io.hpp"

namespace roundtable::config {

using nlohmann::json;
using nlohmann::ordered_json;

experiment::RunOptions ExperimentConfig::run_options() const {
  experiment::RunOptions options;
  options.n_rounds = n_rounds;
  options.retrieval_k = retrieval_k;
  options.max_tokens = max_tokens;
  options.alpha = alpha;
  options.rouge_variant = rouge_variant;
  options.initial_responses_in_round0 = initial_responses_in_round0;
  options.supplement_per_gap = supplement_per_gap;
  options.jobs = jobs;
  return options;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, std::filesystem::path p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }

  const std::filesystem::path base = path.parent_path();
  ExperimentConfig config;
  try {
    config.corpus_path = resolve(base, doc.at("corpus_path").get<std::string>());
    for (const auto& p : doc.at("agent_profiles")) {
      config.agent_profile_paths.push_back(resolve(base, p.get<std::string>()));
    }
    if (doc.contains("domain_set")) {
      config.domain_set = doc.at("domain_set").get<std::vector<std::string>>();
    }
    config.n_rounds = doc.value("n_rounds", config.n_rounds);
    config.max_rounds_sweep = doc.value("max_rounds_sweep", config.max_rounds_sweep);
    config.retrieval_k = doc.value("retrieval_k", config.retrieval_k);
    config.max_tokens = doc.value("max_tokens", config.max_tokens);
    if (doc.contains("rouge_variant")) {
      config.rouge_variant =
          eval::rouge_variant_from_name(doc.at("rouge_variant").get<std::string>());
    }
    config.alpha = doc.value("alpha", config.alpha);
    if (doc.contains("output_dir")) {
      config.output_dir = resolve(base, doc.at("output_dir").get<std::string>());
    }
    config.run_id = doc.value("run_id", config.run_id);
    config.jobs = doc.value("jobs", config.jobs);
    config.initial_responses_in_round0 =
        doc.value("initial_responses_in_round0", config.initial_responses_in_round0);
    config.supplement_per_gap = doc.value("supplement_per_gap", config.supplement_per_gap);

    if (doc.contains("provider")) {
      const auto& p = doc.at("provider");
      auto& provider = config.provider;
      provider.base_url = p.value("base_url", provider.base_url);
      provider.path_prefix = p.value("path_prefix", provider.path_prefix);
      provider.api_key_env = p.value("api_key_env", provider.api_key_env);
      provider.chat_model = p.value("chat_model", provider.chat_model);
      provider.embedding_model = p.value("embedding_model", provider.embedding_model);
      provider.timeout = std::chrono::milliseconds(
          p.value("timeout_ms", static_cast<long>(provider.timeout.count())));
      if (p.contains("retry")) {
        provider.retry.max_attempts =
            p.at("retry").value("max_attempts", provider.retry.max_attempts);
        provider.retry.base_backoff = std::chrono::milliseconds(p.at("retry").value(
            "base_backoff_ms", static_cast<long>(provider.retry.base_backoff.count())));
      }
      if (p.contains("mode")) {
        provider.mode = llm::mode_from_name(p.at("mode").get<std::string>());
      }
      if (p.contains("fixture_dir")) {
        provider.fixture_dir = resolve(base, p.at("fixture_dir").get<std::string>());
      }
      provider.cache_enabled = p.value("cache", provider.cache_enabled);
      provider.max_concurrent = p.value("max_concurrent", provider.max_concurrent);
    }
  } catch (const json::exception& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  return config;
}

ordered_json config_to_json(const ExperimentConfig& config) {
  ordered_json profiles = ordered_json::array();
  for (const auto& p : config.agent_profile_paths) profiles.push_back(p.string());
  return ordered_json{
      {"corpus_path", config.corpus_path.string()},
      {"agent_profiles", std::move(profiles)},
      {"domain_set", config.domain_set},
      {"n_rounds", config.n_rounds},
      {"max_rounds_sweep", config.max_rounds_sweep},
      {"retrieval_k", config.retrieval_k},
      {"max_tokens", config.max_tokens},
      {"rouge_variant", eval::rouge_variant_name(config.rouge_variant)},
      {"alpha", config.alpha},
      {"output_dir", config.output_dir.string()},
      {"run_id", config.run_id},
      {"jobs", config.jobs},
      {"initial_responses_in_round0", config.initial_responses_in_round0},
      {"supplement_per_gap", config.supplement_per_gap},
      {"provider",
       {{"mode", llm::mode_name(config.provider.mode)},
        {"base_url", config.provider.base_url},
        {"path_prefix", config.provider.path_prefix},
        {"api_key_env", config.provider.api_key_env},
        {"chat_model", config.provider.chat_model},
        {"embedding_model", config.provider.embedding_model},
        {"timeout_ms", config.provider.timeout.count()},
        {"retry",
         {{"max_attempts", config.provider.retry.max_attempts},
          {"base_backoff_ms", config.provider.retry.base_backoff.count()}}},
        {"fixture_dir", config.provider.fixture_dir.string()},
        {"cache", config.provider.cache_enabled},
        {"max_concurrent", config.provider.max_concurrent}}}};
}

ValidationReport validate_config(const ExperimentConfig& config) {
  ValidationReport report;
  auto err = [&](std::string message) { report.errors.push_back(std::move(message)); };

  if (config.n_rounds < 1) err("n_rounds must be >= 1");
  if (config.max_rounds_sweep < 1) err("max_rounds_sweep must be >= 1");
  if (config.retrieval_k < 1) err("retrieval_k must be >= 1");
  if (config.max_tokens < 1) err("max_tokens must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) err("alpha must lie in (0, 1)");
  if (config.run_id.empty()) err("run_id must not be empty");
  if (config.jobs < 0) err("jobs must be >= 0");
  if (config.provider.retry.max_attempts < 1) err("provider.retry.max_attempts must be >= 1");

  if (config.domain_set.empty()) err("domain_set must not be empty");
  std::set<std::string> unique_domains(config.domain_set.begin(), config.domain_set.end());
  if (unique_domains.size() != config.domain_set.size()) err("domain_set contains duplicates");

  if (config.provider.mode != llm::ProviderMode::live && config.provider.fixture_dir.empty()) {
    err("provider.fixture_dir is required in " +
        std::string(llm::mode_name(config.provider.mode)) + " mode");
  }
  if (config.provider.mode == llm::ProviderMode::replay &&
      !config.provider.fixture_dir.empty() &&
      !std::filesystem::is_directory(config.provider.fixture_dir)) {
    err("fixture directory does not exist: " + config.provider.fixture_dir.string());
  }

  corpus::Corpus loaded_corpus;
  bool corpus_ok = false;
  if (!std::filesystem::exists(config.corpus_path)) {
    err("corpus file does not exist: " + config.corpus_path.string());
  } else {
    try {
      loaded_corpus = corpus::load_corpus(config.corpus_path, config.domain_set);
      corpus_ok = true;
    } catch (const Error& e) {
      err(std::string("corpus: ") + e.what());
    }
  }

  if (config.agent_profile_paths.size() < 2) err("at least two agent profiles are required");
  std::set<std::string> agent_ids;
  for (const auto& path : config.agent_profile_paths) {
    if (!std::filesystem::exists(path)) {
      err("agent profile does not exist: " + path.string());
      continue;
    }
    try {
      const auto profile = memory::load_profile(path, config.domain_set);
      if (!agent_ids.insert(profile.id).second) {
        err("duplicate agent id '" + profile.id + "' (" + path.string() + ")");
      }
    } catch (const Error& e) {
      err(std::string("profile ") + path.string() + ": " + e.what());
    }
  }

  if (corpus_ok && loaded_corpus.articles.empty()) {
    err("corpus has no articles");
  }
  return report;
}

}  // namespace roundtable::config
