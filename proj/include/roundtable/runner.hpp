#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "roundtable/config.hpp"
#include "roundtable/experiment.hpp"

namespace roundtable::runner {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct CliOverrides {
  std::optional<llm::ProviderMode> mode;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::string> run_id;
  std::optional<int> jobs;
};

/// Writes every artifact of a finished run under `run_dir`: transcripts,
/// supplements, result/improvement/ttest CSVs, the three report tables, and
/// an error record when articles failed. Returns run_dir-relative paths.
std::vector<std::string> write_run_artifacts(const std::filesystem::path& run_dir,
                                             const experiment::ExperimentRun& run,
                                             const std::vector<std::string>& agent_order,
                                             const std::string& run_id);

/// Writes sweep series CSV (columns round, agent_id, mean_cosine).
std::string write_sweep_series(const std::filesystem::path& run_dir,
                               const std::vector<experiment::SweepPoint>& series,
                               const std::string& run_id);

/// manifest.json over the given run_dir-relative files: path, sha256, size.
void write_manifest(const std::filesystem::path& run_dir, const std::string& run_id,
                    std::vector<std::string> relative_paths);

int cmd_validate(const std::filesystem::path& config_path, std::ostream& out);
int cmd_run(const std::filesystem::path& config_path, const CliOverrides& overrides,
            std::ostream& out);
int cmd_sweep(const std::filesystem::path& config_path, const CliOverrides& overrides,
              std::ostream& out);
int cmd_record(const std::filesystem::path& config_path, const CliOverrides& overrides,
               std::ostream& out);

}  // namespace roundtable::runner
