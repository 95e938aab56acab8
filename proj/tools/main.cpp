#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "roundtable/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"roundtable: multi-agent news discussion, supplements, and scoring"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode;
  std::string output_dir;
  std::string run_id;
  int jobs = -1;

  auto add_common = [&](CLI::App* cmd, bool with_overrides) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
    if (with_overrides) {
      cmd->add_option("--mode", mode, "provider mode: live|replay|record");
      cmd->add_option("--output-dir", output_dir, "override output directory");
      cmd->add_option("--run-id", run_id, "override run id");
      cmd->add_option("--jobs", jobs, "articles processed concurrently");
    }
  };

  auto* validate = app.add_subcommand("validate", "check a config and its referenced files");
  add_common(validate, false);
  auto* run = app.add_subcommand("run", "run the full experiment pipeline");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "run the pipeline at every round count");
  add_common(sweep, true);
  auto* record = app.add_subcommand("record", "run live and persist replay fixtures");
  add_common(record, true);

  CLI11_PARSE(app, argc, argv);

  roundtable::runner::CliOverrides overrides;
  try {
    if (!mode.empty()) overrides.mode = roundtable::llm::mode_from_name(mode);
  } catch (const roundtable::Error& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return roundtable::runner::kExitValidation;
  }
  if (!output_dir.empty()) overrides.output_dir = output_dir;
  if (!run_id.empty()) overrides.run_id = run_id;
  if (jobs >= 0) overrides.jobs = jobs;

  if (validate->parsed()) return roundtable::runner::cmd_validate(config_path, std::cout);
  if (run->parsed()) return roundtable::runner::cmd_run(config_path, overrides, std::cout);
  if (sweep->parsed()) return roundtable::runner::cmd_sweep(config_path, overrides, std::cout);
  if (record->parsed()) return roundtable::runner::cmd_record(config_path, overrides, std::cout);
  return roundtable::runner::kExitRuntime;
}
