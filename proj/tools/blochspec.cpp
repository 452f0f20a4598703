#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "blochspec/cli/config.hpp"
#include "blochspec/cli/run.hpp"

using namespace blochspec;

int main(int argc, char** argv) {
  CLI::App app{"Spectra of periodic differential operators by Hill's method and Evans functions"};
  std::string task, config_path, out_dir;
  bool no_cache = false;
  int threads = 1;
  app.add_option("task", task, "spectrum | evans-eval | roots | converge | oracle-compare | validate")
      ->required()
      ->check(CLI::IsMember(cli::kTasks));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_flag("--no-cache", no_cache, "recompute even if a cached result exists");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  std::optional<cli::RunConfig> config;
  try {
    config.emplace(cli::parse_config(config_path, task));
  } catch (const Error& e) {
    std::cerr << "blochspec: " << e.what() << "\n";
    return cli::kExitConfig;
  }
  cli::RunOptions options;
  options.use_cache = !no_cache;
  options.threads = threads;
  if (!out_dir.empty()) options.out_dir = out_dir;
  options.log = &std::cerr;
  const cli::RunOutcome outcome = cli::run(*config, options);
  for (const auto& [name, content] : outcome.files) std::cout << (outcome.out_dir / name).string() << "\n";
  if (outcome.exit_code != cli::kExitOk && !outcome.files.empty())
    std::cerr << "blochspec: exit " << outcome.exit_code << ": " << outcome.message << "\n";
  return outcome.exit_code;
}
