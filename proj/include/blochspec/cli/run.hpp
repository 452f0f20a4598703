#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "blochspec/cli/config.hpp"
#include "blochspec/cli/output.hpp"

namespace blochspec::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitPartial = 4,
};

struct RunOptions {
  bool use_cache = true;
  int threads = 1;
  std::optional<std::filesystem::path> out_dir;    // overrides output.dir
  std::optional<std::filesystem::path> cache_dir;  // overrides ResultCache::default_root()
  std::ostream* log = nullptr;
};

struct RunOutcome {
  int exit_code = kExitOk;
  bool cached = false;
  std::filesystem::path out_dir;
  Artifacts files;
  std::string message;  // summary line or error text
};

// Runs the task without touching the disk. Files are filtered by the
// configured formats; status is kExitOk, kExitPartial or kExitNumerical.
struct ComputeResult {
  int status = kExitOk;
  Artifacts files;
  std::string summary;
};
ComputeResult compute(const RunConfig& config, int threads = 1);

// compute() plus ResultCache lookup/store and atomic writes into the output
// directory. Library errors are mapped to exit codes, never thrown.
RunOutcome run(const RunConfig& config, const RunOptions& options = {});

}  // namespace blochspec::cli
