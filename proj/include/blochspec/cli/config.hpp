#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blochspec/fredholm.hpp"
#include "blochspec/operator_model.hpp"
#include "blochspec/winding.hpp"

namespace blochspec::cli {

// Bumped whenever numerical output for an unchanged config may change.
inline constexpr const char* kVersionTag = "blochspec-1.0.0";

inline const std::vector<std::string> kTasks = {"spectrum", "roots",          "evans-eval",
                                                "converge", "oracle-compare", "validate"};

struct LambdaGrid {
  double re_min = -3.0, re_max = 3.0;
  double im_min = -3.0, im_max = 3.0;
  int re_points = 41, im_points = 41;
};

// Task parameters. Only the fields of the selected task are read and echoed.
struct TaskParams {
  std::vector<double> sigmas;  // spectrum, oracle-compare
  double sigma = 0.0;          // evans-eval, roots, converge
  int J = 16;
  std::vector<int> J_list;  // converge
  int J_ref = 0;
  double R = 4.0;
  int probes = 16;
  std::uint64_t seed = 0;
  std::string study = "both";  // converge: evans | spectral | both
  std::string variant = "auto";  // auto | standard | principal
  Det2Path det2_path = Det2Path::eigenvalues;
  LambdaGrid grid;
  Rectangle region{cplx(-5.0, -5.0), cplx(5.0, 5.0)};
  double min_box = 1e-6;
  double ode_tol = 1e-12;
  double tolerance = 1e-6;  // oracle-compare agreement threshold
  int grid_n = 256;         // validate
};

struct RunConfig {
  std::string task;
  OperatorSpec op;
  TaskParams params;
  std::filesystem::path out_dir;
  std::vector<std::string> formats;  // subset of csv, json, svg, in that order
  nlohmann::json canonical;          // fully materialised config, echoed in outputs
  std::string hash;                  // cache key and output header

  bool wants(const std::string& format) const;
};

// Parses a JSON config. File references are resolved against base_dir.
// task_override (the CLI task) must agree with a "task" key when both exist.
// Throws ConfigError with line/column for syntax errors and the offending key
// for semantic errors.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                            const std::optional<std::string>& task_override = std::nullopt);
RunConfig parse_config(const std::filesystem::path& path,
                       const std::optional<std::string>& task_override = std::nullopt);

}  // namespace blochspec::cli
