#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svfreg/io.hpp"

namespace svfreg::cli {

/// Exit codes, one per error category.
enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kParse = 4,
  kValidation = 5,
  kNumeric = 6,
};

/// Maps a thrown error to its exit code, printing the message to stderr.
int exit_code_for_current_exception();

struct CommonOverrides {
  std::optional<std::string> loss;
  std::optional<int> grid_size;
  std::optional<int> squaring_steps;
  std::optional<std::uint64_t> seed;
  std::optional<int> sample_count;

  RunConfig resolve(const std::optional<std::string>& config_path) const;
};

struct RegisterArgs {
  std::string moving_path;
  std::string fixed_path;
  std::optional<std::string> config_path;
  std::string out_dir;
  CommonOverrides overrides;
};

/// Prealigns (similarity ICP, then cube placement when the pair does not
/// already fit in [-1,1]^3), registers, and writes: prealigned meshes, raw
/// and smoothed velocity fields, forward/inverse displacement fields, the
/// warped moving mesh, the objective trace CSV, and a Jacobian-determinant
/// summary JSON.
void cmd_register(const RegisterArgs& args);

struct BuildPdmArgs {
  std::vector<std::string> inputs;  // field files and/or directories of *.svf
  int components = 8;
  int batch_size = 8;
  std::string out_path;
};

/// Streams the field files through the incremental fit and writes the model
/// plus an explained-variance CSV next to it (<out>.variance.csv).
void cmd_build_pdm(const BuildPdmArgs& args);

struct EvaluateArgs {
  std::string mode;  // fit | compactness | generalisability | specificity
  std::vector<std::string> inputs;
  std::optional<std::string> model_path;
  std::optional<std::string> moving_path;
  std::optional<std::string> fixed_path;
  std::optional<std::string> config_path;
  int components = 0;
  int n_samples = 100;
  std::string out_prefix;  // writes <out>.csv and <out>.json
  CommonOverrides overrides;
};

void cmd_evaluate(const EvaluateArgs& args);

struct SampleArgs {
  std::string model_path;
  std::string template_path;
  int components = 0;
  int count = 1;
  std::uint64_t seed = 0;
  int squaring_steps = 7;
  std::string out_dir;
};

/// Writes `count` meshes sampled from the model and warped from the template.
void cmd_sample(const SampleArgs& args);

}  // namespace svfreg::cli
