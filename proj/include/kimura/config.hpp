#pragma once

#include <map>
#include <string>
#include <vector>

#include <kimura/catalog.hpp>
#include <kimura/engine.hpp>
#include <kimura/geometry.hpp>

namespace kimura {

enum class Experiment { kKhasminskii, kNovikov, kSupport, kMartingaleResidual, kGirsanovCompare, kRestart, kHolderValidate };

const char* to_string(Experiment experiment);
Experiment experiment_from_string(const std::string& name);

struct RunConfig {
  std::string model_name;
  ModelParams model_params;
  StatePoint initial_state;
  SimConfig sim;
  std::vector<Experiment> experiments;
  std::string output_dir = "kimura-out";
  std::map<std::string, double> tolerances;
  bool write_paths = false;
  bool write_weights = false;

  double tolerance(const std::string& key, double fallback) const;
};

/// Tolerance keys understood by the runner.
const std::vector<std::string>& tolerance_keys();

/// Parses and validates a JSON run configuration. Unknown keys are errors, as is a
/// declared q that is not below q0 = min{1/4, b0 / ((n + m) K^2)}.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace kimura
