#pragma once

// Flat `key = value` configuration shared by every subcommand.

#include "ecomann/eval.hpp"
#include "ecomann/planner.hpp"
#include "ecomann/train.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecomann::cli {

/// Bad flags, unknown keys, malformed values: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  TrainConfig train;
  EvalOptions eval;
  RrtParams rrt;
  double on_manifold_tol = 0.05;
  double reach_tol = 0.05;

  // experiment harnesses
  int repeats = 3;
  std::vector<int> study_levels = {1, 2, 3, 7};
  std::vector<double> noise_sigmas = {0.01};
  long n = 1000;  // size of generated datasets

  // planning scenarios
  std::string scenario = "hourglass";
  std::string sphere_model = "analytic";  // or a model file

  bool seed_set = false;
};

struct ConfigKey {
  std::string name;
  std::string type;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_registry();

/// Throws UsageError for unknown keys or values of the wrong type.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// `key = value` lines; `#` starts a comment. `origin` names the source in errors.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin);
void apply_config_file(RunConfig& config, const std::string& path);

/// "key=value" as given to --set.
void apply_assignment(RunConfig& config, const std::string& assignment);

/// Falls back to ECOMANN_SEED when no seed was configured.
void apply_seed_env(RunConfig& config);

/// Every key with its current value, in registry order.
std::string format_config(const RunConfig& config);

/// Registry listing for --help.
std::string registry_help();

}  // namespace ecomann::cli
