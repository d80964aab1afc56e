#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "auxcop/sampler.hpp"

namespace auxcop {

enum class Command { simulate, fit, impute, analyze, diagnose };

const char* to_string(Command c) noexcept;

struct RunConfig {
  Command command = Command::fit;
  std::string data_path;
  std::string schema_path;
  std::string draws_dir;
  std::string imputations_dir;
  std::string output_dir;
  LikelihoodMode mode = LikelihoodMode::ehql;
  int iters = 5000;
  int burnin = 2500;
  int thin = 1;
  int m = 20;
  int spacing = 125;
  int rank = 0;  // 0: full rank
  std::optional<std::uint64_t> seed;
  int candidate_bins = 20;
  // analyze
  std::string response;
  std::vector<std::string> covariates;
  std::vector<double> taus{0.5};
  bool ols = false;
  bool scale_numeric = false;
  int bootstrap = 200;
  // simulate
  std::string preset = "sec4-1";
  int n = 1000;
  int p = 5;
  double missing = 0.5;

  /// Every setting except the output location; the basis of the config hash.
  nlohmann::json to_json() const;
  std::uint64_t hash() const;
};

/// Parses `auxcopula <command> [flags]`. A JSON file given by --config
/// supplies defaults (keys are flag names without dashes); flags override it.
/// Cross-field rules are checked here; failures throw ConfigError naming the flag.
RunConfig parse_and_validate(const std::vector<std::string>& args);

/// Runs the command and writes its artifacts. Throws on failure.
void execute(const RunConfig& config);

/// Entry point used by the executable: returns 0 on success, 2 for usage or
/// configuration errors and 1 when a stage fails.
int run_cli(int argc, char** argv);

}  // namespace auxcop
