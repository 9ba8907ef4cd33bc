#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "capscale/io.hpp"

namespace capscale {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2, kExitStrict = 3 };

/// Bad or incomplete configuration; reported as a usage error.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string command;
  TrafficModel model = TrafficModel::kAsymmetric;
  std::optional<double> d;
  std::vector<std::size_t> n_grid;
  std::size_t trials = 1;
  std::string fading = "trivial";
  ChannelParams params;
  std::uint64_t seed = 1;
  std::string out = "capscale-out";
  std::vector<std::string> formats{"csv", "json"};
  unsigned workers = 1;
  bool strict = false;
  bool dry_run = false;
  bool simulate = false;  // sweep only; run and verify always simulate

  /// Throws ConfigError.
  void validate() const;
  bool wants(std::string_view format) const;

  /// Fields that determine artifact contents. Output location, worker
  /// count and exit-code policy are left out so they do not perturb hashes.
  Json canonical() const;
};

/// Applies the keys of a config file onto `cfg`. Unknown keys are errors.
void apply_config_json(const Json& j, ExperimentConfig& cfg);

int cmd_run(const ExperimentConfig& cfg, std::ostream& out);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out);
int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);

/// Full entry point: parses argv, dispatches, and maps failures to exit
/// codes with a one-line JSON error on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capscale
