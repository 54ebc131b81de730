#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdg/engine.hpp"
#include "vdg/synthesis.hpp"

namespace vdg {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what_) : std::runtime_error(what_) {}
};

struct RunConfig {
  GameParams params;
  std::string out_dir = ".";
  std::size_t state_cap = TransitionModel::kDefaultStateCap;
  int threads = 0;  // worker hint; results never depend on it
  std::vector<std::string> properties;
};

/// key=value lines, '#' comments, blank lines ignored; unknown keys
/// are rejected by name. Throws ConfigError.
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::string& path);

/// Literal property text, or the contents of a file when the argument
/// starts with '@'.
std::string resolve_property_arg(const std::string& arg);

struct SweepSpec {
  std::string param;  // r_init, r_needed, f or k_max
  std::vector<double> values;
  std::string property;
};

// Every command returns the process exit code and writes human output
// to `out`, diagnostics to `err`:
//   0 success (TRUE for bound queries), 1 property FALSE,
//   2 usage, config or property error, 3 cap, model, solver or io failure.

int cmd_build(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& cfg, const std::string& property, bool classify,
              const std::string& csv_path, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& cfg, const std::string& property, const std::string& dot_path,
              std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, const SweepSpec& spec, const std::string& csv_path,
              std::ostream& out, std::ostream& err);
int cmd_stats(const std::string& model_path, std::ostream& out, std::ostream& err);

}  // namespace vdg
