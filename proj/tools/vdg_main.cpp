#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vdg/cli.hpp"
#include "vdg/numio.hpp"

namespace {

int parse_values(const std::string& arg, std::vector<double>& out) {
  std::size_t start = 0;
  while (start <= arg.size()) {
    std::size_t comma = arg.find(',', start);
    if (comma == std::string::npos) comma = arg.size();
    try {
      out.push_back(vdg::parse_double(std::string_view(arg).substr(start, comma - start)));
    } catch (const std::invalid_argument&) {
      std::cerr << "error: --values expects a comma-separated list of numbers\n";
      return 2;
    }
    start = comma + 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model checker and strategy synthesizer for the iterated volunteer's dilemma"};
  app.require_subcommand(1);

  std::string config_path, prop_arg, out_override, csv_path, dot_path, model_path;
  std::string param, values_arg;
  long long cap_override = -1;
  bool classify = false;

  CLI::App* build = app.add_subcommand("build", "enumerate the state space and write model.vdg");
  build->add_option("--config", config_path, "config file")->required();
  build->add_option("--out", out_override, "output directory override");
  build->add_option("--cap", cap_override, "state cap override");

  CLI::App* check = app.add_subcommand("check", "evaluate a property on the model");
  check->add_option("--config", config_path, "config file")->required();
  check->add_option("--prop", prop_arg, "property text, or @file");
  check->add_flag("--classify", classify, "report the yes/no/maybe partition");
  check->add_option("--csv", csv_path, "write the per-state valuation as CSV");
  check->add_option("--cap", cap_override, "state cap override");

  CLI::App* synth = app.add_subcommand("synth", "synthesize a witness strategy");
  synth->add_option("--config", config_path, "config file")->required();
  synth->add_option("--prop", prop_arg, "property text, or @file");
  synth->add_option("--dot", dot_path, "strategy output path (default <out_dir>/strategy.dot)");
  synth->add_option("--cap", cap_override, "state cap override");

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a property over a parameter grid");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--param", param, "r_init, r_needed, f or k_max")->required();
  sweep->add_option("--values", values_arg, "comma-separated values")->required();
  sweep->add_option("--prop", prop_arg, "property text, or @file");
  sweep->add_option("--csv", csv_path, "grid output path (default <out_dir>/sweep.csv)");
  sweep->add_option("--cap", cap_override, "state cap override");

  CLI::App* stats = app.add_subcommand("stats", "validate a model file and print its shape");
  stats->add_option("--model", model_path, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (stats->parsed()) return vdg::cmd_stats(model_path, std::cout, std::cerr);

  vdg::RunConfig cfg;
  try {
    cfg = vdg::load_config(config_path);
  } catch (const vdg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (cap_override >= 0) {
    if (cap_override == 0) {
      std::cerr << "error: --cap must be positive\n";
      return 2;
    }
    cfg.state_cap = static_cast<std::size_t>(cap_override);
  }
  if (const char* env = std::getenv("VDG_THREADS")) {
    try {
      const long long t = vdg::parse_int(env);
      if (t >= 0) cfg.threads = static_cast<int>(t);
    } catch (const std::invalid_argument&) {
      std::cerr << "warning: ignoring malformed VDG_THREADS\n";
    }
  }

  if (build->parsed()) return vdg::cmd_build(cfg, std::cout, std::cerr);

  // The remaining commands need a property: --prop wins, otherwise the
  // config's property entries are used.
  std::vector<std::string> properties;
  try {
    if (!prop_arg.empty()) properties.push_back(vdg::resolve_property_arg(prop_arg));
    else properties = cfg.properties;
  } catch (const vdg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (properties.empty()) {
    std::cerr << "error: no property given; use --prop or a 'property' config entry\n";
    return 2;
  }

  if (check->parsed()) {
    if (!csv_path.empty() && properties.size() > 1) {
      std::cerr << "error: --csv needs a single property\n";
      return 2;
    }
    int worst = 0;
    for (const auto& text : properties)
      worst = std::max(worst, vdg::cmd_check(cfg, text, classify, csv_path, std::cout, std::cerr));
    return worst;
  }

  if (synth->parsed()) {
    if (properties.size() > 1) {
      std::cerr << "error: synth needs a single property\n";
      return 2;
    }
    if (dot_path.empty())
      dot_path = (std::filesystem::path(cfg.out_dir) / "strategy.dot").string();
    return vdg::cmd_synth(cfg, properties[0], dot_path, std::cout, std::cerr);
  }

  if (properties.size() > 1) {
    std::cerr << "error: sweep needs a single property\n";
    return 2;
  }
  std::vector<double> values;
  if (const int code = parse_values(values_arg, values)) return code;
  if (csv_path.empty()) csv_path = (std::filesystem::path(cfg.out_dir) / "sweep.csv").string();
  return vdg::cmd_sweep(cfg, {param, std::move(values), properties[0]}, csv_path, std::cout,
                        std::cerr);
}
