#include "vdg/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "vdg/numio.hpp"

namespace vdg {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

long long config_int(std::string_view value, const std::string& key, std::size_t line) {
  try {
    return parse_int(value);
  } catch (const std::invalid_argument&) {
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' needs an integer, got '" + std::string(value) + "'");
  }
}

double config_real(std::string_view value, const std::string& key, std::size_t line) {
  try {
    return parse_double(value);
  } catch (const std::invalid_argument&) {
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' needs a number, got '" + std::string(value) + "'");
  }
}

void print_stats(const TransitionModel& model, std::ostream& out) {
  const LevelStats stats = level_stats(model);
  out << "states: " << stats.cumulative << "\n";
  out << "levels:";
  for (std::size_t c : stats.per_level) out << ' ' << c;
  out << "\n";
  out << "transitions: " << model.transition_count() << "\n";
  if (stats.fitted_slope) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "fit: ln(count) ~ %.4f + %.4f*k\n", *stats.fitted_intercept,
                  *stats.fitted_slope);
    out << buf;
  }
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_valuation_csv(const TransitionModel& model, const ValuationTable& table,
                         const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  file << "id,k";
  for (int i = 1; i <= model.params().n; ++i) file << ",c" << i;
  file << ",value\n";
  for (StateId id = 0; id < model.state_count(); ++id) {
    file << id << ',' << model.round_of(id);
    for (int v : model.resources(id)) file << ',' << v;
    file << ',' << format_double(table.values[id]) << '\n';
  }
  if (!file.flush()) throw std::runtime_error("cannot write '" + path + "'");
}

// Shared error-to-exit-code policy; keeps every command's behavior identical.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const PropertyError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const BuildLimitError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view raw = end == std::string_view::npos ? text.substr(start)
                                                         : text.substr(start, end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "n") cfg.params.n = static_cast<int>(config_int(value, key, line_no));
    else if (key == "k_max") cfg.params.k_max = static_cast<int>(config_int(value, key, line_no));
    else if (key == "r_init") cfg.params.r_init = static_cast<int>(config_int(value, key, line_no));
    else if (key == "r_needed") cfg.params.r_needed = static_cast<int>(config_int(value, key, line_no));
    else if (key == "r_max") cfg.params.r_max = static_cast<int>(config_int(value, key, line_no));
    else if (key == "f") cfg.params.f = config_real(value, key, line_no);
    else if (key == "decay_slope") cfg.params.decay_slope = config_real(value, key, line_no);
    else if (key == "fractions") {
      cfg.params.fractions.clear();
      std::string_view rest = value;
      while (true) {
        const std::size_t comma = rest.find(',');
        cfg.params.fractions.push_back(
            config_real(trim(comma == std::string_view::npos ? rest : rest.substr(0, comma)),
                        key, line_no));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    } else if (key == "out_dir") {
      cfg.out_dir = std::string(value);
    } else if (key == "state_cap") {
      const long long cap = config_int(value, key, line_no);
      if (cap < 1)
        throw ConfigError("config line " + std::to_string(line_no) + ": state_cap must be positive");
      cfg.state_cap = static_cast<std::size_t>(cap);
    } else if (key == "threads") {
      const long long t = config_int(value, key, line_no);
      if (t < 0)
        throw ConfigError("config line " + std::to_string(line_no) + ": threads must be >= 0");
      cfg.threads = static_cast<int>(t);
    } else if (key == "property") {
      cfg.properties.emplace_back(value);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }

  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  return parse_config_text(buf.str());
}

std::string resolve_property_arg(const std::string& arg) {
  if (arg.empty() || arg.front() != '@') return arg;
  const std::string path = arg.substr(1);
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot read property file '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  return std::string(trim(buf.str()));
}

int cmd_build(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const TransitionModel model = TransitionModel::build(cfg.params, cfg.state_cap);
    print_stats(model, out);

    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = (std::filesystem::path(cfg.out_dir) / "model.vdg").string();
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    export_model(model, file);
    if (!file.flush()) throw std::runtime_error("cannot write '" + path + "'");
    out << "wrote " << path << "\n";
    return 0;
  });
}

int cmd_check(const RunConfig& cfg, const std::string& property, bool classify,
              const std::string& csv_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PropertyAst prop = parse_property(property, cfg.params);
    const TransitionModel model = TransitionModel::build(cfg.params, cfg.state_cap);
    const CheckResult result = check(model, prop);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";

    int code = 0;
    if (result.verdict) {
      out << (*result.verdict ? "TRUE" : "FALSE") << "\n";
      code = *result.verdict ? 0 : 1;
    } else {
      out << fixed6(result.value) << "\n";
    }

    if (classify) {
      const QualClassification cls = classify_states(model, prop);
      char buf[128];
      std::snprintf(buf, sizeof buf, "classification: Y=%zu N=%zu M=%zu Y/(Y+N)=%.1f%%\n",
                    cls.yes.size(), cls.no.size(), cls.maybe.size(), 100.0 * cls.ratio());
      out << buf;
    }
    if (!csv_path.empty()) {
      write_valuation_csv(model, result.valuation, csv_path);
      out << "wrote " << csv_path << "\n";
    }
    return code;
  });
}

int cmd_synth(const RunConfig& cfg, const std::string& property, const std::string& dot_path,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const PropertyAst prop = parse_property(property, cfg.params);
    if (std::holds_alternative<ProbBound>(prop.query))
      throw std::invalid_argument(
          "synthesis needs an optimization query (Pmax=?, Pmin=?, or a reward optimum)");

    const TransitionModel model = TransitionModel::build(cfg.params, cfg.state_cap);
    const CheckResult result = check(model, prop);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";

    const StrategyGraph graph = synthesize(model, prop, result.valuation);
    out << "value: " << fixed6(graph.achieved_value) << "\n";

    const bool pure = split_coalition(prop.coalition, cfg.params.n).cooperative();
    if (pure) {
      const double replayed = replay_value(graph, model, prop);
      if (replayed != graph.achieved_value)
        throw std::runtime_error("replay value " + format_double(replayed) +
                                 " differs from the engine value " +
                                 format_double(graph.achieved_value));
      out << "replay: " << fixed6(replayed) << " (exact match)\n";
    } else {
      out << "replay: skipped (mixed two-coalition strategy)\n";
    }

    ensure_parent_dir(dot_path);
    std::ofstream file(dot_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + dot_path + "'");
    export_dot(graph, file);
    if (!file.flush()) throw std::runtime_error("cannot write '" + dot_path + "'");
    out << "wrote " << dot_path << "\n";
    return 0;
  });
}

int cmd_sweep(const RunConfig& cfg, const SweepSpec& spec, const std::string& csv_path,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const bool is_int_param =
        spec.param == "r_init" || spec.param == "r_needed" || spec.param == "k_max";
    if (!is_int_param && spec.param != "f")
      throw std::invalid_argument("sweep parameter must be r_init, r_needed, f or k_max");
    if (spec.values.empty()) throw std::invalid_argument("sweep needs at least one value");
    if (is_int_param)
      for (double v : spec.values)
        if (v != std::floor(v))
          throw std::invalid_argument("sweep value " + format_double(v) +
                                      " is not an integer for " + spec.param);

    // Surface syntax errors before any cell runs.
    parse_property(spec.property, cfg.params);

    std::ostringstream csv;
    csv << "param,value,k,optimum\n";

    auto run_cell = [&](const GameParams& base, double value, int k) {
      GameParams p = base;
      p.k_max = k;
      csv << spec.param << ',' << format_double(value) << ',' << k << ',';
      try {
        const PropertyAst prop = parse_property(spec.property, p);
        const TransitionModel model = TransitionModel::build(p, cfg.state_cap);
        const CheckResult result = check(model, prop);
        csv << fixed6(result.value) << '\n';
      } catch (const std::exception& e) {
        err << "sweep " << spec.param << "=" << format_double(value) << " k=" << k << ": "
            << e.what() << "\n";
        csv << "ERROR\n";
      }
    };

    for (double v : spec.values) {
      GameParams p = cfg.params;
      if (spec.param == "r_init") p.r_init = static_cast<int>(v);
      else if (spec.param == "r_needed") p.r_needed = static_cast<int>(v);
      else if (spec.param == "f") p.f = v;

      if (spec.param == "k_max") {
        run_cell(p, v, static_cast<int>(v));
      } else {
        for (int k = 1; k <= cfg.params.k_max; ++k) run_cell(p, v, k);
      }
    }

    ensure_parent_dir(csv_path);
    std::ofstream file(csv_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + csv_path + "'");
    file << csv.str();
    if (!file.flush()) throw std::runtime_error("cannot write '" + csv_path + "'");
    out << "wrote " << csv_path << "\n";
    return 0;
  });
}

int cmd_stats(const std::string& model_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream file(model_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot read '" + model_path + "'");
    const TransitionModel model = import_model(file);
    print_stats(model, out);
    return 0;
  });
}

}  // namespace vdg
