#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "vdg/cli.hpp"
#include "vdg/engine.hpp"
#include "vdg/model.hpp"
#include "vdg/numio.hpp"
#include "vdg/proplang.hpp"
#include "vdg/synthesis.hpp"

using namespace vdg;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test, wiped on reuse so reruns stay clean.
fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vdgcli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
  REQUIRE(out.flush().good());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

GameParams params_with_kmax(int k_max) {
  GameParams p;
  p.k_max = k_max;
  return p;
}

GameParams pennies_params() {
  GameParams p;
  p.n = 2;
  p.k_max = 1;
  p.fractions = {0.0, 1.0};
  return p;
}

RunConfig config_for(const GameParams& p, const fs::path& out_dir) {
  RunConfig cfg;
  cfg.params = p;
  cfg.out_dir = out_dir.string();
  return cfg;
}

// What one sweep cell should report, recomputed straight from the library.
std::string cell_optimum(GameParams p, int k, const std::string& prop_text) {
  p.k_max = k;
  const TransitionModel model = TransitionModel::build(p);
  return fixed6(check(model, parse_property(prop_text, p)).value);
}

}  // namespace

TEST_CASE("config text covers every key") {
  const RunConfig cfg = parse_config_text(
      "# scenario under test\n"
      "n = 2\r\n"
      "\n"
      "k_max=3\n"
      "  r_init = 50\n"
      "r_needed=80\n"
      "r_max = 400\n"
      "f = 1.5\n"
      "decay_slope = -0.01\n"
      "fractions = 0, 0.25 ,1\n"
      "out_dir = runs/a\n"
      "state_cap = 1234\n"
      "threads = 7\n"
      "property = <<p1,p2,p3>>P>=1[F \"good\"]\n"
      "property = <<p1>>Pmin=?[F c1<10]\n");
  CHECK(cfg.params.n == 2);
  CHECK(cfg.params.k_max == 3);
  CHECK(cfg.params.r_init == 50);
  CHECK(cfg.params.r_needed == 80);
  CHECK(cfg.params.r_max == 400);
  CHECK(cfg.params.f == 1.5);
  CHECK(cfg.params.decay_slope == -0.01);
  CHECK(cfg.params.fractions == std::vector<double>{0.0, 0.25, 1.0});
  CHECK(cfg.out_dir == "runs/a");
  CHECK(cfg.state_cap == 1234);
  CHECK(cfg.threads == 7);
  REQUIRE(cfg.properties.size() == 2);
  CHECK(cfg.properties[0] == "<<p1,p2,p3>>P>=1[F \"good\"]");
  CHECK(cfg.properties[1] == "<<p1>>Pmin=?[F c1<10]");

  SUBCASE("empty text keeps the defaults") {
    const RunConfig def = parse_config_text("");
    const GameParams base;
    CHECK(def.params.n == base.n);
    CHECK(def.params.k_max == base.k_max);
    CHECK(def.params.fractions == base.fractions);
    CHECK(def.out_dir == ".");
    CHECK(def.state_cap == TransitionModel::kDefaultStateCap);
    CHECK(def.threads == 0);
    CHECK(def.properties.empty());
  }
}

TEST_CASE("config errors carry the line number") {
  CHECK_THROWS_WITH_AS(parse_config_text("n=x"),
                       "config line 1: key 'n' needs an integer, got 'x'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n=3\nf=abc"),
                       "config line 2: key 'f' needs a number, got 'abc'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n 3"), "config line 1: expected key=value", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("bogus=1"), "config line 1: unknown key 'bogus'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("state_cap=0"),
                       "config line 1: state_cap must be positive", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("threads=-1"), "config line 1: threads must be >= 0",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("fractions=0,x,1"),
                       "config line 1: key 'fractions' needs a number, got 'x'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("# header\nk_max="),
                       "config line 2: key 'k_max' needs an integer, got ''", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("n=0"), "config: params: n must be >= 1", ConfigError);
}

TEST_CASE("config and property files resolve through the filesystem") {
  const fs::path dir = temp_dir("files");

  const fs::path cfg_path = dir / "run.cfg";
  write_file(cfg_path, "k_max = 2\nproperty = <<p1,p2,p3>>P>=1[F \"good\"]\n");
  const RunConfig cfg = load_config(cfg_path.string());
  CHECK(cfg.params.k_max == 2);
  REQUIRE(cfg.properties.size() == 1);

  const std::string missing = (dir / "absent.cfg").string();
  CHECK_THROWS_WITH_AS(load_config(missing),
                       ("cannot read config file '" + missing + "'").c_str(), ConfigError);

  CHECK(resolve_property_arg("<<p1>>Pmax=?[F \"good\"]") == "<<p1>>Pmax=?[F \"good\"]");
  const fs::path prop_path = dir / "prop.txt";
  write_file(prop_path, "  <<p1,p2,p3>>Pmax=?[F<=5 c1<c2]\n");
  CHECK(resolve_property_arg("@" + prop_path.string()) == "<<p1,p2,p3>>Pmax=?[F<=5 c1<c2]");
  const std::string no_prop = (dir / "absent.txt").string();
  CHECK_THROWS_WITH_AS(resolve_property_arg("@" + no_prop),
                       ("cannot read property file '" + no_prop + "'").c_str(), ConfigError);
}

TEST_CASE("build prints the shape and writes a loadable model") {
  const fs::path dir = temp_dir("build");
  const RunConfig cfg = config_for(params_with_kmax(2), dir);
  std::ostringstream out, err;

  REQUIRE(cmd_build(cfg, out, err) == 0);
  CHECK(err.str().empty());
  const std::string model_path = (dir / "model.vdg").string();
  CHECK(out.str() ==
        "states: 309\n"
        "levels: 1 27 281\n"
        "transitions: 756\n"
        "fit: ln(count) ~ -2.6603 + 2.8192*k\n"
        "wrote " + model_path + "\n");

  std::ifstream file(model_path, std::ios::binary);
  REQUIRE(file.good());
  const TransitionModel model = import_model(file);
  CHECK(model.params().k_max == 2);
  CHECK(model.state_count() == 309);

  SUBCASE("the cap rejects the build up front") {
    RunConfig capped = cfg;
    capped.state_cap = 100;
    std::ostringstream out2, err2;
    CHECK(cmd_build(capped, out2, err2) == 3);
    CHECK(out2.str().empty());
    CHECK(err2.str() == "error: state cap exceeded: projected 757 states, cap 100\n");
  }

  SUBCASE("stats round-trips the written file") {
    std::ostringstream out2, err2;
    REQUIRE(cmd_stats(model_path, out2, err2) == 0);
    CHECK(out2.str() ==
          "states: 309\n"
          "levels: 1 27 281\n"
          "transitions: 756\n"
          "fit: ln(count) ~ -2.6603 + 2.8192*k\n");
    CHECK(err2.str().empty());
  }

  SUBCASE("stats rejects missing and corrupt files") {
    std::ostringstream out2, err2;
    CHECK(cmd_stats((dir / "nope.vdg").string(), out2, err2) == 3);
    CHECK(err2.str() == "error: cannot read '" + (dir / "nope.vdg").string() + "'\n");

    const fs::path bad = dir / "bad.vdg";
    write_file(bad, "not a model\n");
    std::ostringstream out3, err3;
    CHECK(cmd_stats(bad.string(), out3, err3) == 3);
    CHECK(err3.str().substr(0, 7) == "error: ");
    CHECK(out3.str().empty());
  }
}

TEST_CASE("check prints verdicts, optima and warnings") {
  const fs::path dir = temp_dir("check");
  const RunConfig cfg = config_for(pennies_params(), dir);

  SUBCASE("satisfied bound") {
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p1>>P>=0.4[F c1=c2&k=2]", false, "", out, err) == 0);
    CHECK(out.str() == "TRUE\n");
    CHECK(err.str().empty());
  }

  SUBCASE("violated bound") {
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p1>>P>0.5[F c1=c2&k=2]", false, "", out, err) == 1);
    CHECK(out.str() == "FALSE\n");
  }

  SUBCASE("optimum prints six decimals") {
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p1>>Pmax=?[F c1=c2&k=2]", false, "", out, err) == 0);
    CHECK(out.str() == "0.500000\n");
  }

  SUBCASE("oversized step bounds warn on stderr") {
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p1>>Pmax=?[F<=9 c1=c2&k=2]", false, "", out, err) == 0);
    CHECK(err.str() == "warning: step bound 9 exceeds the horizon; clamped to 2\n");
    CHECK(out.str() == "0.500000\n");
  }

  SUBCASE("malformed properties exit 2") {
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p1,p2>>Pmax=?[G \"good\"]", false, "", out, err) == 2);
    CHECK(out.str().empty());
    CHECK(err.str().substr(0, 22) == "error: property offset");
  }

  SUBCASE("properties naming absent players exit 2") {
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p3>>Pmax=?[F c1=c2]", false, "", out, err) == 2);
    CHECK(err.str().substr(0, 22) == "error: property offset");
  }
}

TEST_CASE("check reports the partition and the valuation table") {
  SUBCASE("classification line") {
    const fs::path dir = temp_dir("classify");
    const RunConfig cfg = config_for(params_with_kmax(1), dir);
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p1,p2,p3>>P>=1[F \"good\"]", true, "", out, err) == 0);
    CHECK(out.str() == "TRUE\nclassification: Y=10 N=18 M=0 Y/(Y+N)=35.7%\n");
  }

  SUBCASE("valuation csv") {
    const fs::path dir = temp_dir("valcsv");
    const RunConfig cfg = config_for(pennies_params(), dir);
    const std::string csv_path = (dir / "sub" / "values.csv").string();
    std::ostringstream out, err;
    CHECK(cmd_check(cfg, "<<p1,p2>>Pmax=?[F c1=c2&k=2]", false, csv_path, out, err) == 0);
    CHECK(out.str() == "1.000000\nwrote " + csv_path + "\n");
    CHECK(slurp(csv_path) ==
          "id,k,c1,c2,value\n"
          "0,1,100,100,1\n"
          "1,2,0,100,0\n"
          "2,2,100,0,0\n"
          "3,2,100,100,1\n"
          "4,2,200,200,1\n");
  }
}

TEST_CASE("synth reports value and replay and writes the strategy") {
  const fs::path dir = temp_dir("synth");

  SUBCASE("pure chains replay exactly") {
    const RunConfig cfg = config_for(params_with_kmax(1), dir);
    const std::string prop = "<<p1,p2,p3>>R{\"done123\"}max=?[F k=2]";
    const std::string dot_path = (dir / "chain.dot").string();
    std::ostringstream out, err;
    REQUIRE(cmd_synth(cfg, prop, dot_path, out, err) == 0);
    CHECK(out.str() ==
          "value: 199.000000\n"
          "replay: 199.000000 (exact match)\n"
          "wrote " + dot_path + "\n");
    CHECK(err.str().empty());

    const TransitionModel model = TransitionModel::build(cfg.params);
    const PropertyAst ast = parse_property(prop, cfg.params);
    const StrategyGraph graph = synthesize(model, ast, check(model, ast).valuation);
    std::ostringstream dot;
    export_dot(graph, dot);
    CHECK(slurp(dot_path) == dot.str());
  }

  SUBCASE("two-coalition strategies skip the replay") {
    const RunConfig cfg = config_for(pennies_params(), dir);
    const std::string dot_path = (dir / "mixed.dot").string();
    std::ostringstream out, err;
    REQUIRE(cmd_synth(cfg, "<<p1>>Pmax=?[F c1=c2&k=2]", dot_path, out, err) == 0);
    CHECK(out.str() ==
          "value: 0.500000\n"
          "replay: skipped (mixed two-coalition strategy)\n"
          "wrote " + dot_path + "\n");
    CHECK(slurp(dot_path).substr(0, 18) == "digraph strategy {");
  }

  SUBCASE("bound queries are rejected before any work") {
    const RunConfig cfg = config_for(params_with_kmax(1), dir);
    const std::string dot_path = (dir / "never.dot").string();
    std::ostringstream out, err;
    CHECK(cmd_synth(cfg, "<<p1,p2,p3>>P>=1[F \"good\"]", dot_path, out, err) == 2);
    CHECK(err.str() ==
          "error: synthesis needs an optimization query (Pmax=?, Pmin=?, or a reward optimum)\n");
    CHECK_FALSE(fs::exists(dot_path));
  }
}

TEST_CASE("sweep writes the grid and isolates cell failures") {
  const fs::path dir = temp_dir("sweep");
  const RunConfig cfg = config_for(params_with_kmax(2), dir);
  const std::string prop = "<<p1,p2,p3>>Pmax=?[F \"good\"]";

  SUBCASE("real parameter grid covers every horizon") {
    const std::string csv_path = (dir / "f.csv").string();
    std::ostringstream out, err;
    REQUIRE(cmd_sweep(cfg, {"f", {1.5, 2.0}, prop}, csv_path, out, err) == 0);
    CHECK(out.str() == "wrote " + csv_path + "\n");
    CHECK(err.str().empty());

    std::string expected = "param,value,k,optimum\n";
    for (double v : {1.5, 2.0}) {
      GameParams p = cfg.params;
      p.f = v;
      for (int k = 1; k <= 2; ++k)
        expected += "f," + format_double(v) + "," + std::to_string(k) + "," +
                    cell_optimum(p, k, prop) + "\n";
    }
    CHECK(slurp(csv_path) == expected);
  }

  SUBCASE("k_max rows take the horizon from the value") {
    const std::string csv_path = (dir / "k.csv").string();
    std::ostringstream out, err;
    REQUIRE(cmd_sweep(cfg, {"k_max", {1.0, 2.0}, prop}, csv_path, out, err) == 0);
    CHECK(slurp(csv_path) == "param,value,k,optimum\n"
                             "k_max,1,1," + cell_optimum(cfg.params, 1, prop) + "\n"
                             "k_max,2,2," + cell_optimum(cfg.params, 2, prop) + "\n");
  }

  SUBCASE("a failing cell becomes ERROR without aborting the grid") {
    RunConfig capped = cfg;
    capped.state_cap = 100;
    const std::string csv_path = (dir / "err.csv").string();
    std::ostringstream out, err;
    REQUIRE(cmd_sweep(capped, {"k_max", {1.0, 2.0}, prop}, csv_path, out, err) == 0);
    CHECK(err.str() == "sweep k_max=2 k=2: state cap exceeded: projected 757 states, cap 100\n");
    CHECK(slurp(csv_path) == "param,value,k,optimum\n"
                             "k_max,1,1," + cell_optimum(cfg.params, 1, prop) + "\n"
                             "k_max,2,2,ERROR\n");
  }

  SUBCASE("bad specs exit 2 before writing anything") {
    const std::string csv_path = (dir / "never.csv").string();
    std::ostringstream out, err;
    CHECK(cmd_sweep(cfg, {"r_max", {1.0}, prop}, csv_path, out, err) == 2);
    CHECK(err.str() == "error: sweep parameter must be r_init, r_needed, f or k_max\n");

    std::ostringstream out2, err2;
    CHECK(cmd_sweep(cfg, {"f", {}, prop}, csv_path, out2, err2) == 2);
    CHECK(err2.str() == "error: sweep needs at least one value\n");

    std::ostringstream out3, err3;
    CHECK(cmd_sweep(cfg, {"r_init", {2.5}, prop}, csv_path, out3, err3) == 2);
    CHECK(err3.str() == "error: sweep value 2.5 is not an integer for r_init\n");

    std::ostringstream out4, err4;
    CHECK(cmd_sweep(cfg, {"f", {2.0}, "<<p1,p2,p3>>Pmax=?[G \"good\"]"}, csv_path, out4, err4) == 2);
    CHECK(err4.str().substr(0, 22) == "error: property offset");
    CHECK_FALSE(fs::exists(csv_path));
  }
}

TEST_CASE("results do not depend on the thread hint") {
  const fs::path a = temp_dir("det-a");
  const fs::path b = temp_dir("det-b");
  RunConfig one = config_for(params_with_kmax(2), a);
  one.threads = 1;
  RunConfig many = config_for(params_with_kmax(2), b);
  many.threads = 7;

  std::ostringstream out_a, out_b, err;
  REQUIRE(cmd_build(one, out_a, err) == 0);
  REQUIRE(cmd_build(many, out_b, err) == 0);
  CHECK(slurp(a / "model.vdg") == slurp(b / "model.vdg"));

  const std::string reward = "<<p1,p2,p3>>R{\"r1\"}max=?[F k=3]";
  std::ostringstream chk_a, chk_b;
  REQUIRE(cmd_check(one, reward, false, (a / "v.csv").string(), chk_a, err) == 0);
  REQUIRE(cmd_check(many, reward, false, (b / "v.csv").string(), chk_b, err) == 0);
  CHECK(slurp(a / "v.csv") == slurp(b / "v.csv"));
  CHECK(chk_a.str().substr(0, chk_a.str().find("wrote")) ==
        chk_b.str().substr(0, chk_b.str().find("wrote")));

  std::ostringstream syn_a, syn_b;
  REQUIRE(cmd_synth(one, reward, (a / "s.dot").string(), syn_a, err) == 0);
  REQUIRE(cmd_synth(many, reward, (b / "s.dot").string(), syn_b, err) == 0);
  CHECK(slurp(a / "s.dot") == slurp(b / "s.dot"));

  RunConfig mixed_one = config_for(pennies_params(), a);
  mixed_one.threads = 1;
  RunConfig mixed_many = config_for(pennies_params(), b);
  mixed_many.threads = 7;
  std::ostringstream mix_a, mix_b;
  REQUIRE(cmd_synth(mixed_one, "<<p1>>Pmax=?[F c1=c2&k=2]", (a / "m.dot").string(), mix_a, err) ==
          0);
  REQUIRE(cmd_synth(mixed_many, "<<p1>>Pmax=?[F c1=c2&k=2]", (b / "m.dot").string(), mix_b, err) ==
          0);
  CHECK(slurp(a / "m.dot") == slurp(b / "m.dot"));
}

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_binary(const fs::path& dir, const std::string& args) {
  const fs::path out_path = dir / "stdout.txt";
  const fs::path err_path = dir / "stderr.txt";
  const std::string cmd = args + " >" + out_path.string() + " 2>" + err_path.string();
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return {WEXITSTATUS(rc), slurp(out_path), slurp(err_path)};
}

}  // namespace

TEST_CASE("the command line binary drives the full pipeline") {
  const fs::path dir = temp_dir("bin");
  const std::string bin = std::string("\"") + VDG_BIN + "\"";

  const fs::path cfg_path = dir / "run.cfg";
  write_file(cfg_path, "k_max = 1\nout_dir = " + dir.string() +
                           "\nproperty = <<p1,p2,p3>>P>=1[F<=5 \"good\"]\n");

  SUBCASE("missing subcommands and unknown flags exit 2") {
    CHECK(run_binary(dir, bin).code == 2);
    CHECK(run_binary(dir, bin + " check --config " + cfg_path.string() + " --frob").code == 2);
    CHECK(run_binary(dir, bin + " check --config " + (dir / "absent.cfg").string()).code == 2);
  }

  SUBCASE("build then stats") {
    const RunResult build = run_binary(dir, bin + " build --config " + cfg_path.string());
    REQUIRE(build.code == 0);
    CHECK(build.err.empty());
    const std::string model_path = (dir / "model.vdg").string();
    REQUIRE(fs::exists(model_path));

    const RunResult stats = run_binary(dir, bin + " stats --model " + model_path);
    CHECK(stats.code == 0);
    CHECK(stats.out + "wrote " + model_path + "\n" == build.out);
  }

  SUBCASE("check uses config properties and honors --prop") {
    const RunResult from_cfg = run_binary(dir, bin + " check --config " + cfg_path.string());
    CHECK(from_cfg.code == 0);
    CHECK(from_cfg.out == "TRUE\n");
    CHECK(from_cfg.err == "warning: step bound 5 exceeds the horizon; clamped to 2\n");

    const fs::path prop_path = dir / "prop.txt";
    write_file(prop_path, "<<p1,p2,p3>>P>=0.9[F c1+c2+c3>=1000]\n");
    const RunResult from_file = run_binary(
        dir, bin + " check --config " + cfg_path.string() + " --prop @" + prop_path.string());
    CHECK(from_file.code == 1);
    CHECK(from_file.out == "FALSE\n");

    const RunResult io_fail = run_binary(
        dir, bin + " stats --model " + (dir / "ghost.vdg").string());
    CHECK(io_fail.code == 3);
  }

  SUBCASE("multiple config properties run in order and keep the worst code") {
    const fs::path two_path = dir / "two.cfg";
    write_file(two_path, "k_max = 1\nout_dir = " + dir.string() +
                             "\nproperty = <<p1,p2,p3>>P>=1[F \"good\"]\n"
                             "property = <<p1,p2,p3>>P>=0.9[F c1+c2+c3>=1000]\n");
    const RunResult both = run_binary(dir, bin + " check --config " + two_path.string());
    CHECK(both.code == 1);
    CHECK(both.out == "TRUE\nFALSE\n");
  }

  SUBCASE("synth writes the default strategy path") {
    const RunResult synth = run_binary(dir, bin + " synth --config " + cfg_path.string() +
                                                " --prop '<<p1,p2,p3>>R{\"done123\"}max=?[F k=2]'");
    REQUIRE(synth.code == 0);
    CHECK(synth.out.substr(0, 18) == "value: 199.000000\n");
    CHECK(fs::exists(dir / "strategy.dot"));
  }

  SUBCASE("malformed VDG_THREADS only warns") {
    const RunResult run = run_binary(
        dir, "VDG_THREADS=abc " + bin + " check --config " + cfg_path.string());
    CHECK(run.code == 0);
    CHECK(run.err.find("warning: ignoring malformed VDG_THREADS\n") == 0);
  }
}
