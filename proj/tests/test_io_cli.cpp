#include <doctest.h>

#include "replichain/io.hpp"
#include "replichain/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using namespace replichain;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(REPLICHAIN_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("config parser reads typed values and trims comments") {
  Config cfg = Config::parse_string(
      "# a comment\n"
      "N = 4\n"
      "gamma = 0.5  # trailing comment\n"
      "sample_times = 1, 2.5, 7\n"
      "integrator = exact\n");
  CHECK(cfg.get_int("N") == 4);
  CHECK(cfg.get_double("gamma") == 0.5);
  CHECK(cfg.get_string("integrator") == "exact");
  const auto ts = cfg.get_double_list("sample_times");
  REQUIRE(ts.size() == 3);
  CHECK(ts[1] == 2.5);
  CHECK_NOTHROW(cfg.reject_unknown());
}

TEST_CASE("config parser rejects what it should") {
  CHECK_THROWS_WITH_AS(Config::parse_string("N = 1\nN = 2\n").get_int("N"),
                       "duplicate config key: N", ConfigError);
  Config cfg = Config::parse_string("N = 4\ntypo_key = 1\n");
  cfg.get_int("N");
  CHECK_THROWS_WITH_AS(cfg.reject_unknown(), "unknown config key: typo_key",
                       ConfigError);
  Config bad = Config::parse_string("N = four\n");
  CHECK_THROWS_AS(bad.get_int("N"), ConfigError);
  Config missing = Config::parse_string("");
  CHECK_THROWS_WITH_AS(missing.get_double("gamma"),
                       "missing required config key: gamma", ConfigError);
}

TEST_CASE("experiment config validation names the offending key") {
  auto parse = [](const std::string& text, const std::string& mode) {
    Config cfg = Config::parse_string(text);
    return ExperimentConfig::from_config(cfg, mode);
  };
  CHECK_THROWS_WITH_AS(parse("N = 0\ngamma = 1\nt_end = 1\n", "simulate"),
                       "config key N must be >= 1", ConfigError);
  CHECK_THROWS_WITH_AS(parse("N = 2\ngamma = -1\nt_end = 1\n", "simulate"),
                       "config key gamma must be > 0", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse("N = 2\ngamma = 1\nt_end = 1\nsample_times = 2, 1\n", "simulate"),
      "config key sample_times must be strictly increasing", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse("N = 2\ngamma = 1\nt_end = 1\nsample_times = 0.5, 2\n", "simulate"),
      "config key sample_times must not exceed t_end", ConfigError);
  CHECK_THROWS_WITH_AS(parse("N = 2\nsweep_grid = \n", "sweep"),
                       "config key sweep_grid has an empty list entry", ConfigError);
  CHECK_THROWS_WITH_AS(parse("N = 2\nmu = 1\nsweep_axis = size\nsweep_grid = 1\n", "sweep"),
                       "config key sweep_axis must be gamma or mu", ConfigError);
  // keys that exist but do not belong to the mode are hard errors too
  CHECK_THROWS_WITH_AS(parse("N = 2\ngamma = 1\nt_end = 1\nsweep_grid = 1, 2\n",
                             "simulate"),
                       "unknown config key: sweep_grid", ConfigError);
}

TEST_CASE("doubles survive the shortest round-trip encoding") {
  for (double v : {1.0 / 3.0, 6.02214076e23, 1e-300, -0.0, 123456789.123456789,
                   0.1, 2.0, 1e308}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(parse_double("inf") == std::numeric_limits<double>::infinity());
}

TEST_CASE("csv tables round-trip losslessly") {
  CsvTable t;
  t.header = {"time", "p", "observable", "value"};
  t.add_row({"0.5", "0", "magnetization", format_double(1.0 / 3.0)});
  t.add_row({"inf", "3", "current", format_double(-2.75e-11)});
  const std::string text = t.to_string();
  CHECK(text.find("\r") == std::string::npos);
  const CsvTable back = CsvTable::from_string(text);
  REQUIRE(back.header == t.header);
  REQUIRE(back.rows == t.rows);
  CHECK(back.to_string() == text);
}

TEST_CASE("content hash matches the published test vector") {
  CHECK(content_hash("abc") == "fnv1a:e71fa2190541574b");
  CHECK(content_hash("") == "fnv1a:cbf29ce484222325");
}

TEST_CASE("cli: identical configs produce byte-identical data files") {
  const fs::path dir = fresh_dir("replichain_cli_det");
  const fs::path cfg = dir / "run.cfg";
  write_file(cfg,
             "N = 4\n"
             "gamma = 0.5\n"
             "mu = 1\n"
             "t_end = 5\n"
             "sample_times = 1, 3, 5\n"
             "series_dt = 0.5\n");
  const int rc1 = run_cli("simulate --config " + cfg.string() + " --out " +
                              (dir / "out1").string() + " --quiet",
                          dir / "log1.txt");
  const int rc2 = run_cli("simulate --config " + cfg.string() + " --out " +
                              (dir / "out2").string() + " --quiet",
                          dir / "log2.txt");
  REQUIRE(rc1 == 0);
  REQUIRE(rc2 == 0);
  for (const std::string f : {"profiles.csv", "series.csv"}) {
    const std::string a = read_file(dir / "out1" / f);
    const std::string b = read_file(dir / "out2" / f);
    CHECK(a == b);
    CHECK(!a.empty());
  }
  const std::string profiles = read_file(dir / "out1" / "profiles.csv");
  CHECK(profiles.rfind("time,p,observable,value\n", 0) == 0);
  // the manifest lists both data files with their hashes
  const std::string man = read_file(dir / "out1" / "manifest.json");
  CHECK(man.find("profiles.csv") != std::string::npos);
  CHECK(man.find("series.csv") != std::string::npos);
  CHECK(man.find(content_hash(profiles)) != std::string::npos);
}

TEST_CASE("cli: config errors exit with code 2 and name the key") {
  const fs::path dir = fresh_dir("replichain_cli_err");
  write_file(dir / "bad1.cfg", "N = 0\ngamma = 1\nt_end = 1\n");
  CHECK(run_cli("simulate --config " + (dir / "bad1.cfg").string() + " --out " +
                    (dir / "o1").string(),
                dir / "log1.txt") == 2);
  CHECK(read_file(dir / "log1.txt").find("N") != std::string::npos);

  write_file(dir / "bad2.cfg", "N = 2\ngamma = 1\nt_end = 1\ngama = 3\n");
  CHECK(run_cli("simulate --config " + (dir / "bad2.cfg").string() + " --out " +
                    (dir / "o2").string(),
                dir / "log2.txt") == 2);
  CHECK(read_file(dir / "log2.txt").find("gama") != std::string::npos);

  write_file(dir / "bad3.cfg", "N = 2\ngamma = 1\nsweep_axis = mu\n");
  CHECK(run_cli("sweep --config " + (dir / "bad3.cfg").string() + " --out " +
                    (dir / "o3").string(),
                dir / "log3.txt") == 2);
  CHECK(read_file(dir / "log3.txt").find("sweep_grid") != std::string::npos);
}

TEST_CASE("cli: steady emits an infinite-time snapshot") {
  const fs::path dir = fresh_dir("replichain_cli_steady");
  write_file(dir / "s.cfg", "N = 4\ngamma = 0.7\n");
  REQUIRE(run_cli("steady --config " + (dir / "s.cfg").string() + " --out " +
                      (dir / "out").string() + " --quiet",
                  dir / "log.txt") == 0);
  const CsvTable t =
      CsvTable::from_string(read_file(dir / "out" / "profiles.csv"));
  REQUIRE(!t.rows.empty());
  CHECK(t.rows[0][0] == "inf");
  // the replicated steady state carries unit pair concurrence at every distance
  for (const auto& row : t.rows)
    if (row[2] == "cross_concurrence")
      CHECK(parse_double(row[3]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cli: sweep aggregates in grid order and analyze fits the output") {
  const fs::path dir = fresh_dir("replichain_cli_sweep");
  write_file(dir / "sw.cfg",
             "N = 8\n"
             "mu = 1\n"
             "sweep_axis = gamma\n"
             "sweep_grid = 0.4, 0.5, 1.0\n");
  REQUIRE(run_cli("sweep --config " + (dir / "sw.cfg").string() + " --out " +
                      (dir / "out").string() + " --threads 2 --quiet",
                  dir / "log.txt") == 0);
  const CsvTable agg =
      CsvTable::from_string(read_file(dir / "out" / "aggregate.csv"));
  REQUIRE(agg.header ==
          std::vector<std::string>{"gamma_or_mu", "xi", "j_star", "beta", "cc0"});
  REQUIRE(agg.rows.size() == 3);
  CHECK(agg.rows[0][0] == "0.4");
  CHECK(agg.rows[1][0] == "0.5");
  CHECK(agg.rows[2][0] == "1");
  for (const auto& row : agg.rows) CHECK(parse_double(row[2]) > 0.0); // j*
  CHECK(fs::exists(dir / "out" / "point_000" / "profiles.csv"));
  CHECK(fs::exists(dir / "out" / "point_002" / "profiles.csv"));

  write_file(dir / "an.cfg",
             "input = " + (dir / "out" / "point_001").string() + "\n" +
                 "fits = xi\n");
  REQUIRE(run_cli("analyze --config " + (dir / "an.cfg").string() + " --out " +
                      (dir / "anout").string() + " --quiet",
                  dir / "log2.txt") == 0);
  const CsvTable an =
      CsvTable::from_string(read_file(dir / "anout" / "analysis.csv"));
  REQUIRE(!an.rows.empty());
  CHECK(an.rows[0][0] == "cross_concurrence");
  CHECK(an.rows[0][1] == "xi");
  CHECK(parse_double(an.rows[0][2]) > 0.0);
}

TEST_CASE("cli: validate rejects unexpected config keys") {
  const fs::path dir = fresh_dir("replichain_cli_val");
  write_file(dir / "v.cfg", "N = 4\n");
  CHECK(run_cli("validate --config " + (dir / "v.cfg").string() + " --out " +
                    (dir / "out").string(),
                dir / "log.txt") == 2);
}
