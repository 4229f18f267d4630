#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "unlearn/config.hpp"
#include "unlearn/results_io.hpp"
#include "unlearn/svg_heatmap.hpp"

using namespace unlearn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "unlearn_cli_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  REQUIRE(out);
  out << text;
}

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const fs::path out_path = temp_dir() / "cli_output.txt";
  const std::string cmd =
      std::string(UNLEARN_CLI_PATH) + " " + args + " > " + out_path.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  return r;
}

}  // namespace

// --------------------------------------------------------------------------
// config parsing

TEST_CASE("config: sections, scalars, arrays, comments") {
  const Config cfg = Config::parse_string(
      "# top comment\n"
      "[problem]\n"
      "mu = 2.5       # trailing comment\n"
      "dim = 4\n"
      "[sweep]\n"
      "loss = \"erm\"\n"
      "flag = true\n"
      "[grids]\n"
      "e_values = [10.0, 1.0, 0.1]\n"
      "names = [a, b]\n");
  CHECK(cfg.get_double("problem.mu", 0.0) == 2.5);
  CHECK(cfg.get_int("problem.dim", 0) == 4);
  CHECK(cfg.get_string("sweep.loss", "") == "erm");
  CHECK(cfg.get_bool("sweep.flag", false));
  CHECK(cfg.get_double_list("grids.e_values") == std::vector<double>{10.0, 1.0, 0.1});
  CHECK(cfg.get_double("missing.key", -1.0) == -1.0);
  CHECK(cfg.line_of("problem.mu") == 3);
}

TEST_CASE("config: line-precise errors") {
  try {
    Config::parse_string("[problem]\nmu == 1\n", "bad.toml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.toml:2") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse_string("[x]\na = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("justtext\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[x]\nlist = [1, 2\n"), ConfigError);

  const Config cfg = Config::parse_string("[a]\nx = 1\n");
  CHECK_THROWS_AS(cfg.get_string("a.x", ""), ConfigError);
  CHECK_THROWS_AS(cfg.require_known_keys({"a.y"}), ConfigError);
  CHECK_NOTHROW(cfg.require_known_keys({"a.x"}));
}

TEST_CASE("sweep config: defaults and validation") {
  const SweepConfig def = SweepConfig::from_config(Config::parse_string(""));
  CHECK(def.mu == 1.0);
  CHECK(def.lipschitz == 25.0);
  CHECK(def.rf == 0.01);
  CHECK(def.n_reps == 50);
  CHECK(def.e_grid.size() == 20);
  CHECK(def.e_grid.front() == doctest::Approx(1e-2));
  CHECK(def.e_grid.back() == doctest::Approx(1e2));
  CHECK(def.kdp_grid.size() == 10);
  CHECK(def.horizons.size() == 13);
  CHECK(def.horizons.front() == 1);
  CHECK(def.horizons.back() == 1000000);
  CHECK(def.loss_mode == LossMode::synthetic_experimental);
  CHECK(def.sensitivity_mode == SensitivityMode::measured);

  CHECK_THROWS_AS(
      SweepConfig::from_config(Config::parse_string("[sweep]\nloss = bogus\n")), ConfigError);
  CHECK_THROWS_AS(
      SweepConfig::from_config(Config::parse_string("[sweep]\nloss = erm\n")), ConfigError);
  CHECK_THROWS_AS(
      SweepConfig::from_config(Config::parse_string("[problem]\nrf = 1.5\n")), ConfigError);
  CHECK_THROWS_AS(
      SweepConfig::from_config(Config::parse_string("[grids]\ne_values = [1.0, 0.5]\n")),
      ConfigError);
  CHECK_THROWS_AS(
      SweepConfig::from_config(Config::parse_string("[grids]\ne_values = [0.5, 0.5, 1.0]\n")),
      ConfigError);
  CHECK_THROWS_AS(
      SweepConfig::from_config(Config::parse_string("[typo]\nx = 1\n")), ConfigError);
}

TEST_CASE("log_spaced endpoints and monotonicity") {
  const std::vector<double> g = log_spaced(1e-2, 1e2, 9);
  CHECK(g.size() == 9);
  CHECK(g.front() == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK(g.back() == doctest::Approx(1e2).epsilon(1e-12));
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(log_spaced(5.0, 5.0, 1) == std::vector<double>{5.0});
}

// --------------------------------------------------------------------------
// results CSV

namespace {

std::vector<PhaseCell> sample_cells() {
  std::vector<PhaseCell> cells;
  PhaseCell a;
  a.e = 0.017453292519943295;
  a.kdp = 0.1;
  a.mean_t_scratch = 1234.5678901234567;
  a.mean_t_unlearn = 17.0;
  a.ratio = 17.0 / 1234.5678901234567;
  a.n_censored_scratch = 3;
  cells.push_back(a);
  PhaseCell b;
  b.e = 100.0;
  b.kdp = 0.1;
  b.mean_t_scratch = 0.0;
  b.mean_t_unlearn = 5.0;
  b.ratio = std::numeric_limits<double>::infinity();
  b.n_censored_unlearn = 2;
  cells.push_back(b);
  return cells;
}

SweepMeta sample_meta() {
  SweepMeta meta;
  meta.loss_mode = "synthetic_experimental";
  meta.mu = 1.0;
  meta.lipschitz = 25.0;
  meta.dim = 2;
  meta.rf = 0.01;
  meta.seed = 99;
  meta.n_reps = 50;
  return meta;
}

}  // namespace

TEST_CASE("results CSV round-trips every numeric field exactly") {
  const std::string text = results_csv(sample_meta(), sample_cells());
  const ParsedResults parsed = parse_results_csv_text(text);
  REQUIRE(parsed.cells.size() == 2);
  CHECK(parsed.meta.loss_mode == "synthetic_experimental");
  CHECK(parsed.meta.rf == 0.01);
  CHECK(parsed.meta.seed == 99);
  CHECK(parsed.cells[0].e == sample_cells()[0].e);
  CHECK(parsed.cells[0].mean_t_scratch == sample_cells()[0].mean_t_scratch);
  CHECK(parsed.cells[0].ratio == sample_cells()[0].ratio);
  CHECK(parsed.cells[0].n_censored_scratch == 3);
  CHECK(std::isinf(parsed.cells[1].ratio));

  // emit(parse(emit(x))) == emit(x)
  CHECK(results_csv(parsed.meta, parsed.cells) == text);
}

TEST_CASE("results CSV parse errors name the problem") {
  CHECK_THROWS_WITH_AS(parse_results_csv_text("", "x.csv"), "x.csv: empty file",
                       std::runtime_error);
  try {
    parse_results_csv_text("loss_mode,mu\n", "x.csv");
    FAIL("expected missing-column error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("missing column 'L'") != std::string::npos);
  }
  const std::string header(kResultsHeader);
  CHECK_THROWS_AS(parse_results_csv_text(header + "\n", "x.csv"), std::runtime_error);
  CHECK_THROWS_AS(parse_results_csv_text(header + "\na,b\n", "x.csv"), std::runtime_error);
}

TEST_CASE("atomic write leaves no temp file behind") {
  const fs::path path = temp_dir() / "atomic.csv";
  write_results_csv_atomic(path.string(), sample_meta(), sample_cells());
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  const ParsedResults parsed = parse_results_csv(path.string());
  CHECK(parsed.cells.size() == 2);
}

// --------------------------------------------------------------------------
// svg

namespace {

std::vector<PhaseCell> grid_cells(std::size_t ne, std::size_t nk, bool with_censor) {
  std::vector<PhaseCell> cells;
  for (std::size_t i = 0; i < ne; ++i) {
    for (std::size_t j = 0; j < nk; ++j) {
      PhaseCell c;
      c.e = std::pow(10.0, -2.0 + static_cast<double>(i));
      c.kdp = std::pow(10.0, -1.0 + static_cast<double>(j));
      c.mean_t_scratch = 100.0;
      c.mean_t_unlearn = static_cast<double>(i * nk + j);
      c.ratio = c.mean_t_unlearn / c.mean_t_scratch;
      if (with_censor && i == 0 && j == 0) c.n_censored_unlearn = 1;
      cells.push_back(c);
    }
  }
  return cells;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("svg heatmap structure: one cell rect per grid cell, hatch for censored") {
  ParsedResults results;
  results.meta = sample_meta();
  results.cells = grid_cells(4, 3, true);
  const std::string svg = render_svg_heatmap(results, HeatmapOptions{});
  CHECK(count_occurrences(svg, "class=\"cell\"") == 12);
  CHECK(count_occurrences(svg, "class=\"censored\"") == 1);
  CHECK(svg.find("url(#hatch)") != std::string::npos);
  CHECK(svg.find("<svg xmlns") != std::string::npos);
}

TEST_CASE("svg theory overlay adds named boundary paths") {
  ParsedResults results;
  results.meta = sample_meta();
  results.cells = grid_cells(5, 4, false);
  HeatmapOptions opts;
  opts.overlay_theory = true;
  const std::string svg = render_svg_heatmap(results, opts);
  CHECK(svg.find("id=\"theory-trivial\"") != std::string::npos);
  CHECK(svg.find("id=\"theory-inefficient\"") != std::string::npos);
  CHECK(svg.find("id=\"theory-efficient\"") != std::string::npos);
}

TEST_CASE("svg falls back to a linear axis when the grid contains kdp = 0") {
  ParsedResults results;
  results.meta = sample_meta();
  for (int i = 0; i < 2; ++i) {
    for (double k : {0.0, 1.0, 2.0}) {
      PhaseCell c;
      c.e = i == 0 ? 0.1 : 10.0;
      c.kdp = k;
      c.mean_t_scratch = 4.0;
      c.mean_t_unlearn = k;
      c.ratio = k / 4.0;
      results.cells.push_back(c);
    }
  }
  HeatmapOptions opts;
  opts.value_column = "t_unlearn_mean";
  const std::string svg = render_svg_heatmap(results, opts);
  CHECK(count_occurrences(svg, "class=\"cell\"") == 6);
}

TEST_CASE("svg rejects incomplete grids and unknown value columns") {
  ParsedResults results;
  results.meta = sample_meta();
  results.cells = grid_cells(2, 2, false);
  results.cells.pop_back();
  CHECK_THROWS_AS(render_svg_heatmap(results, HeatmapOptions{}), std::runtime_error);

  results.cells = grid_cells(2, 2, false);
  HeatmapOptions opts;
  opts.value_column = "nope";
  CHECK_THROWS_AS(render_svg_heatmap(results, opts), std::runtime_error);
}

// --------------------------------------------------------------------------
// CLI subprocess checks

TEST_CASE("cli: gen-data is deterministic and loadable") {
  const fs::path a = temp_dir() / "blobs_a.csv";
  const fs::path b = temp_dir() / "blobs_b.csv";
  const std::string flags = "gen-data --n 50 --p 4 --classes 3 --seed 7 --out ";
  CHECK(run_cli(flags + a.string()).code == 0);
  CHECK(run_cli(flags + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).substr(0, 18) == "f0,f1,f2,f3,label\n");
  CHECK(count_occurrences(slurp(a), "\n") == 51);

  // classes=1 degenerates fine
  const fs::path c = temp_dir() / "blobs_c.csv";
  CHECK(run_cli("gen-data --n 10 --p 2 --classes 1 --seed 3 --out " + c.string()).code == 0);

  CHECK(run_cli("gen-data --n 10 --p 2 --out /no/such/dir/x.csv").code == 2);
}

TEST_CASE("cli: smoke sweep completes quickly and writes the schema") {
  const fs::path cfg_path = temp_dir() / "smoke.toml";
  const fs::path csv_path = temp_dir() / "smoke.csv";
  spit(cfg_path,
       "[sweep]\nn_reps = 1\nseed = 5\n"
       "[grids]\nhorizon_values = [1]\ne_values = [100.0]\nkdp_values = [1.0]\n"
       "[output]\ncsv = \"" + csv_path.string() + "\"\n");
  const CliResult r = run_cli("sweep --config " + cfg_path.string());
  CHECK(r.code == 0);
  const ParsedResults parsed = parse_results_csv(csv_path.string());
  CHECK(parsed.cells.size() == 1);
  CHECK(parsed.cells[0].ratio == 0.0);  // e = 100 >= e0: both times are zero
}

TEST_CASE("cli: sweep honors --threads and --seed and is byte-deterministic") {
  const fs::path cfg_path = temp_dir() / "det.toml";
  const fs::path csv1 = temp_dir() / "det1.csv";
  const fs::path csv2 = temp_dir() / "det2.csv";
  spit(cfg_path,
       "[sweep]\nn_reps = 4\nseed = 123\n"
       "[grids]\nhorizon_values = [1, 64]\ne_values = [0.5, 5.0, 50.0]\n"
       "kdp_values = [0.1, 10.0]\n");
  CHECK(run_cli("sweep --config " + cfg_path.string() + " --threads 1 --out " + csv1.string())
            .code == 0);
  CHECK(run_cli("sweep --config " + cfg_path.string() + " --threads 3 --out " + csv2.string())
            .code == 0);
  CHECK(slurp(csv1) == slurp(csv2));

  const fs::path csv3 = temp_dir() / "det3.csv";
  CHECK(run_cli("sweep --config " + cfg_path.string() + " --seed 999 --out " + csv3.string())
            .code == 0);
  CHECK(slurp(csv1) != slurp(csv3));
}

TEST_CASE("cli: malformed config exits 2 with a line-precise message") {
  const fs::path cfg_path = temp_dir() / "broken.toml";
  spit(cfg_path, "[grids]\ne_count = -3\n");
  const CliResult r = run_cli("sweep --config " + cfg_path.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("broken.toml:2") != std::string::npos);

  CHECK(run_cli("sweep --config /no/such/file.toml").code == 2);
}

TEST_CASE("cli: theory emits the analytic diagram") {
  const CliResult r = run_cli("theory --rf 0.01 --d 2 --e-count 4 --kdp-count 3 --out -");
  CHECK(r.code == 0);
  CHECK(r.out.find("e,kdp,label,trivial_boundary,inefficient_boundary,efficient_threshold") == 0);
  CHECK(count_occurrences(r.out, "\n") == 13);
  CHECK(r.out.find("LearningTrivial") != std::string::npos);

  // rf = 0: everything is Trivial or LearningTrivial
  const CliResult zero = run_cli("theory --rf 0 --e-count 5 --kdp-count 2 --out -");
  CHECK(zero.code == 0);
  CHECK(zero.out.find("Inefficient") == std::string::npos);
  CHECK(zero.out.find("Efficient") == std::string::npos);

  CHECK(run_cli("theory --rf 1.5 --out -").code == 2);
}

TEST_CASE("cli: verify subcommand statuses") {
  const CliResult one = run_cli("verify --lemma binomial_tv --tmax 5 --grid 12");
  CHECK(one.code == 0);
  CHECK(one.out.find("[PASS] binomial_tv") != std::string::npos);
  CHECK(count_occurrences(one.out, "\n") == 1);

  CHECK(run_cli("verify --lemma not_a_lemma").code == 2);
}

TEST_CASE("cli: full default verify run passes every lemma") {
  const CliResult all = run_cli("verify --reps 20");
  CHECK(all.code == 0);
  CHECK(count_occurrences(all.out, "[PASS]") == 5);
  CHECK(all.out.find("[FAIL]") == std::string::npos);
  CHECK(all.out.find("opt_distance") != std::string::npos);
  CHECK(all.out.find("finetune_rate") != std::string::npos);
}

TEST_CASE("cli: plot happy path, overlay, and failure modes") {
  const fs::path cfg_path = temp_dir() / "plot.toml";
  const fs::path csv_path = temp_dir() / "plot.csv";
  const fs::path svg_path = temp_dir() / "plot.svg";
  spit(cfg_path,
       "[sweep]\nn_reps = 2\nseed = 9\n"
       "[grids]\nhorizon_values = [1, 32]\ne_values = [0.1, 1.0, 10.0]\nkdp_values = [0.1, 1.0]\n");
  REQUIRE(run_cli("sweep --config " + cfg_path.string() + " --out " + csv_path.string()).code == 0);

  CHECK(run_cli("plot --in " + csv_path.string() + " --out " + svg_path.string() +
                " --overlay-theory").code == 0);
  const std::string svg = slurp(svg_path);
  CHECK(count_occurrences(svg, "class=\"cell\"") == 6);
  CHECK(svg.find("id=\"theory-trivial\"") != std::string::npos);

  // header-only CSV: exit 2
  const fs::path empty_csv = temp_dir() / "empty.csv";
  spit(empty_csv, std::string(kResultsHeader) + "\n");
  CHECK(run_cli("plot --in " + empty_csv.string() + " --out " + svg_path.string()).code == 2);

  // missing column: exit 2 and the message names it
  const fs::path bad_csv = temp_dir() / "bad.csv";
  spit(bad_csv, "loss_mode,mu\nx,1\n");
  const CliResult bad = run_cli("plot --in " + bad_csv.string() + " --out " + svg_path.string());
  CHECK(bad.code == 2);
  CHECK(bad.out.find("missing column") != std::string::npos);

  CHECK(run_cli("plot --in " + csv_path.string() + " --out " + svg_path.string() +
                " --value bogus").code == 2);
}

TEST_CASE("cli: erm sweep over generated blobs") {
  const fs::path data_path = temp_dir() / "erm_blobs.csv";
  REQUIRE(run_cli("gen-data --n 60 --p 3 --classes 2 --seed 11 --out " + data_path.string())
              .code == 0);
  const fs::path cfg_path = temp_dir() / "erm.toml";
  const fs::path csv_path = temp_dir() / "erm_results.csv";
  spit(cfg_path,
       "[problem]\nrf = 0.2\n"
       "[sweep]\nloss = erm\nn_reps = 2\nseed = 21\n"
       "[grids]\ne_values = [0.001, 0.1, 10.0]\nkdp_values = [1.0]\n"
       "[erm]\ndataset = \"" + data_path.string() + "\"\nbatch_size = 8\nmax_steps = 500\n"
       "eval_every = 5\n");
  const CliResult r = run_cli("sweep --config " + cfg_path.string() + " --out " + csv_path.string());
  CHECK(r.code == 0);
  const ParsedResults parsed = parse_results_csv(csv_path.string());
  CHECK(parsed.meta.loss_mode == "erm");
  CHECK(parsed.cells.size() == 3);
}

TEST_CASE("cli: UNLEARN_KERNELS override is honored (and bogus values warn)") {
  const fs::path cfg_path = temp_dir() / "kern.toml";
  const fs::path csv_path = temp_dir() / "kern.csv";
  spit(cfg_path,
       "[sweep]\nn_reps = 1\nseed = 5\n"
       "[grids]\nhorizon_values = [1]\ne_values = [100.0]\nkdp_values = [1.0]\n");
  for (const char* kern : {"scalar", "bogus"}) {
    const std::string cmd = std::string("UNLEARN_KERNELS=") + kern + " " + UNLEARN_CLI_PATH +
                            " sweep --config " + cfg_path.string() + " --out " +
                            csv_path.string() + " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  }
}

TEST_CASE("cli: --loss override validates its value") {
  const fs::path cfg_path = temp_dir() / "loss_override.toml";
  const fs::path csv_path = temp_dir() / "loss_override.csv";
  spit(cfg_path,
       "[sweep]\nn_reps = 1\nseed = 5\n"
       "[grids]\nhorizon_values = [1]\ne_values = [100.0]\nkdp_values = [1.0]\n");
  const std::string base = "sweep --config " + cfg_path.string() + " --out " + csv_path.string();
  CHECK(run_cli(base + " --loss synthetic_quadratic").code == 0);
  CHECK(parse_results_csv(csv_path.string()).meta.loss_mode == "synthetic_quadratic");
  CHECK(run_cli(base + " --loss erm").code == 2);    // no dataset configured
  CHECK(run_cli(base + " --loss bogus").code == 2);
}

TEST_CASE("cli: UNLEARN_THREADS env default is accepted") {
  const fs::path cfg_path = temp_dir() / "env.toml";
  const fs::path csv_path = temp_dir() / "env.csv";
  spit(cfg_path,
       "[sweep]\nn_reps = 1\nseed = 5\n"
       "[grids]\nhorizon_values = [1]\ne_values = [100.0]\nkdp_values = [1.0]\n");
  const std::string cmd = "UNLEARN_THREADS=2 " + std::string(UNLEARN_CLI_PATH) +
                          " sweep --config " + cfg_path.string() + " --out " + csv_path.string() +
                          " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
}
