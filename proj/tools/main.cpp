// Benchmark CLI: phase-diagram sweeps, the analytic diagram, numerical lemma
// checks, dataset generation, and SVG rendering.
//
// Exit codes: 0 success, 1 check/assertion failure, 2 usage or config error.

#include <chrono>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unlearn/blob_data.hpp"
#include "unlearn/config.hpp"
#include "unlearn/harness.hpp"
#include "unlearn/kernels.hpp"
#include "unlearn/results_io.hpp"
#include "unlearn/svg_heatmap.hpp"
#include "unlearn/theory.hpp"
#include "unlearn/verify.hpp"

namespace {

using namespace unlearn;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

UpdateRule erm_scratch_rule(const SweepConfig& sc, std::size_t n_retain) {
  if (sc.erm_rule == "decaying") return UpdateRule::scratch();
  if (sc.erm_rule == "constant") return UpdateRule::constant(sc.step0);
  const std::uint64_t steps_per_epoch =
      std::max<std::uint64_t>(1, (n_retain + sc.batch_size - 1) / sc.batch_size);
  return UpdateRule::geometric(sc.step0, sc.decay_factor,
                               sc.decay_every_epochs * steps_per_epoch);
}

SweepSpec base_sweep_spec(const SweepConfig& sc) {
  SweepSpec sw;
  sw.run.seed = sc.seed;
  sw.run.n_reps = sc.n_reps;
  sw.run.thresholds.assign(sc.e_grid.rbegin(), sc.e_grid.rend());  // descending
  sw.run.kdp_grid = sc.kdp_grid;
  sw.run.sensitivity_mode = sc.sensitivity_mode;
  sw.split = make_forget_split(sc.rf);
  sw.finetune_rule = sc.finetune_rule;
  sw.threads = sc.threads;
  return sw;
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              std::optional<int> threads_override, std::optional<std::string> out_override,
              std::optional<std::string> loss_override) {
  SweepConfig sc = SweepConfig::from_file(config_path);
  if (seed_override) sc.seed = *seed_override;
  if (threads_override) sc.threads = *threads_override;
  if (out_override) sc.out_csv = *out_override;
  if (loss_override) {
    if (*loss_override == "synthetic_quadratic")
      sc.loss_mode = LossMode::synthetic_quadratic;
    else if (*loss_override == "synthetic_experimental")
      sc.loss_mode = LossMode::synthetic_experimental;
    else if (*loss_override == "erm")
      sc.loss_mode = LossMode::erm;
    else
      throw UsageError("--loss must be synthetic_quadratic, synthetic_experimental, or erm");
    if (sc.loss_mode == LossMode::erm && sc.dataset_path.empty())
      throw UsageError("--loss erm needs erm.dataset in the config");
    if (sc.loss_mode == LossMode::synthetic_experimental && sc.dim % 2 != 0)
      throw UsageError("--loss synthetic_experimental needs an even problem.dim");
  }

  SweepSpec sw = base_sweep_spec(sc);
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult result;

  SweepMeta meta;
  meta.loss_mode = to_string(sc.loss_mode);
  meta.mu = sc.mu;
  meta.lipschitz = sc.lipschitz;
  meta.dim = sc.dim;
  meta.rf = sc.rf;
  meta.seed = sc.seed;
  meta.n_reps = sc.n_reps;

  if (sc.loss_mode == LossMode::erm) {
    const RawDataset raw = load_dataset_csv(sc.dataset_path);
    Rng split_rng = Rng::stream(sc.seed, {0x5911});
    ErmDataset data = split_dataset(raw.features, raw.labels, raw.p, sc.rf, split_rng);
    ErmOptions opts;
    opts.l2_weight = sc.l2_weight;
    opts.batch_size = sc.batch_size;
    opts.eval_every = sc.eval_every;
    opts.opt_tol = sc.opt_tol;
    opts.opt_max_iters = sc.opt_max_iters;
    Rng build_rng = Rng::stream(sc.seed, {0xe61});
    const ErmLoss loss = ErmLoss::build(std::move(data), opts, build_rng);

    sw.horizons = {sc.erm_max_steps};
    sw.run.max_steps = sc.erm_max_steps;
    sw.scratch_rule = erm_scratch_rule(sc, loss.dataset().retain_indices.size());
    // the CSV carries the problem constants the runs actually used: the L2
    // weight and the measured Lipschitz bound, over the K*p parameter space
    meta.mu = loss.problem().mu;
    meta.lipschitz = loss.problem().lipschitz;
    meta.dim = loss.problem().dim;
    if (sc.finetune_rule == FinetuneRuleKind::decaying && sc.erm_rule == "geometric")
      sw.finetune_rule = FinetuneRuleKind::scratch_schedule;
    result = sweep_phase_diagram([&](std::uint64_t) -> const ErmLoss& { return loss; }, sw);
    if (loss.clamp_events() > 0)
      std::fprintf(stderr, "note: retain excess clamped to 0 in %llu evaluations\n",
                   static_cast<unsigned long long>(loss.clamp_events()));
  } else {
    const ProblemSpec spec = make_problem(sc.mu, sc.lipschitz, sc.dim);
    sw.horizons = sc.horizons;
    auto mixture = [&](std::uint64_t horizon) {
      return make_hard_mixture(0.5 / std::sqrt(static_cast<double>(horizon)), sc.rf);
    };
    if (sc.loss_mode == LossMode::synthetic_quadratic) {
      result = sweep_phase_diagram(
          [&](std::uint64_t h) { return SyntheticQuadraticLoss(spec, mixture(h)); }, sw);
    } else {
      result = sweep_phase_diagram(
          [&](std::uint64_t h) { return SyntheticExperimentalLoss(spec, mixture(h)); }, sw);
    }
  }

  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

  write_results_csv_atomic(sc.out_csv, meta, result.cells);

  std::uint64_t censored_cells = 0;
  for (const PhaseCell& c : result.cells)
    censored_cells += (c.n_censored_scratch > 0 || c.n_censored_unlearn > 0) ? 1 : 0;
  std::printf("sweep: %zu cells (%zu thresholds x %zu kdp), %zu horizons, %llu reps\n",
              result.cells.size(), result.thresholds.size(), result.kdp_grid.size(),
              result.horizons.size(), static_cast<unsigned long long>(result.n_reps));
  std::printf("sweep: %llu cells with censored runs, wall %.2f s, kernels=%s -> %s\n",
              static_cast<unsigned long long>(censored_cells),
              static_cast<double>(elapsed.count()) / 1000.0,
              std::string(kernels::active().name).c_str(), sc.out_csv.c_str());
  if (result.n_diverged > 0)
    std::fprintf(stderr, "warning: %llu runs diverged; their cells stay censored\n",
                 static_cast<unsigned long long>(result.n_diverged));
  return 0;
}

int cmd_theory(double rf, double mu, double lipschitz, std::size_t dim,
               const theory::RegimeParams& params, const std::vector<double>& e_grid,
               const std::vector<double>& kdp_grid, const std::string& out_path) {
  const ProblemSpec spec = make_problem(mu, lipschitz, dim);
  const ForgetSplit split = make_forget_split(rf);
  std::string csv = "e,kdp,label,trivial_boundary,inefficient_boundary,efficient_threshold\n";
  char buf[256];
  for (double e : e_grid) {
    for (double k : kdp_grid) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g,%.17g,%.17g\n", e, k,
                    std::string(theory::to_string(theory::classify(spec, split, e, k, params))).c_str(),
                    theory::trivial_boundary(spec, split, k),
                    theory::inefficient_boundary(spec, split, k, params),
                    theory::efficient_threshold(spec, split, k, params));
      csv += buf;
    }
  }
  if (out_path == "-") {
    std::fputs(csv.c_str(), stdout);
  } else {
    std::FILE* f = std::fopen(out_path.c_str(), "wb");
    if (f == nullptr) throw UsageError("cannot open " + out_path + " for writing");
    std::fputs(csv.c_str(), f);
    std::fclose(f);
  }
  return 0;
}

int cmd_verify(const std::string& lemma, std::uint64_t seed, int tmax, int grid, int reps,
               int cases) {
  std::vector<verify::LemmaReport> reports;
  const bool all = lemma.empty();
  auto want = [&](const char* id) { return all || lemma == id; };

  if (want("opt_distance")) reports.push_back(verify::opt_distance_suite(cases, seed));
  if (want("opt_loss_gap")) reports.push_back(verify::opt_loss_gap_suite(cases, seed));
  if (want("binomial_tv")) reports.push_back(verify::check_binomial_tv_bound(tmax, grid));
  if (want("gaussian_tv_dp")) reports.push_back(verify::default_gaussian_tv_dp());
  if (want("finetune_rate")) {
    const ProblemSpec spec = make_problem(1.0, 25.0, 2);
    const ForgetSplit split = make_forget_split(0.01);
    const std::uint64_t horizons[] = {1000, 10000};
    reports.push_back(verify::check_finetune_rate(spec, split, 1.0, horizons, reps, seed));
  }
  if (reports.empty())
    throw UsageError("unknown lemma '" + lemma +
                     "' (valid: opt_distance, opt_loss_gap, binomial_tv, gaussian_tv_dp, "
                     "finetune_rate)");

  bool ok = true;
  for (const auto& r : reports) {
    std::printf("[%s] %-14s cases=%-6llu max_slack=%.6g\n", r.passed ? "PASS" : "FAIL",
                r.lemma_id.c_str(), static_cast<unsigned long long>(r.cases_checked),
                r.max_slack);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

int cmd_gen_data(std::size_t n, std::size_t p, int classes, double spread, std::uint64_t seed,
                 const std::string& out) {
  const BlobData d = gen_blobs(n, p, classes, spread, seed);
  write_dataset_csv(out, d.features, d.labels, d.p);
  std::printf("gen-data: wrote %zu rows x %zu features, %d classes -> %s\n", d.n, d.p, d.classes,
              out.c_str());
  return 0;
}

int cmd_plot(const std::string& in, const std::string& out, const HeatmapOptions& opts) {
  ParsedResults results;
  try {
    results = parse_results_csv(in);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  try {
    write_svg_heatmap(out, results, opts);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  std::printf("plot: %zu cells -> %s\n", results.cells.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified-unlearning complexity benchmark"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run the (e, kdp) phase-diagram sweep");
  std::string config_path;
  sweep->add_option("--config", config_path, "sweep configuration file")->required();
  std::optional<std::uint64_t> seed_override;
  sweep->add_option("--seed", seed_override, "override the config seed");
  std::optional<int> threads_override;
  sweep->add_option("--threads", threads_override, "worker threads (default: UNLEARN_THREADS)");
  std::optional<std::string> out_override;
  sweep->add_option("--out", out_override, "override the output CSV path");
  std::optional<std::string> loss_override;
  sweep->add_option("--loss", loss_override, "override the config loss mode");

  // theory
  auto* theory_cmd = app.add_subcommand("theory", "emit the analytic phase diagram as CSV");
  double t_rf = 0.01, t_mu = 1.0, t_lip = 25.0;
  std::size_t t_dim = 2;
  theory::RegimeParams t_params;
  double t_emin = 1e-2, t_emax = 1e2, t_kmin = 1e-2, t_kmax = 1e2;
  std::size_t t_ecount = 20, t_kcount = 10;
  std::string t_out = "-";
  theory_cmd->add_option("--rf", t_rf, "forget fraction");
  theory_cmd->add_option("--mu", t_mu, "strong convexity");
  theory_cmd->add_option("--L", t_lip, "Lipschitz constant");
  theory_cmd->add_option("--d", t_dim, "dimension");
  theory_cmd->add_option("--c-lower", t_params.c_lower, "inefficient-regime constant");
  theory_cmd->add_option("--c-upper", t_params.c_upper, "efficient-regime constant");
  theory_cmd->add_option("--gamma", t_params.gamma_eff, "efficient-regime target ratio");
  theory_cmd->add_option("--e-min", t_emin);
  theory_cmd->add_option("--e-max", t_emax);
  theory_cmd->add_option("--e-count", t_ecount);
  theory_cmd->add_option("--kdp-min", t_kmin);
  theory_cmd->add_option("--kdp-max", t_kmax);
  theory_cmd->add_option("--kdp-count", t_kcount);
  theory_cmd->add_option("--out", t_out, "output CSV path ('-' for stdout)");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the numerical lemma checks");
  std::string v_lemma;
  std::uint64_t v_seed = 7;
  int v_tmax = 30, v_grid = 50, v_reps = 50, v_cases = 100;
  verify_cmd->add_option("--lemma", v_lemma, "run one check only");
  verify_cmd->add_option("--seed", v_seed);
  verify_cmd->add_option("--tmax", v_tmax, "binomial check: largest T");
  verify_cmd->add_option("--grid", v_grid, "binomial check: gamma grid size");
  verify_cmd->add_option("--reps", v_reps, "finetune-rate check: repetitions");
  verify_cmd->add_option("--cases", v_cases, "optimum checks: random mixtures");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a Gaussian-blobs dataset CSV");
  std::size_t g_n = 200, g_p = 4;
  int g_classes = 3;
  double g_spread = 1.0;
  std::uint64_t g_seed = 7;
  std::string g_out;
  gen->add_option("--n", g_n, "rows");
  gen->add_option("--p", g_p, "features");
  gen->add_option("--classes", g_classes, "class count");
  gen->add_option("--spread", g_spread, "within-class standard deviation");
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out, "output CSV path")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "render a results CSV as an SVG heatmap");
  std::string p_in, p_out;
  HeatmapOptions p_opts;
  plot->add_option("--in", p_in, "results CSV")->required();
  plot->add_option("--out", p_out, "output SVG path")->required();
  plot->add_option("--value", p_opts.value_column,
                   "cell value column (ratio, t_scratch_mean, t_unlearn_mean)");
  plot->add_flag("--overlay-theory", p_opts.overlay_theory, "draw the analytic boundaries");
  bool p_linear_x = false, p_linear_y = false;
  plot->add_flag("--linear-x", p_linear_x, "linear kdp axis");
  plot->add_flag("--linear-y", p_linear_y, "linear e axis");
  plot->add_option("--width", p_opts.width);
  plot->add_option("--height", p_opts.height);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (sweep->parsed())
      return cmd_sweep(config_path, seed_override, threads_override, out_override, loss_override);
    if (theory_cmd->parsed()) {
      return cmd_theory(t_rf, t_mu, t_lip, t_dim, t_params, log_spaced(t_emin, t_emax, t_ecount),
                        log_spaced(t_kmin, t_kmax, t_kcount), t_out);
    }
    if (verify_cmd->parsed()) return cmd_verify(v_lemma, v_seed, v_tmax, v_grid, v_reps, v_cases);
    if (gen->parsed()) return cmd_gen_data(g_n, g_p, g_classes, g_spread, g_seed, g_out);
    if (plot->parsed()) {
      p_opts.log_x = !p_linear_x;
      p_opts.log_y = !p_linear_y;
      return cmd_plot(p_in, p_out, p_opts);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
