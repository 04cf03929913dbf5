#pragma once

// Command-line front end. Exit codes: 0 success, 1 validation/usage error,
// 2 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sdsbm/em.hpp"
#include "sdsbm/error.hpp"
#include "sdsbm/experiments.hpp"
#include "sdsbm/fit_io.hpp"
#include "sdsbm/network.hpp"
#include "sdsbm/network_io.hpp"

namespace sdsbm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

namespace detail_cli {

struct NetworkFlags {
  int types = 3;
  std::vector<int> nodes_per_type;
  long block_n = 1000;
  int period = 8;
  double bias = 0.5;
  std::string offsets = "auto";
  double amplitude = 0.3;
  double q_m = 1e-8;
  double q_s = 1e-8;
  double r = 5.5e-3;
  int steps = 80;
  std::uint64_t seed = 0;
  bool adjacency = false;

  void add_to(CLI::App& app, bool with_steps = true) {
    app.add_option("--types", types, "number of node types k")->capture_default_str();
    app.add_option("--nodes-per-type", nodes_per_type, "node count per type (derives n per block)")->delimiter(',');
    app.add_option("--block-n", block_n, "possible edges per block (ignored when --nodes-per-type is given)")
        ->capture_default_str();
    app.add_option("--period", period, "season length d")->capture_default_str();
    app.add_option("--bias", bias, "initial bias m0")->capture_default_str();
    app.add_option("--offsets", offsets, "initial offsets: paper-d8 | sine | zero | comma list | auto")
        ->capture_default_str();
    app.add_option("--amplitude", amplitude, "sine amplitude for --offsets sine")->capture_default_str();
    app.add_option("--q-m", q_m, "bias process variance")->capture_default_str();
    app.add_option("--q-s", q_s, "seasonal process variance")->capture_default_str();
    app.add_option("--r", r, "density measurement variance")->capture_default_str();
    if (with_steps) app.add_option("--steps", steps, "number of time steps T")->capture_default_str();
    app.add_option("--seed", seed, "master seed")->capture_default_str();
  }

  NetworkConfig config() const {
    NetworkConfig cfg;
    cfg.k = types;
    cfg.d = period;
    cfg.T = steps;
    cfg.seed = seed;
    cfg.nodes_per_type = nodes_per_type;
    cfg.gen.m0 = bias;
    const std::string preset = offsets == "auto" ? (period == 8 ? "paper-d8" : "sine") : offsets;
    cfg.gen.period_offsets = offsets_from_spec(preset, period, amplitude);
    cfg.gen.noise = {q_m, q_s, r};
    if (nodes_per_type.empty()) cfg.gen.block_n = block_n;
    cfg.gen.adjacency = adjacency;
    return cfg;
  }
};

struct FitFlags {
  int max_iters = 200;
  double tol = 1e-6;
  double init_q_m = FitConfig{}.q_m;
  double init_q_s = FitConfig{}.q_s;
  double init_r = FitConfig{}.r;
  double r_lo = 1e-12;
  double r_hi = 1.0;
  bool ones_init = false;

  void add_to(CLI::App& app) {
    app.add_option("--max-iters", max_iters, "EM iteration cap")->capture_default_str();
    app.add_option("--tol", tol, "relative log-likelihood change for convergence")->capture_default_str();
    app.add_option("--init-q-m", init_q_m, "initial q_m")->capture_default_str();
    app.add_option("--init-q-s", init_q_s, "initial q_s")->capture_default_str();
    app.add_option("--init-r", init_r, "initial r")->capture_default_str();
    app.add_option("--r-lo", r_lo, "lower end of the r search bracket")->capture_default_str();
    app.add_option("--r-hi", r_hi, "upper end of the r search bracket")->capture_default_str();
    app.add_flag("--ones-init", ones_init, "initial state mean of ones instead of the data-driven bias");
  }

  FitConfig config(int d) const {
    FitConfig c;
    c.d = d;
    c.max_iters = max_iters;
    c.loglik_rel_tol = tol;
    c.q_m = init_q_m;
    c.q_s = init_q_s;
    c.r = init_r;
    c.r_bracket = {r_lo, r_hi};
    c.literal_init = ones_init;
    return c;
  }
};

template <typename Fn>
void with_output(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(out);
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  fn(f);
}

inline BlockPair parse_block(const std::vector<int>& v) {
  detail::require(v.size() == 2, "--block expects two type ids, e.g. 0,1");
  return {std::min(v[0], v[1]), std::max(v[0], v[1])};
}

}  // namespace detail_cli

/// Entry point behind the `sdsbm` executable.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail_cli;
  CLI::App app{"Seasonal dynamic stochastic block model: generation, fitting and experiments", "sdsbm"};
  app.require_subcommand(1);

  // generate
  NetworkFlags gen_net;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "sample a dynamic network and write it as JSON");
  gen_net.add_to(*gen);
  gen->add_flag("--adjacency", gen_net.adjacency, "also store per-step edge lists (needs --nodes-per-type)");
  gen->add_option("--out", gen_out, "output network file")->required();

  // fit
  std::string fit_in, fit_out;
  int fit_period = 0;
  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "learn noise parameters and seasonal states per block");
  fit->add_option("--in", fit_in, "input network file")->required();
  fit->add_option("--out", fit_out, "output fit file")->required();
  fit->add_option("--period", fit_period, "season length d (default: from the network file)");
  fit_flags.add_to(*fit);

  // exp-recovery
  NetworkFlags rec_net;
  FitFlags rec_fit;
  std::vector<int> rec_block{0, 1};
  std::string rec_out;
  auto* rec = app.add_subcommand("exp-recovery", "fit one block of one network; per-step CSV with 95% band");
  rec_net.add_to(*rec);
  rec_fit.add_to(*rec);
  rec->add_option("--block", rec_block, "block pair a,b")->delimiter(',');
  rec->add_option("--out", rec_out, "CSV path ('-' for stdout)");

  // exp-periods / exp-noise
  NetworkFlags per_net, noi_net;
  FitFlags per_fit, noi_fit;
  std::size_t per_seeds = 10, noi_seeds = 10;
  std::vector<double> multiples = default_period_multiples();
  std::vector<double> r_grid = default_noise_grid();
  std::string per_out, noi_out;
  double max_corr = -0.8, min_slope = 0.0;
  bool per_check = false, noi_check = false;

  auto* per = app.add_subcommand("exp-periods", "MSE versus number of observed periods");
  per_net.add_to(*per, false);
  per_fit.add_to(*per);
  per->add_option("--seeds", per_seeds, "number of seeds, starting at --seed")->capture_default_str();
  per->add_option("--multiples", multiples, "period multiples, T = multiple * d")->delimiter(',');
  per->add_option("--out", per_out, "CSV path ('-' for stdout)");
  per->add_option("--max-corr", max_corr, "trend threshold on Pearson(periods, avg MSE)")->capture_default_str();
  per->add_flag("--check", per_check, "exit 1 unless every block meets the trend threshold");

  auto* noi = app.add_subcommand("exp-noise", "MSE versus density noise r");
  noi_net.add_to(*noi);
  noi_fit.add_to(*noi);
  noi->add_option("--seeds", noi_seeds, "number of seeds, starting at --seed")->capture_default_str();
  noi->add_option("--r-grid", r_grid, "r values")->delimiter(',');
  noi->add_option("--out", noi_out, "CSV path ('-' for stdout)");
  noi->add_option("--min-slope", min_slope, "trend threshold on the ln-ln slope")->capture_default_str();
  noi->add_flag("--check", noi_check, "exit 1 unless every block meets the trend threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (gen->parsed()) {
      const DynamicNetwork net = generate(gen_net.config());
      write_network(net, gen_out);
      out << "wrote " << net.blocks.size() << " blocks x " << net.meta.T << " steps to " << gen_out << "\n";
      return kExitOk;
    }

    if (fit->parsed()) {
      const DynamicNetwork net = read_network(fit_in);
      const int d = fit_period > 0 ? fit_period : net.meta.d;
      const auto fits = fit_network(net, fit_flags.config(d));
      write_fits(fits, fit_out);
      int code = kExitOk;
      for (const auto& f : fits) {
        if (f.result) continue;
        err << "block " << f.pair.str() << ": " << f.error << "\n";
        code = std::max(code, f.numerical_failure ? kExitNumerical : kExitValidation);
      }
      out << "wrote " << fits.size() << " block fits to " << fit_out << "\n";
      return code;
    }

    if (rec->parsed()) {
      const NetworkConfig cfg = rec_net.config();
      const RecoveryResult res = run_recovery(cfg, parse_block(rec_block), rec_fit.config(cfg.d));
      with_output(rec_out, out, [&](std::ostream& os) { write_recovery_csv(res, os); });
      err << "coverage after first period: " << format_real(res.coverage_after_first_period(cfg.d)) << "\n";
      return kExitOk;
    }

    if (per->parsed() || noi->parsed()) {
      const bool periods = per->parsed();
      NetworkFlags& nf = periods ? per_net : noi_net;
      ExperimentSpec spec;
      spec.kind = periods ? SweepKind::Periods : SweepKind::Noise;
      spec.base = nf.config();
      spec.fit = (periods ? per_fit : noi_fit).config(spec.base.d);
      spec.seeds = seed_range(nf.seed, periods ? per_seeds : noi_seeds);
      spec.sweep_values = periods ? multiples : r_grid;
      const SweepResult res = run_sweep(spec);
      with_output(periods ? per_out : noi_out, out, [&](std::ostream& os) { write_sweep_csv(res, os); });

      if (spec.sweep_values.size() < 2) return kExitOk;
      const auto checks = periods ? check_period_trend(res, max_corr) : check_noise_trend(res, min_slope);
      bool all = true;
      for (const auto& c : checks) {
        err << "block " << c.block.str() << (periods ? " pearson " : " lnln_slope ") << format_real(c.statistic)
            << (periods ? "" : (c.monotone ? " increasing" : " not-increasing")) << (c.pass ? " ok" : " FAIL")
            << "\n";
        all = all && c.pass;
      }
      return (periods ? per_check : noi_check) && !all ? kExitValidation : kExitOk;
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace sdsbm::cli
