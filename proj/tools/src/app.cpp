#include <algorithm>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mixcheck/error.hpp"

namespace mixcheck::cli {

namespace {

void add_common(CLI::App* cmd, CommonOptions& common, bool seeded, bool threaded) {
  if (seeded) {
    cmd->add_option("--seed", common.seed,
                    "Master seed (default: $MIXCHECK_SEED, else 1)");
  }
  if (threaded) {
    cmd->add_option("--threads", common.threads, "Worker threads; results do not depend on it")
        ->capture_default_str();
  }
  cmd->add_option("--manifest", common.manifest,
                  "Manifest path (default: <out>.manifest.json)");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"mixcheck: Bayesian and classical uniformity tests for shuffles"};
  app.name("mixcheck");
  app.require_subcommand(1);

  CommonOptions common;
  std::function<int()> action;

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Sample permutations from a shuffling scheme");
  c_sim->add_option("--n", sim.n, "Deck size")->capture_default_str();
  c_sim->add_option("--k", sim.k, "Random transpositions per sample")->capture_default_str();
  c_sim->add_option("--samples", sim.samples, "Number of permutations")->required();
  c_sim->add_option("--scheme", sim.scheme, "random_transpositions | uniform")
      ->capture_default_str();
  c_sim->add_option("--out", sim.out, ".perm output file")->required();
  add_common(c_sim, common, true, true);
  c_sim->callback([&] { action = [&] { return cmd_simulate(sim, common); }; });

  FreqTestOptions freq;
  auto* c_freq = app.add_subcommand("freq-test", "Chi-square goodness-of-fit test");
  c_freq->add_option("--in", freq.in, ".perm file or value,count histogram")->required();
  c_freq->add_option("--statistic", freq.statistic)->capture_default_str();
  c_freq->add_option("--n", freq.n, "Deck size for histogram input (0: from data)")
      ->capture_default_str();
  c_freq->add_option("--model", freq.model, "poisson:L | uniform:K | explicit:p0,p1,...")
      ->capture_default_str();
  c_freq->add_option("--lump", freq.lump, "Values >= this share one cell (-1: none)")
      ->capture_default_str();
  c_freq->add_option("--min-expected", freq.min_expected, "Smallest expected count in the tail cell")
      ->capture_default_str();
  c_freq->add_option("--simulate", freq.simulate, "Monte Carlo draws for a simulated p-value")
      ->capture_default_str();
  c_freq->add_option("--out", freq.out, "JSON report")->required();
  c_freq->add_option("--csv", freq.csv, "category,observed,expected plot data");
  add_common(c_freq, common, true, true);
  c_freq->callback([&] { action = [&] { return cmd_freq_test(freq, common); }; });

  BayesTestOptions bayes;
  auto* c_bayes = app.add_subcommand("bayes-test", "Bayes factor for uniformity (exchange algorithm)");
  c_bayes->add_option("--in", bayes.in, "Input files; several give a BF curve")->required();
  c_bayes->add_option("--statistic", bayes.statistic)->capture_default_str();
  c_bayes->add_option("--n", bayes.n, "Deck size for histogram input")->capture_default_str();
  c_bayes->add_option("--prior", bayes.prior, "normal:MU,SIGMA2 | conjugate:N0[,X0]")
      ->capture_default_str();
  c_bayes->add_option("--n0-strategy", bayes.n0_strategy,
                      "fixed | user | sweep | empirical-bayes | vanishing");
  c_bayes->add_option("--n0", bayes.n0, "n0 for the user strategy");
  c_bayes->add_option("--n0-sweep", bayes.n0_sweep, "n0 values: LO:HI:STEP or a,b,c");
  c_bayes->add_option("--chains", bayes.chains)->capture_default_str();
  c_bayes->add_option("--steps", bayes.steps)->capture_default_str();
  c_bayes->add_option("--burnin", bayes.burnin, "Default: min(200, steps/5)");
  c_bayes->add_option("--thin", bayes.thin)->capture_default_str();
  c_bayes->add_option("--proposal-scale", bayes.proposal_scale)->capture_default_str();
  c_bayes->add_option("--prior-odds", bayes.prior_odds, "P(H0)/P(H1)")->capture_default_str();
  c_bayes->add_option("--normalizer", bayes.normalizer, "Normalizer table JSON");
  c_bayes->add_option("--inner-burnin", bayes.inner_burnin)->capture_default_str();
  c_bayes->add_option("--inner-spacing", bayes.inner_spacing)->capture_default_str();
  c_bayes->add_option("--out", bayes.out, "JSON report")->required();
  c_bayes->add_option("--chain-csv", bayes.chain_csv, "Per-chain samples CSV");
  c_bayes->add_option("--curve", bayes.curve, "BF curve CSV over inputs or n0");
  add_common(c_bayes, common, true, true);
  c_bayes->callback([&] { action = [&] { return cmd_bayes_test(bayes, common); }; });

  ConjugateCurveOptions curve;
  auto* c_curve = app.add_subcommand("conjugate-curve",
                                     "Poisson(1) vs Gamma(alpha, alpha) Bayes factor over alpha");
  c_curve->add_option("--in", curve.in, ".perm file or value,count histogram")->required();
  c_curve->add_option("--statistic", curve.statistic)->capture_default_str();
  c_curve->add_option("--n", curve.n)->capture_default_str();
  c_curve->add_option("--alpha-grid", curve.alpha_grid, "LO:HI:STEP or a,b,c")
      ->capture_default_str();
  c_curve->add_option("--out", curve.out, "alpha,bf,log_bf CSV")->required();
  add_common(c_curve, common, false, false);
  c_curve->callback([&] { action = [&] { return cmd_conjugate_curve(curve, common); }; });

  NormalizerOptions norm;
  auto* c_norm = app.add_subcommand("normalizer", "Tabulate log Z(theta)");
  c_norm->add_option("--statistic", norm.statistic)->capture_default_str();
  c_norm->add_option("--n", norm.n)->capture_default_str();
  c_norm->add_option("--method", norm.method, "exact | importance | thermo")->capture_default_str();
  c_norm->add_option("--theta-range", norm.theta_range, "LO:HI")->capture_default_str();
  c_norm->add_option("--resolution", norm.resolution, "Grid points")->capture_default_str();
  c_norm->add_option("--samples", norm.samples, "Importance samples per point")
      ->capture_default_str();
  c_norm->add_option("--steps", norm.steps, "Metropolis steps per point (thermo)")
      ->capture_default_str();
  c_norm->add_option("--burnin", norm.burnin)->capture_default_str();
  c_norm->add_option("--direction", norm.direction, "Ray direction a,b,c for vector statistics");
  c_norm->add_option("--out", norm.out, "Table JSON")->required();
  add_common(c_norm, common, true, true);
  c_norm->callback([&] { action = [&] { return cmd_normalizer(norm, common); }; });

  CountsOptions counts;
  auto* c_counts = app.add_subcommand("counts", "Exact fixed-point counts c_n(j)");
  c_counts->add_option("--n", counts.n)->capture_default_str();
  c_counts->add_option("--out", counts.out, "j,count,log_count CSV")->required();
  add_common(c_counts, common, false, false);
  c_counts->callback([&] { action = [&] { return cmd_counts(counts, common); }; });

  ReplayOptions replay;
  auto* c_replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  c_replay->add_option("--manifest", replay.manifest)->required();
  c_replay->add_option("--threads", replay.threads, "Override the recorded thread count");
  c_replay->add_flag("--verify", replay.verify, "Check outputs against the recorded digests");
  c_replay->callback([&] { action = [&] { return cmd_replay(replay); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace mixcheck::cli
