#pragma once

#include <string>
#include <vector>

namespace mixcheck::cli {

/// Flags shared by every run-producing command.
struct CommonOptions {
  std::string seed;      // empty: $MIXCHECK_SEED or the default
  int threads = 1;
  std::string manifest;  // empty: <primary output>.manifest.json
};

struct SimulateOptions {
  int n = 52;
  long k = 0;
  long samples = 0;
  std::string scheme = "random_transpositions";
  std::string out;
};

struct FreqTestOptions {
  std::string in;
  std::string statistic = "fixed-points";
  int n = 0;
  std::string model = "poisson:1";
  long lump = 5;
  double min_expected = 1.0;
  long simulate = 0;
  std::string out;
  std::string csv;
};

struct BayesTestOptions {
  std::vector<std::string> in;
  std::string statistic = "fixed-points";
  int n = 0;
  std::string prior = "normal:0,0.1";
  std::string n0_strategy;
  double n0 = 0.0;
  std::string n0_sweep;
  int chains = 20;
  long steps = 1000;
  long burnin = -1;  // negative: min(200, steps / 5)
  long thin = 1;
  double proposal_scale = 0.2;
  double prior_odds = 1.0;
  std::string normalizer;
  long inner_burnin = 2000;
  long inner_spacing = 50;
  std::string out;
  std::string chain_csv;
  std::string curve;
};

struct ConjugateCurveOptions {
  std::string in;
  std::string statistic = "fixed-points";
  int n = 0;
  std::string alpha_grid = "0.5:10:0.5";
  std::string out;
};

struct NormalizerOptions {
  std::string statistic = "fixed-points";
  int n = 52;
  std::string method = "exact";
  std::string theta_range = "-3:3";
  int resolution = 61;
  long samples = 100000;
  long steps = 20000;
  long burnin = 2000;
  std::string direction;
  std::string out;
};

struct CountsOptions {
  int n = 52;
  std::string out;
};

struct ReplayOptions {
  std::string manifest;
  int threads = 0;  // 0: as recorded
  bool verify = false;
};

int cmd_simulate(const SimulateOptions& opt, const CommonOptions& common);
int cmd_freq_test(const FreqTestOptions& opt, const CommonOptions& common);
int cmd_bayes_test(const BayesTestOptions& opt, const CommonOptions& common);
int cmd_conjugate_curve(const ConjugateCurveOptions& opt, const CommonOptions& common);
int cmd_normalizer(const NormalizerOptions& opt, const CommonOptions& common);
int cmd_counts(const CountsOptions& opt, const CommonOptions& common);
int cmd_replay(const ReplayOptions& opt);

/// Parses and runs one command line (without the program name).
/// Returns the process exit code: 0 ok, 2 bad input, 3 runtime failure.
int run(const std::vector<std::string>& args);

}  // namespace mixcheck::cli
