#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "mixcheck/chi_square.hpp"
#include "mixcheck/combinatorics.hpp"
#include "mixcheck/error.hpp"
#include "mixcheck/expfam.hpp"
#include "mixcheck/inference.hpp"
#include "mixcheck/normalizer.hpp"
#include "mixcheck/reports.hpp"
#include "mixcheck/samplers.hpp"
#include "mixcheck/shuffle.hpp"
#include "observations.hpp"
#include "run_record.hpp"

namespace mixcheck::cli {

namespace {

using json = nlohmann::ordered_json;

std::string num(double x) { return format_double(x); }
std::string num(long x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ValidationError("malformed " + what + " '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, what));
  if (out.empty()) throw ValidationError(what + " is empty");
  return out;
}

/// "lo:hi:step" grids or plain comma lists.
std::vector<double> parse_values(const std::string& text, const std::string& what) {
  return text.find(':') != std::string::npos ? parse_grid(text) : parse_list(text, what);
}

void check_threads(int threads) {
  if (threads < 1) throw ValidationError("--threads must be >= 1");
}

std::string manifest_path(const CommonOptions& common, const std::string& primary_out) {
  return common.manifest.empty() ? primary_out + ".manifest.json" : common.manifest;
}

/// Seed, threads and manifest go last in every canonical argument list.
void record_tail(RunRecord& rec, const CommonOptions& common, const std::string& manifest) {
  rec.option("--threads", num(common.threads), false);
  rec.option("--manifest", manifest, false);
}

void print_warnings(const std::string& label, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << label << ": " << w << "\n";
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, const CommonOptions& common) {
  check_threads(common.threads);
  if (opt.samples < 1) throw ValidationError("--samples must be >= 1");
  const auto seed = resolve_seed(common.seed);
  const auto manifest = manifest_path(common, opt.out);

  RunRecord rec("simulate");
  rec.option("--n", num(opt.n));
  rec.option("--k", num(opt.k));
  rec.option("--samples", num(opt.samples));
  rec.option("--scheme", opt.scheme);
  rec.seed(seed);
  rec.option("--out", opt.out, false);
  record_tail(rec, common, manifest);

  ShuffleScheme scheme{parse_shuffle_kind(opt.scheme), opt.k, opt.n, seed.value};
  scheme.validate();
  const auto perms = sample_dataset(scheme, opt.samples, common.threads);
  std::ostringstream out;
  write_perm_file(out, scheme, perms);
  rec.output(opt.out, out.str());
  rec.commit(manifest);
  std::cout << "wrote " << perms.size() << " permutations of " << opt.n << " to " << opt.out
            << "\n";
  return 0;
}

int cmd_freq_test(const FreqTestOptions& opt, const CommonOptions& common) {
  check_threads(common.threads);
  if (opt.simulate < 0) throw ValidationError("--simulate must be >= 0");
  const auto seed = resolve_seed(common.seed);
  const auto manifest = manifest_path(common, opt.out);

  RunRecord rec("freq-test");
  rec.option("--in", opt.in, false);
  rec.option("--statistic", opt.statistic);
  rec.option("--n", num(opt.n));
  rec.option("--model", opt.model);
  rec.option("--lump", num(opt.lump));
  rec.option("--min-expected", num(opt.min_expected));
  rec.option("--simulate", num(opt.simulate));
  rec.seed(seed);
  rec.option("--out", opt.out, false);
  if (!opt.csv.empty()) rec.option("--csv", opt.csv, false);
  record_tail(rec, common, manifest);

  const auto names = statistic_names();
  if (std::find(names.begin(), names.end(), opt.statistic) == names.end()) {
    throw ValidationError("unknown statistic '" + opt.statistic + "'");
  }
  const auto text = rec.input(opt.in);
  const auto obs = parse_observations(opt.in, text, opt.statistic, opt.n);
  if (!obs.histogram_input && make_statistic(opt.statistic, obs.n).dimension != 1) {
    throw ValidationError("freq-test needs a scalar statistic");
  }
  const auto counts = obs.values.dense_counts();
  const auto report = chi_square_test(counts, parse_expected_model(opt.model),
                                      ChiSquareOptions{opt.lump, opt.min_expected});

  json extra;
  extra["input"] = opt.in;
  extra["input_fnv1a"] = fnv1a_hex(text);
  extra["data_statistic"] = opt.statistic;
  extra["N"] = obs.values.total();
  extra["simulation_seed"] = seed.value;
  extra["simulation_draws"] = opt.simulate;
  if (opt.simulate > 0) {
    extra["simulated_p_value"] = simulated_p_value(report, opt.simulate, seed.value);
  }
  extra["config_hash"] = rec.config_hash();
  rec.output(opt.out, to_json(report, extra.dump()));
  if (!opt.csv.empty()) {
    std::ostringstream csv;
    write_chi_square_csv(csv, report);
    rec.output(opt.csv, csv.str());
  }
  rec.commit(manifest);

  std::cout << "chi2=" << num(report.statistic) << " df=" << report.df
            << " p=" << num(report.p_value);
  if (opt.simulate > 0) std::cout << " p_sim=" << num(extra["simulated_p_value"].get<double>());
  std::cout << "\n";
  return 0;
}

int cmd_bayes_test(const BayesTestOptions& opt, const CommonOptions& common) {
  check_threads(common.threads);
  if (opt.in.empty()) throw ValidationError("bayes-test needs at least one --in");
  const auto seed = resolve_seed(common.seed);
  const auto manifest = manifest_path(common, opt.out);
  const long burnin = opt.burnin >= 0 ? opt.burnin : std::min(200L, opt.steps / 5);

  RunRecord rec("bayes-test");
  for (const auto& p : opt.in) rec.option("--in", p, false);
  rec.option("--statistic", opt.statistic);
  rec.option("--n", num(opt.n));
  rec.option("--prior", opt.prior);
  if (!opt.n0_strategy.empty()) rec.option("--n0-strategy", opt.n0_strategy);
  if (opt.n0 != 0.0) rec.option("--n0", num(opt.n0));
  if (!opt.n0_sweep.empty()) rec.option("--n0-sweep", opt.n0_sweep);
  rec.option("--chains", num(opt.chains));
  rec.option("--steps", num(opt.steps));
  rec.option("--burnin", num(burnin));
  rec.option("--thin", num(opt.thin));
  rec.option("--proposal-scale", num(opt.proposal_scale));
  rec.option("--prior-odds", num(opt.prior_odds));
  if (!opt.normalizer.empty()) rec.option("--normalizer", opt.normalizer, false);
  rec.option("--inner-burnin", num(opt.inner_burnin));
  rec.option("--inner-spacing", num(opt.inner_spacing));
  rec.seed(seed);
  rec.option("--out", opt.out, false);
  if (!opt.chain_csv.empty()) rec.option("--chain-csv", opt.chain_csv, false);
  if (!opt.curve.empty()) rec.option("--curve", opt.curve, false);
  record_tail(rec, common, manifest);

  std::vector<Observations> inputs;
  std::vector<std::string> input_hashes;
  for (const auto& path : opt.in) {
    const auto text = rec.input(path);
    input_hashes.push_back(fnv1a_hex(text));
    inputs.push_back(parse_observations(path, text, opt.statistic, opt.n));
  }
  const int n = inputs.front().n;
  for (const auto& obs : inputs) {
    if (obs.n == 0) throw ValidationError("'" + obs.path + "' is a histogram; pass --n");
    if (obs.n != n) throw ValidationError("all inputs must share the same n");
  }
  const auto statistic = make_statistic(opt.statistic, n);

  std::shared_ptr<const LogPartition> normalizer;
  if (!opt.normalizer.empty()) {
    auto table = std::make_shared<NormalizerTable>(table_from_json(rec.input(opt.normalizer)));
    if (table->statistic() != statistic.name || table->n() != n) {
      throw ValidationError("normalizer table is for " + table->statistic() + " at n=" +
                            std::to_string(table->n()) + ", not " + statistic.name +
                            " at n=" + std::to_string(n));
    }
    normalizer = std::move(table);
  } else {
    normalizer = exact_partition_for(statistic);
    if (!normalizer) {
      throw ValidationError("statistic '" + statistic.name +
                            "' has no exact normalizer; build a table with `mixcheck normalizer` "
                            "and pass --normalizer");
    }
  }
  const auto auxiliary = make_auxiliary(statistic, opt.inner_burnin, opt.inner_spacing);
  const auto base_prior = parse_prior(opt.prior, &statistic);

  std::vector<std::optional<double>> n0_values{std::nullopt};
  if (!opt.n0_strategy.empty()) {
    if (base_prior.kind != PriorKind::conjugate) {
      throw ValidationError("--n0-strategy applies to conjugate priors only");
    }
    const auto sweep =
        opt.n0_sweep.empty() ? std::vector<double>{} : parse_values(opt.n0_sweep, "n0 sweep");
    const auto user = opt.n0 > 0.0 ? std::optional<double>(opt.n0) : std::nullopt;
    n0_values.clear();
    for (double v : resolve_n0_values(parse_n0_strategy(opt.n0_strategy), user, sweep)) {
      n0_values.emplace_back(v);
    }
  } else if (opt.n0 != 0.0 || !opt.n0_sweep.empty()) {
    throw ValidationError("--n0 and --n0-sweep need --n0-strategy");
  }
  if (inputs.size() > 1 && n0_values.size() > 1) {
    throw ValidationError("an n0 sweep takes a single --in");
  }

  BayesTestConfig config;
  config.chain = ChainConfig{opt.steps, burnin, opt.proposal_scale, seed.value, opt.thin, true};
  config.chain.validate();
  if (opt.chains < 1) throw ValidationError("--chains must be >= 1");
  config.chains = opt.chains;
  config.threads = common.threads;
  config.prior_odds = opt.prior_odds;

  const std::string config_hash = rec.config_hash();
  std::vector<std::string> reports;
  std::vector<CurvePoint> curve;
  std::string chain_rows;
  std::string chain_header;
  const bool keyed_by_k = std::all_of(inputs.begin(), inputs.end(),
                                      [](const Observations& o) { return o.k.has_value(); });
  int run_index = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& obs = inputs[i];
    const auto data = summarize(obs, statistic);
    for (const auto& n0 : n0_values) {
      auto prior = base_prior;
      if (n0) prior.n0 = *n0;
      prior.validate(&statistic);

      std::vector<ParameterChain> chains;
      const auto report = uniformity_bayes_factor(data, statistic, prior, config, *normalizer,
                                                  *auxiliary, &chains);
      json extra;
      extra["input"] = obs.path;
      extra["input_fnv1a"] = input_hashes[i];
      if (obs.k) extra["k"] = *obs.k;
      extra["n"] = n;
      extra["N"] = data.count;
      extra["data_statistic"] = statistic.name;
      extra["prior"] = to_string(prior);
      if (n0) extra["n0"] = *n0;
      extra["chains"] = opt.chains;
      extra["steps"] = opt.steps;
      extra["burnin"] = burnin;
      extra["normalizer"] = to_string(normalizer->source());
      extra["config_hash"] = config_hash;
      reports.push_back(to_json(report, extra.dump()));

      const double x = n0 ? *n0 : keyed_by_k ? static_cast<double>(*obs.k) : static_cast<double>(i);
      curve.push_back({x, report.bf, report.log_bf});

      for (std::size_t c = 0; c < chains.size(); ++c) {
        std::ostringstream ss;
        write_chain_csv(ss, chains[c]);
        std::istringstream lines(ss.str());
        std::string line;
        std::getline(lines, line);
        chain_header = "run,chain," + line + "\n";
        while (std::getline(lines, line)) {
          chain_rows += std::to_string(run_index) + "," + std::to_string(c) + "," + line + "\n";
        }
      }

      std::ostringstream label;
      label << obs.path;
      if (n0) label << " n0=" << num(*n0);
      print_warnings(label.str(), report.warnings);
      std::cout << label.str();
      if (obs.k) std::cout << " k=" << *obs.k;
      std::cout << " bf=" << num(report.bf) << " log_bf=" << num(report.log_bf)
                << " posterior_null=" << num(report.posterior_null) << "\n";
      ++run_index;
    }
  }

  if (reports.size() == 1) {
    rec.output(opt.out, reports.front());
  } else {
    json set;
    set["version"] = kReportVersion;
    set["kind"] = "bayes_factor_set";
    set["config_hash"] = config_hash;
    set["reports"] = json::array();
    for (const auto& r : reports) set["reports"].push_back(json::parse(r));
    rec.output(opt.out, set.dump(2) + "\n");
  }
  if (!opt.chain_csv.empty()) rec.output(opt.chain_csv, chain_header + chain_rows);
  if (!opt.curve.empty()) {
    std::ostringstream ss;
    write_curve_csv(ss, n0_values.size() > 1 ? "n0" : keyed_by_k ? "k" : "input", curve);
    rec.output(opt.curve, ss.str());
  }
  rec.commit(manifest);
  return 0;
}

int cmd_conjugate_curve(const ConjugateCurveOptions& opt, const CommonOptions& common) {
  const auto manifest = manifest_path(common, opt.out);
  RunRecord rec("conjugate-curve");
  rec.option("--in", opt.in, false);
  rec.option("--statistic", opt.statistic);
  rec.option("--n", num(opt.n));
  rec.option("--alpha-grid", opt.alpha_grid);
  rec.option("--out", opt.out, false);
  rec.option("--manifest", manifest, false);

  const auto grid = parse_values(opt.alpha_grid, "alpha grid");
  for (double a : grid) {
    if (!(a > 0.0)) throw ValidationError("alpha values must be > 0, got " + num(a));
  }
  const auto text = rec.input(opt.in);
  const auto obs = parse_observations(opt.in, text, opt.statistic, opt.n, true);
  if (!obs.histogram_input && make_statistic(opt.statistic, obs.n).dimension != 1) {
    throw ValidationError("conjugate-curve needs a scalar statistic");
  }
  const auto values = obs.values.expand();
  const auto curve = gamma_poisson_bf_curve(values, grid);
  std::ostringstream out;
  write_curve_csv(out, "alpha", curve);
  rec.output(opt.out, out.str());
  rec.commit(manifest);

  const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end(),
                                            [](const auto& a, const auto& b) { return a.log_bf < b.log_bf; });
  std::cout << curve.size() << " points, N=" << values.size() << ", bf in [" << num(lo->bf)
            << ", " << num(hi->bf) << "]\n";
  return 0;
}

int cmd_normalizer(const NormalizerOptions& opt, const CommonOptions& common) {
  check_threads(common.threads);
  const auto seed = resolve_seed(common.seed);
  const auto manifest = manifest_path(common, opt.out);
  const auto method = parse_normalizer_source(opt.method);

  RunRecord rec("normalizer");
  rec.option("--statistic", opt.statistic);
  rec.option("--n", num(opt.n));
  rec.option("--method", opt.method);
  rec.option("--theta-range", opt.theta_range);
  rec.option("--resolution", num(opt.resolution));
  rec.option("--samples", num(opt.samples));
  rec.option("--steps", num(opt.steps));
  rec.option("--burnin", num(opt.burnin));
  if (!opt.direction.empty()) rec.option("--direction", opt.direction);
  rec.seed(seed);
  rec.option("--out", opt.out, false);
  record_tail(rec, common, manifest);

  const auto colon = opt.theta_range.find(':');
  if (colon == std::string::npos) throw ValidationError("--theta-range must be LO:HI");
  const double lo = parse_number(opt.theta_range.substr(0, colon), "theta range");
  const double hi = parse_number(opt.theta_range.substr(colon + 1), "theta range");

  const auto statistic = make_statistic(opt.statistic, opt.n);
  TableOptions topt;
  topt.importance_samples = opt.samples;
  topt.chain = ChainConfig{opt.steps, opt.burnin, 0.0, 0, 1, false};
  topt.threads = common.threads;
  if (!opt.direction.empty()) topt.direction = parse_list(opt.direction, "direction");
  const auto table = build_table(statistic, lo, hi, opt.resolution, method, seed.value, topt);
  rec.output(opt.out, to_json(table));
  rec.commit(manifest);

  std::cout << to_string(method) << " table, " << table.grid().size() << " points on ["
            << num(lo) << ", " << num(hi) << "]";
  if (table.richardson_error()) std::cout << ", richardson error " << num(*table.richardson_error());
  std::cout << "\n";
  const auto bad = table.convexity_violations();
  if (!bad.empty()) {
    std::cerr << "warning: " << bad.size() << " grid points break convexity beyond 3 stderr\n";
  }
  return 0;
}

int cmd_counts(const CountsOptions& opt, const CommonOptions& common) {
  const auto manifest = manifest_path(common, opt.out);
  RunRecord rec("counts");
  rec.option("--n", num(opt.n));
  rec.option("--out", opt.out, false);
  rec.option("--manifest", manifest, false);
  if (opt.n < 1) throw ValidationError("--n must be >= 1");
  std::ostringstream out;
  write_fixed_point_counts_csv(out, fixed_point_counts(opt.n));
  rec.output(opt.out, out.str());
  rec.commit(manifest);
  std::cout << "wrote fixed-point counts for n=" << opt.n << " to " << opt.out << "\n";
  return 0;
}

int cmd_replay(const ReplayOptions& opt) {
  const auto m = read_manifest(opt.manifest);
  for (const auto& in : m.inputs) {
    const auto now = fnv1a_hex(read_file(in.path));
    if (now != in.fnv1a) {
      throw ValidationError("input '" + in.path + "' changed since the recorded run");
    }
  }
  auto args = m.argv;
  if (opt.threads > 0) {
    // Single-threaded commands record no --threads and ignore the override.
    const auto it = std::find(args.begin(), args.end(), "--threads");
    if (it != args.end() && it + 1 != args.end()) *(it + 1) = std::to_string(opt.threads);
  }
  const int code = run(args);
  if (code != 0 || !opt.verify) return code;

  int mismatches = 0;
  for (const auto& out : m.outputs) {
    const auto now = fnv1a_hex(read_file(out.path));
    if (now != out.fnv1a) {
      std::cerr << "mismatch: " << out.path << " (recorded " << out.fnv1a << ", now " << now
                << ")\n";
      ++mismatches;
    }
  }
  if (mismatches > 0) {
    std::cerr << "error: replay produced " << mismatches << " differing output(s)\n";
    return 3;
  }
  std::cout << "replay verified: " << m.outputs.size() << " output(s) byte-identical\n";
  return 0;
}

}  // namespace mixcheck::cli
