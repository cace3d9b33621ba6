// Acceptance runner. Each criterion prints its evidence, then one verdict
// line "criterion N: PASS|FAIL". Usage:
//   mixcheck_acceptance --criterion N [--mixcheck PATH] [--data DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mixcheck/chi_square.hpp"
#include "mixcheck/combinatorics.hpp"
#include "mixcheck/diagnostics.hpp"
#include "mixcheck/error.hpp"
#include "mixcheck/expfam.hpp"
#include "mixcheck/inference.hpp"
#include "mixcheck/log_math.hpp"
#include "mixcheck/normalizer.hpp"
#include "mixcheck/perm_io.hpp"
#include "mixcheck/samplers.hpp"
#include "mixcheck/shuffle.hpp"
#include "mixcheck/statistics.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mixcheck;

namespace {

struct Args {
  int criterion = 0;
  std::string mixcheck;
  std::string data;
};

class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    std::cout << "  " << (ok ? "ok   " : "FAIL ") << what << "\n" << std::flush;
    ok_ = ok_ && ok;
  }
  void note(const std::string& what) { std::cout << "  note " << what << "\n" << std::flush; }
  bool ok() const { return ok_; }

 private:
  bool ok_ = true;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------

void exact_oracles(Verdict& v) {
  for (int n = 1; n <= 6; ++n) {
    const auto brute = oracle::brute_levels(n);
    const auto counts = fixed_point_counts(n);
    bool same = true;
    for (int j = 0; j <= n; ++j) {
      same = same && counts.counts[static_cast<std::size_t>(j)].convert_to<double>() == brute[static_cast<std::size_t>(j)];
    }
    v.check(same, "fixed_point_counts(" + std::to_string(n) + ") equals enumeration");

    double worst = 0.0;
    for (double t = -3.0; t <= 3.0 + 1e-12; t += 0.25) {
      const double ref = std::log(oracle::brute_Z(n, t));
      worst = std::max(worst, rel(exact_log_Z(n, t), ref));
    }
    v.check(worst <= 1e-9, "exact_log_Z n=" + std::to_string(n) + " max rel err " + fmt(worst));

    const std::map<std::string, std::function<int(const oracle::Perm&)>> stats{
        {"fixed-points", oracle::fixed_points},
        {"adjacent-pairs", oracle::adjacent_pairs},
        {"top-card-position", [](const oracle::Perm& p) { return oracle::position_of(p, 1); }},
        {"bottom-card-position",
         [n](const oracle::Perm& p) { return oracle::position_of(p, n); }},
    };
    for (const auto& [name, f] : stats) {
      if (name == "adjacent-pairs" && n < 2) continue;
      const auto spec = make_statistic(name, n);
      std::map<int, long> lib;
      oracle::for_each_perm(n, [&](const oracle::Perm& p) {
        ++lib[static_cast<int>(std::lround(spec(Permutation(p))[0]))];
      });
      v.check(lib == oracle::histogram(n, f), name + " histogram n=" + std::to_string(n));
    }

    double worst_p = 0.0;
    for (double t : {-1.5, 0.0, 0.7, 2.0}) {
      const double z = oracle::brute_Z(n, t);
      ExpFamilyModel model(make_statistic("fixed-points", n), {t},
                           std::make_shared<ExactFixedPointPartition>(n));
      oracle::for_each_perm(n, [&](const oracle::Perm& p) {
        const double ref = std::exp(t * oracle::fixed_points(p)) / z;
        worst_p = std::max(worst_p, rel(std::exp(model.log_density(Permutation(p))), ref));
      });
    }
    v.check(worst_p <= 1e-9, "P_theta(sigma) n=" + std::to_string(n) + " max rel err " + fmt(worst_p));
  }
}

void cutoff_bound(Verdict& v) {
  for (int n = 3; n <= 7; ++n) {
    for (double c : {0.5, 1.0, 2.0}) {
      const long k = static_cast<long>(std::ceil(0.5 * n * std::log(n) + c * n));
      const double tv = total_variation_to_uniform(exact_walk_distribution(n, k));
      v.check(tv <= 2 * std::exp(-c), "n=" + std::to_string(n) + " c=" + fmt(c) + " k=" +
                                          std::to_string(k) + " TV=" + fmt(tv) +
                                          " bound=" + fmt(2 * std::exp(-c)));
    }
  }
  // The dynamic program against a direct convolution over (L, R) pairs.
  for (int n = 3; n <= 5; ++n) {
    const int k = 6;
    const auto law = oracle::walk_law(n, k);
    const auto lib = exact_walk_distribution(n, k);
    double worst = 0.0;
    for (const auto& [p, mass] : law) worst = std::max(worst, std::abs(lib.probability(Permutation(p)) - mass));
    v.check(worst < 1e-14, "walk law n=" + std::to_string(n) + " k=6 matches convolution");
  }
}

DataSummary toy_data() {
  const auto fp = make_statistic("fixed-points", 6);
  return summarize(fp, sample_dataset({ShuffleKind::random_transpositions, 4, 6, 2024}, 50));
}

void exchange_correctness(Verdict& v) {
  const auto data = toy_data();
  const ExactFixedPointAuxiliary aux(6);
  const auto prior = PriorSpec::normal(0.0, 1.0);
  const auto chain = run_exchange_chain(data, aux, prior, {502000, 2000, 0.5, 13, 5, true});
  const auto xs = chain.coordinate(0);
  v.note("post-burn-in samples " + std::to_string(xs.size()) + ", acceptance " +
         fmt(chain.acceptance_rate, 3));

  // Quadrature posterior from enumerated level counts, binned like the samples.
  constexpr int bins = 200, sub = 50;
  double m = 0.0, s2 = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  for (double x : xs) s2 += (x - m) * (x - m);
  const double sd = std::sqrt(s2 / static_cast<double>(xs.size() - 1));
  const double lo = m - 6 * sd, hi = m + 6 * sd;
  const auto g = oracle::fixed_point_posterior(6, data.count, data.statistic_sum[0], 0.0, 1.0, lo,
                                               hi, bins * sub + 1);
  std::vector<double> exact(bins, 0.0), freq(bins, 0.0);
  const double peak = *std::max_element(g.log_density.begin(), g.log_density.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < g.theta.size(); ++i) {
    const double mass =
        0.5 * (std::exp(g.log_density[i] - peak) + std::exp(g.log_density[i + 1] - peak));
    exact[std::min<std::size_t>(i / sub, bins - 1)] += mass;
    total += mass;
  }
  for (auto& e : exact) e /= total;
  for (double x : xs) {
    const auto b = static_cast<long>(std::floor((x - lo) / (hi - lo) * bins));
    if (b >= 0 && b < bins) freq[static_cast<std::size_t>(b)] += 1.0 / static_cast<double>(xs.size());
  }
  double tv = 0.0;
  for (int b = 0; b < bins; ++b) tv += std::abs(freq[static_cast<std::size_t>(b)] - exact[static_cast<std::size_t>(b)]);
  tv /= 2;
  v.check(xs.size() == 100000 && tv < 0.05, "histogram TV to quadrature posterior " + fmt(tv) + " < 0.05");

  // Detailed balance: pi(i) K(i, j) = pi(j) K(j, i) on a 41-point grid with
  // nearest-neighbour proposals, kernels estimated from 1e5 trials each.
  const auto levels = oracle::brute_levels(6);
  std::vector<double> grid, log_pi;
  for (int i = 0; i < 41; ++i) grid.push_back(m - 1.0 + 0.05 * i);
  for (double t : grid) {
    log_pi.push_back(-t * t / 2.0 + t * data.statistic_sum[0] -
                     static_cast<double>(data.count) * oracle::log_Z_from_levels(levels, t));
  }
  const double top = *std::max_element(log_pi.begin(), log_pi.end());
  std::vector<double> pi;
  double z = 0.0;
  for (double l : log_pi) z += pi.emplace_back(std::exp(l - top));
  for (auto& p : pi) p /= z;

  const long trials = 100000;
  std::vector<double> fwd(grid.size() - 1), bwd(grid.size() - 1);
  parallel_for(static_cast<long>(grid.size() - 1), threads(), [&](long i) {
    const auto u = static_cast<std::size_t>(i);
    auto rng = make_engine(derive_seed(15, SeedStream::replication, u));
    const std::vector<double> a{grid[u]}, b{grid[u + 1]};
    long af = 0, ab = 0;
    for (long t = 0; t < trials; ++t) af += exchange_transition(a, b, data, prior, aux, rng).accepted;
    for (long t = 0; t < trials; ++t) ab += exchange_transition(b, a, data, prior, aux, rng).accepted;
    fwd[u] = static_cast<double>(af) / trials;
    bwd[u] = static_cast<double>(ab) / trials;
  });
  int bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    auto se = [&](double p) { return std::sqrt(std::max(p * (1 - p), 1.0 / trials) / trials); };
    const double lhs = pi[i] * fwd[i], rhs = pi[i + 1] * bwd[i];
    const double s = std::hypot(pi[i] * se(fwd[i]), pi[i + 1] * se(bwd[i]));
    worst = std::max(worst, std::abs(lhs - rhs) / s);
    if (std::abs(lhs - rhs) >= 4 * s) ++bad;
  }
  v.check(bad == 0, "detailed balance on 40 grid edges, worst |flow difference| " + fmt(worst, 3) +
                        " sigma (limit 4)");
}

struct BfRow {
  long k;
  double bf;
  double posterior_null;
  double quadrature_bf;
};

BfRow fixed_point_bayes_factor(const std::vector<Permutation>& perms, long k, const LogPartition& z) {
  const auto fp = make_statistic("fixed-points", 52);
  const auto data = summarize(fp, perms);
  const ExactFixedPointAuxiliary aux(52);
  const auto prior = PriorSpec::normal(0.0, 0.1);
  BayesTestConfig cfg;
  cfg.chain = ChainConfig{1000, 200, 0.2, 1, 1, true};
  cfg.chains = 20;
  cfg.threads = threads();
  const auto report = uniformity_bayes_factor(data, fp, prior, cfg, z, aux);
  const double q = std::exp(quadrature_log_bf(data, prior, z));
  std::cout << "  k=" << k << " N=" << data.count << " S=" << data.statistic_sum[0]
            << "  bf=" << fmt(report.bf) << "  posterior_null=" << fmt(report.posterior_null)
            << "  quadrature bf=" << fmt(q) << "\n";
  return {k, report.bf, report.posterior_null, q};
}

void experiment_n200(Verdict& v, const std::string& data_dir) {
  const ExactFixedPointPartition z(52);
  std::map<long, BfRow> rows;
  for (long k : {100L, 120L, 140L, 160L, 180L, 200L}) {
    const auto ds = read_perm_file(data_dir + "/k" + std::to_string(k) + ".perm");
    rows[k] = fixed_point_bayes_factor(ds.permutations, k, z);
  }
  v.check(rows[100].bf < 1e-3, "k=100: bf " + fmt(rows[100].bf) + " < 1e-3");
  v.check(rows[120].posterior_null <= 0.05,
          "k=120: posterior_null " + fmt(rows[120].posterior_null) + " <= 0.05");
  v.check(rows[160].bf > 1, "k=160: bf " + fmt(rows[160].bf) + " > 1");
  v.check(rows[180].bf > 20, "k=180: bf " + fmt(rows[180].bf) + " > 20 (quadrature " +
                                 fmt(rows[180].quadrature_bf) + ")");
  bool monotone = true;
  double prev = -INFINITY;
  for (const auto& [k, r] : rows) {
    monotone = monotone && r.bf >= prev;
    prev = r.bf;
  }
  v.check(monotone, "bf nondecreasing in k over 100..200");
}

void experiment_n2000(Verdict& v) {
  const ExactFixedPointPartition z(52);
  std::map<long, BfRow> rows;
  for (long k : {160L, 180L, 200L}) {
    const auto perms =
        sample_dataset({ShuffleKind::random_transpositions, k, 52, 7}, 2000, threads());
    rows[k] = fixed_point_bayes_factor(perms, k, z);
  }
  v.check(rows[160].bf < 1e-2, "k=160: bf " + fmt(rows[160].bf) + " << 1 (below 1e-2)");
  v.check(rows[180].bf > 1e2, "k=180: bf " + fmt(rows[180].bf) + " > 1e2 (quadrature " +
                                  fmt(rows[180].quadrature_bf) + ")");
  v.check(rows[200].bf > 1e10, "k=200: bf " + fmt(rows[200].bf) + " > 1e10 (quadrature " +
                                   fmt(rows[200].quadrature_bf) + ")");
}

void closed_forms(Verdict& v) {
  const double b = binomial_point_null_bf(2, 1);
  v.check(rel(b, 1.5) <= 1e-12, "binomial_point_null_bf(2, 1) = " + fmt(b, 17));
  const std::vector<long> two{1, 1};
  const double d = flat_dirichlet_bf(6.0, two);
  v.check(rel(d, 7.0 / 6.0) <= 1e-12, "flat_dirichlet_bf(6, two distinct) = " + fmt(d, 17));
  const std::vector<long> one{0};
  const std::vector<double> alpha{1.0};
  const double g = gamma_poisson_bf_curve(one, alpha).front().bf;
  v.check(rel(g, 2.0 / std::exp(1.0)) <= 1e-12, "gamma_poisson single point = " + fmt(g, 17));
  const auto l = lindley_example(49581, 48870);
  v.check(l.p_value < 0.05, "Lindley p = " + fmt(l.p_value) + " < 0.05");
  v.check(std::abs(l.posterior_null - 0.95) <= 0.02,
          "Lindley posterior_null = " + fmt(l.posterior_null) + " within 0.95 +/- 0.02");
}

void chi_square_pipeline(Verdict& v, const std::string& data_dir) {
  const auto h = read_histogram_csv(data_dir + "/smoosh.csv");
  const auto counts = h.dense_counts();
  const auto report = chi_square_test(counts, ExpectedModel::poisson(1.0));
  v.note("convention: " + report.convention);
  v.note("chi2 = " + fmt(report.statistic) + ", df = " + std::to_string(report.df) +
         ", p = " + fmt(report.p_value) + ", deviation from 6.77 is " +
         fmt(report.statistic - 6.77));
  v.check(report.df >= 1 && std::isfinite(report.statistic), "report produced");
  const double q = chi_square_upper_quantile(5, 0.05);
  v.check(std::abs(q - 11.07) <= 0.01, "chi2_5 upper 0.05 quantile " + fmt(q));
  const double sim = simulated_p_value(report, 1000000, 99);
  v.check(std::abs(sim - report.p_value) <= 0.01,
          "simulated p " + fmt(sim) + " vs asymptotic " + fmt(report.p_value) + " within 0.01");
  const auto lumped4 = chi_square_test(counts, ExpectedModel::poisson(1.0), {4, 0.0});
  v.note("values >= 4 lumped without a minimum: chi2 = " + fmt(lumped4.statistic) + ", df = " +
         std::to_string(lumped4.df) + ", p = " + fmt(lumped4.p_value));
}

void normalizer_routes(Verdict& v) {
  std::vector<double> thetas;
  for (int i = 0; i <= 8; ++i) thetas.push_back(-2.0 + 0.5 * i);
  for (int n : {6, 13, 52}) {
    const auto fp = make_statistic("fixed-points", n);
    std::vector<std::string> imp(thetas.size()), thermo(thetas.size());
    std::vector<char> imp_ok(thetas.size()), thermo_ok(thetas.size());
    parallel_for(static_cast<long>(thetas.size()), threads(), [&](long i) {
      const auto u = static_cast<std::size_t>(i);
      const double t = thetas[u];
      const double exact = exact_log_Z(n, t);
      try {
        const auto e = importance_log_Z(fp, std::vector<double>{t}, 10000000,
                                        derive_seed(8, SeedStream::normalizer_point, u));
        const double dev = std::abs(e.log_z - exact);
        imp_ok[u] = t == 0.0 ? dev < 1e-9 : dev <= 3 * e.std_error;
        imp[u] = "dev " + fmt(dev, 3) + " se " + fmt(e.std_error, 3);
      } catch (const RuntimeFailure& err) {
        imp_ok[u] = 0;
        imp[u] = err.what();
      }
      ThermodynamicOptions opt;
      opt.grid_points = 21;
      opt.chain = ChainConfig{50000, 5000, 0.0, derive_seed(9, SeedStream::normalizer_point, u), 1, false};
      const auto r = thermodynamic_log_Z(fp, std::vector<double>{t}, opt);
      const double dev = std::abs(r.log_z - exact);
      thermo_ok[u] = t == 0.0 ? dev < 1e-9 : dev <= 3 * r.std_error;
      thermo[u] = "dev " + fmt(dev, 3) + " se " + fmt(r.std_error, 3);
    });
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      const std::string at = "n=" + std::to_string(n) + " theta=" + fmt(thetas[i], 3);
      v.check(imp_ok[i], "importance " + at + ": " + imp[i]);
      v.check(thermo_ok[i], "thermo     " + at + ": " + thermo[i]);
    }
  }

  // Exact route: m' = E[F] and m'' = Var F against central differences.
  for (int n : {6, 13, 52}) {
    const ExactFixedPointPartition z(n);
    double worst1 = 0.0, worst2 = 0.0;
    for (double t : thetas) {
      const double h1 = 1e-4, h2 = 1e-3;
      const double d1 = (exact_log_Z(n, t + h1) - exact_log_Z(n, t - h1)) / (2 * h1);
      const double d2 =
          (exact_log_Z(n, t + h2) - 2 * exact_log_Z(n, t) + exact_log_Z(n, t - h2)) / (h2 * h2);
      worst1 = std::max(worst1, rel(z.mean(t), d1));
      worst2 = std::max(worst2, rel(z.variance(t), d2));
    }
    v.check(worst1 <= 1e-5, "n=" + std::to_string(n) + " gradient vs finite difference, max rel " + fmt(worst1, 3));
    v.check(worst2 <= 1e-5, "n=" + std::to_string(n) + " Hessian vs finite difference, max rel " + fmt(worst2, 3));
  }
}

// ---------------------------------------------------------------------------

std::string quote(const std::string& s) { return "'" + s + "'"; }

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void cli_determinism(Verdict& v, const std::string& mixcheck, const std::string& data_dir) {
  if (mixcheck.empty()) {
    v.check(false, "no --mixcheck executable given");
    return;
  }
  const auto dir = fs::temp_directory_path() / ("mixcheck-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cd = "cd " + quote(dir.string()) + " && " + quote(mixcheck) + " ";
  const std::string d = fs::absolute(data_dir).string() + "/";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"sim.perm", "simulate --n 52 --k 150 --samples 300 --seed 3 --out sim.perm"},
      {"freq.json", "freq-test --in sim.perm --simulate 20000 --seed 4 --out freq.json --csv freq.csv"},
      {"bayes.json", "bayes-test --in " + quote(d + "k140.perm") + " --in " + quote(d + "k160.perm") +
                         " --chains 6 --steps 400 --seed 5 --out bayes.json --chain-csv chains.csv"
                         " --curve curve.csv"},
      {"conj.csv", "conjugate-curve --in sim.perm --out conj.csv"},
      {"imp.json", "normalizer --method importance --n 13 --theta-range=-2:1 --resolution 7"
                   " --samples 50000 --seed 6 --out imp.json"},
      {"thermo.json", "normalizer --method thermo --n 13 --resolution 5 --steps 3000 --burnin 300"
                      " --seed 7 --out thermo.json"},
      {"counts.csv", "counts --n 10 --out counts.csv"},
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const auto& [primary, args] : runs) {
    const std::string command = args.substr(0, args.find(' '));
    if (shell(cd + args + " --threads 1") != 0 && shell(cd + args) != 0) {
      v.check(false, command + ": run failed");
      continue;
    }
    const auto manifest_path = dir / (primary + ".manifest.json");
    const auto manifest = nlohmann::json::parse(slurp(manifest_path));
    std::map<std::string, std::string> first;
    for (const auto& o : manifest.at("outputs")) {
      const auto p = o.at("path").get<std::string>();
      first[p] = slurp(dir / p);
    }
    bool same = true;
    for (int t : {1, 4}) {
      for (const auto& [p, bytes] : first) fs::remove(dir / p);
      const int rc = shell(cd + "replay --manifest " + quote(manifest_path.string()) +
                           " --threads " + std::to_string(t) + " --verify");
      same = same && rc == 0;
      for (const auto& [p, bytes] : first) same = same && slurp(dir / p) == bytes;
    }
    v.check(same, command + ": " + std::to_string(first.size()) +
                      " output(s) byte-identical on replay at 1 and 4 threads");
  }
  fs::remove_all(dir);
}

struct Criterion {
  const char* title;
  double time_limit_s;  // <= 0: none
};

const std::map<int, Criterion> kCriteria{
    {1, {"exact-oracle equivalence", 10}},
    {2, {"cutoff bound at desk scale", 60}},
    {3, {"exchange-algorithm correctness", 300}},
    {4, {"N=200 experiment, qualitative", 900}},
    {5, {"N=2000 experiment, qualitative", 1800}},
    {6, {"closed-form checks", 0}},
    {7, {"chi-square pipeline", 0}},
    {8, {"normalizer-route agreement", 0}},
    {9, {"CLI determinism", 0}},
};

}  // namespace

int main(int argc, char** argv) {
  Args args;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--criterion") args.criterion = std::atoi(argv[i + 1]);
    else if (key == "--mixcheck") args.mixcheck = argv[i + 1];
    else if (key == "--data") args.data = argv[i + 1];
  }
  const auto it = kCriteria.find(args.criterion);
  if (it == kCriteria.end()) {
    std::cerr << "usage: mixcheck_acceptance --criterion 1..9 [--mixcheck PATH] [--data DIR]\n";
    return 2;
  }
  const auto& [title, limit] = it->second;
  std::cout << "criterion " << args.criterion << " (" << title << ")\n" << std::flush;

  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (args.criterion) {
      case 1: exact_oracles(v); break;
      case 2: cutoff_bound(v); break;
      case 3: exchange_correctness(v); break;
      case 4: experiment_n200(v, args.data); break;
      case 5: experiment_n2000(v); break;
      case 6: closed_forms(v); break;
      case 7: chi_square_pipeline(v, args.data); break;
      case 8: normalizer_routes(v); break;
      case 9: cli_determinism(v, args.mixcheck, args.data); break;
    }
  } catch (const std::exception& e) {
    v.check(false, std::string("unexpected error: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit > 0) v.check(secs < limit, "runtime " + fmt(secs, 3) + " s < " + fmt(limit) + " s");

  std::cout << "criterion " << args.criterion << ": " << (v.ok() ? "PASS" : "FAIL") << " ("
            << title << ", " << fmt(secs, 3) << " s)\n";
  return v.ok() ? 0 : 1;
}
