#include "mixcheck/reports.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"
#include "mixcheck/error.hpp"

namespace mixcheck {

namespace {

using nlohmann::ordered_json;

/// Non-finite values are not valid JSON numbers; infinities become strings.
ordered_json number(double x) {
  if (x == 0.0) return 0.0;  // no "-0.0" in reports
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "+inf" : "-inf";
}

ordered_json numbers(const std::vector<double>& xs) {
  auto arr = ordered_json::array();
  for (double x : xs) arr.push_back(number(x));
  return arr;
}

void merge_extra(ordered_json& doc, const std::string& extra_json) {
  ordered_json extra;
  try {
    extra = ordered_json::parse(extra_json);
  } catch (const ordered_json::parse_error& e) {
    throw ValidationError(std::string("invalid extra report JSON: ") + e.what());
  }
  if (!extra.is_object()) throw ValidationError("extra report JSON must be an object");
  for (auto& [k, v] : extra.items()) {
    if (doc.contains(k)) throw ValidationError("extra report field '" + k + "' would overwrite a report field");
    doc[k] = v;
  }
}

}  // namespace

std::string to_json(const BayesFactorReport& r, const std::string& extra_json) {
  ordered_json doc;
  doc["version"] = kReportVersion;
  doc["kind"] = "bayes_factor";
  doc["method"] = r.method;
  doc["bf"] = number(r.bf);
  doc["log_bf"] = number(r.log_bf);
  doc["posterior_null"] = number(r.posterior_null);
  doc["prior_odds"] = r.prior_odds;
  doc["rhat"] = number(r.rhat);
  std::vector<double> per_chain_bf;
  for (double lb : r.per_chain_log_bf) {
    per_chain_bf.push_back(lb > kLogBfOverflow ? std::numeric_limits<double>::infinity() : std::exp(lb));
  }
  doc["per_chain_bf"] = numbers(per_chain_bf);
  doc["per_chain_log_bf"] = numbers(r.per_chain_log_bf);
  doc["per_chain_acceptance"] = numbers(r.per_chain_acceptance);
  doc["per_chain_ess"] = numbers(r.per_chain_ess);
  doc["seed"] = r.seed;
  doc["chain_seeds"] = r.chain_seeds;
  doc["warnings"] = r.warnings;
  merge_extra(doc, extra_json);
  return doc.dump(2) + "\n";
}

std::string to_json(const ChiSquareReport& r, const std::string& extra_json) {
  ordered_json doc;
  doc["version"] = kReportVersion;
  doc["kind"] = "chi_square";
  doc["model"] = r.model;
  doc["categories"] = r.categories;
  doc["observed"] = r.observed;
  doc["expected"] = numbers(r.expected);
  doc["probabilities"] = numbers(r.probabilities);
  doc["statistic"] = number(r.statistic);
  doc["df"] = r.df;
  doc["p_value"] = number(r.p_value);
  doc["lump_threshold"] = r.lump_threshold;
  doc["min_expected"] = r.min_expected;
  doc["convention"] = r.convention;
  merge_extra(doc, extra_json);
  return doc.dump(2) + "\n";
}

std::string diagnostics_json(const ParameterChain& chain) {
  ordered_json doc;
  doc["seed"] = chain.seed;
  doc["samples"] = chain.samples.size();
  doc["acceptance_rate"] = number(chain.acceptance_rate);
  doc["proposal_scale"] = number(chain.proposal_scale);
  doc["ess"] = numbers(chain.diagnostics.ess);
  doc["split_rhat"] = numbers(chain.diagnostics.split_rhat);
  doc["approximate"] = chain.approximate;
  return doc.dump();
}

void write_chain_csv(std::ostream& out, const ParameterChain& chain) {
  const std::size_t d = chain.samples.empty() ? 1 : chain.samples.front().size();
  out << "step";
  if (d == 1) {
    out << ",theta";
  } else {
    for (std::size_t i = 0; i < d; ++i) out << ",theta_" << i;
  }
  out << ",accepted\n";
  for (std::size_t i = 0; i < chain.samples.size(); ++i) {
    const long step = chain.burnin + static_cast<long>(i) * chain.thin;
    out << step;
    for (double v : chain.samples[i]) out << ',' << format_double(v);
    const bool acc = step < static_cast<long>(chain.accepted.size()) &&
                     chain.accepted[static_cast<std::size_t>(step)];
    out << ',' << (acc ? 1 : 0) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::string& x_name,
                     const std::vector<CurvePoint>& curve) {
  out << x_name << ",bf,log_bf\n";
  for (const auto& p : curve) {
    out << format_double(p.x) << ',' << format_double(p.bf) << ',' << format_double(p.log_bf) << '\n';
  }
}

void write_chi_square_csv(std::ostream& out, const ChiSquareReport& report) {
  out << "category,observed,expected\n";
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    out << report.categories[i] << ',' << report.observed[i] << ','
        << format_double(report.expected[i]) << '\n';
  }
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mixcheck
