#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mixcheck/chi_square.hpp"
#include "mixcheck/inference.hpp"
#include "mixcheck/samplers.hpp"

namespace mixcheck {

inline constexpr int kReportVersion = 1;

/// `extra_json` is an object whose fields are appended to the report; it may
/// not redefine a report field.
std::string to_json(const BayesFactorReport& report, const std::string& extra_json = "{}");
std::string to_json(const ChiSquareReport& report, const std::string& extra_json = "{}");
std::string diagnostics_json(const ParameterChain& chain);

/// step,theta[_i...],accepted for every post-burn-in retained sample.
void write_chain_csv(std::ostream& out, const ParameterChain& chain);

/// Header line then one row per point: "<x_name>,bf,log_bf".
void write_curve_csv(std::ostream& out, const std::string& x_name,
                     const std::vector<CurvePoint>& curve);

/// "category,observed,expected" rows for plotting.
void write_chi_square_csv(std::ostream& out, const ChiSquareReport& report);

/// Fixed-precision decimal text that round-trips doubles; inf as "inf".
std::string format_double(double x);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace mixcheck
