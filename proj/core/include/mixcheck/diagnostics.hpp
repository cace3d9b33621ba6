#pragma once

#include <span>
#include <vector>

namespace mixcheck {

/// Effective sample size by Geyer's initial monotone sequence estimator.
double effective_sample_size(std::span<const double> x);

/// Split-chain R-hat of a single chain (first half vs second half).
double split_rhat(std::span<const double> x);

/// Gelman-Rubin R-hat across replicate chains, each split in half.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Standard error of the mean by non-overlapping batch means.
double batch_means_stderr(std::span<const double> x, int batches = 20);

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

}  // namespace mixcheck
