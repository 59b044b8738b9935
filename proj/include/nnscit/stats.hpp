#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nnscit {

double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);
double pearson(std::span<const double> a, std::span<const double> b);

/// Two-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - F_b(t)|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Counts in `bins` equal-width bins over [lo, hi]; the right edge is closed.
std::vector<std::size_t> histogram(std::span<const double> v, std::size_t bins, double lo,
                                   double hi);

}  // namespace nnscit
