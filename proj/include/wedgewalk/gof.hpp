#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wedgewalk {

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;         // bins offered
  std::size_t merged_bins = 0;  // bins after merging under-filled neighbours
};

// Pearson goodness of fit. Adjacent bins are merged until every expected
// count is at least 5; p-value from the regularized upper incomplete gamma.
ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& probabilities);

ChiSquareResult chi_square_uniform(const std::vector<std::uint64_t>& observed);

// Two-sample homogeneity on a 2 x n table, with the same merging rule on the pooled expectation.
ChiSquareResult chi_square_homogeneity(const std::vector<std::uint64_t>& first,
                                       const std::vector<std::uint64_t>& second);

struct KsResult {
  double distance = 0.0;
  std::size_t n = 0;
  double p_value = 1.0;
};

// Kolmogorov-Smirnov distance to Unif[0, 1] with the asymptotic p-value.
KsResult ks_uniform(std::vector<double> samples);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

// Asymptotic critical distance at level alpha for n samples.
double ks_critical_value(std::size_t n, double alpha);

}  // namespace wedgewalk
