#include "wedgewalk/gof.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "wedgewalk/errors.hpp"

namespace wedgewalk {

namespace {

// Groups of adjacent bin indices whose summed weight is at least `floor`; a
// short final group joins its predecessor.
std::vector<std::vector<std::size_t>> merge_groups(const std::vector<double>& weight, double floor) {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> current;
  double acc = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    current.push_back(i);
    acc += weight[i];
    if (acc >= floor) {
      groups.push_back(std::move(current));
      current.clear();
      acc = 0.0;
    }
  }
  if (!current.empty()) {
    if (groups.empty()) {
      groups.push_back(std::move(current));
    } else {
      groups.back().insert(groups.back().end(), current.begin(), current.end());
    }
  }
  return groups;
}

double chi_square_p(double statistic, int dof) {
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

}  // namespace

ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& probabilities) {
  if (observed.size() != probabilities.size()) throw ShapeError("observed and expected bins differ in length");
  if (observed.size() < 2) throw DomainError("chi-square needs at least two bins");
  double mass = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw DomainError("negative bin probability");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw DomainError("bin probabilities do not sum to one");
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  if (total == 0) throw DomainError("chi-square on an empty sample");

  std::vector<double> expected(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) expected[i] = probabilities[i] * static_cast<double>(total);
  const auto groups = merge_groups(expected, 5.0);
  if (groups.size() < 2) throw DomainError("too few expected counts for a chi-square test");

  ChiSquareResult r;
  r.bins = observed.size();
  r.merged_bins = groups.size();
  for (const auto& g : groups) {
    double o = 0.0;
    double e = 0.0;
    for (auto i : g) {
      o += static_cast<double>(observed[i]);
      e += expected[i];
    }
    r.statistic += (o - e) * (o - e) / e;
  }
  r.dof = static_cast<int>(groups.size()) - 1;
  r.p_value = chi_square_p(r.statistic, r.dof);
  return r;
}

ChiSquareResult chi_square_uniform(const std::vector<std::uint64_t>& observed) {
  return chi_square_gof(observed, std::vector<double>(observed.size(), 1.0 / static_cast<double>(observed.size())));
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::uint64_t>& first,
                                       const std::vector<std::uint64_t>& second) {
  if (first.size() != second.size()) throw ShapeError("homogeneity tables differ in length");
  double n1 = 0.0;
  double n2 = 0.0;
  for (auto c : first) n1 += static_cast<double>(c);
  for (auto c : second) n2 += static_cast<double>(c);
  if (n1 == 0.0 || n2 == 0.0) throw DomainError("homogeneity test on an empty sample");
  const double n = n1 + n2;

  // Smallest expected cell of each column decides the merging.
  std::vector<double> floor_weight(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double column = static_cast<double>(first[i] + second[i]);
    floor_weight[i] = column * std::min(n1, n2) / n;
  }
  const auto groups = merge_groups(floor_weight, 5.0);
  if (groups.size() < 2) throw DomainError("too few expected counts for a homogeneity test");

  ChiSquareResult r;
  r.bins = first.size();
  r.merged_bins = groups.size();
  for (const auto& g : groups) {
    double a = 0.0;
    double b = 0.0;
    for (auto i : g) {
      a += static_cast<double>(first[i]);
      b += static_cast<double>(second[i]);
    }
    const double column = a + b;
    const double ea = column * n1 / n;
    const double eb = column * n2 / n;
    r.statistic += (a - ea) * (a - ea) / ea + (b - eb) * (b - eb) / eb;
  }
  r.dof = static_cast<int>(groups.size()) - 1;
  r.p_value = chi_square_p(r.statistic, r.dof);
  return r;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0) throw DomainError("KS critical value needs n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("KS level must lie in (0, 1)");
  double lo = 0.2;
  double hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_survival(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

KsResult ks_uniform(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("KS test on an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double u = std::clamp(samples[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  return KsResult{d, samples.size(), kolmogorov_survival(std::sqrt(n) * d)};
}

}  // namespace wedgewalk
