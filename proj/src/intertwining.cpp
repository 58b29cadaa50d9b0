#include "wedgewalk/intertwining.hpp"

#include <algorithm>
#include <cmath>

namespace wedgewalk {

MarkovLink build_link(const WedgeLattice& lattice) { return MarkovLink(lattice.space()); }
MarkovLink build_link(const VaseGrid& grid) { return MarkovLink(grid.space()); }

double intertwining_residual(const MarkovLink& link, const RateMatrix& two_dim, const RateMatrix& one_dim) {
  return intertwining_residual(link, two_dim.matrix(), one_dim.matrix());
}

std::vector<std::vector<double>> propagate(const RateMatrix& rates, std::vector<std::vector<double>> rows,
                                           double t, double tail) {
  if (t < 0.0) throw DomainError("negative time");
  const std::size_t n = rates.size();
  for (const auto& r : rows) {
    if (r.size() != n) throw ShapeError("initial row has the wrong length");
  }
  double lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) lambda = std::max(lambda, rates.exit_rate(i));
  if (lambda == 0.0 || t == 0.0) return rows;

  // P = I + Q / lambda
  const double mean = lambda * t;
  const auto max_terms = static_cast<std::size_t>(mean + 40.0 * std::sqrt(mean) + 60.0);

  std::vector<std::vector<double>> result(rows.size(), std::vector<double>(n, 0.0));
  std::vector<double> next(n);
  double weight = std::exp(-mean);
  double cumulative = 0.0;
  for (std::size_t m = 0;; ++m) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t i = 0; i < n; ++i) result[r][i] += weight * rows[r][i];
    }
    cumulative += weight;
    if (1.0 - cumulative < tail && static_cast<double>(m) >= mean) break;
    if (m >= max_terms) break;

    for (auto& v : rows) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] == 0.0) continue;
        next[i] += v[i];
        for (const auto& e : rates.row(i)) next[e.column] += v[i] * e.value / lambda;
      }
      v.swap(next);
    }
    weight *= mean / static_cast<double>(m + 1);
  }
  return result;
}

double semigroup_residual(const MarkovLink& link, const RateMatrix& two_dim, const RateMatrix& one_dim,
                          double t, double tail) {
  if (two_dim.size() != link.target_size() || one_dim.size() != link.source_size()) {
    throw ShapeError("rate matrices do not match the link's spaces");
  }
  const std::size_t layers = link.source_size();
  const std::size_t sites = link.target_size();
  const SparseMatrix<double> lambda = link.matrix<double>();

  std::vector<std::vector<double>> fiber_laws(layers, std::vector<double>(sites, 0.0));
  std::vector<std::vector<double>> units(layers, std::vector<double>(layers, 0.0));
  for (std::size_t k = 0; k < layers; ++k) {
    for (const auto& e : lambda.row(k)) fiber_laws[k][e.column] = e.value;
    units[k][k] = 1.0;
  }
  const auto left = propagate(two_dim, std::move(fiber_laws), t, tail);
  const auto projected = propagate(one_dim, std::move(units), t, tail);

  double worst = 0.0;
  std::vector<double> right(sites);
  for (std::size_t k = 0; k < layers; ++k) {
    std::fill(right.begin(), right.end(), 0.0);
    for (std::size_t j = 0; j < layers; ++j) {
      if (projected[k][j] == 0.0) continue;
      for (const auto& e : lambda.row(j)) right[e.column] += projected[k][j] * e.value;
    }
    for (std::size_t z = 0; z < sites; ++z) worst = std::max(worst, std::abs(left[k][z] - right[z]));
  }
  return worst;
}

}  // namespace wedgewalk
