#include "wedgewalk/green.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace wedgewalk {

namespace {

// Transient states reachable from the source; every one of them must be able
// to reach an absorbing state, otherwise the system is singular.
template <class T>
std::vector<std::size_t> transient_support(const StochasticKernel<T>& kernel, std::size_t source,
                                           const std::vector<bool>& absorbing) {
  const std::size_t n = kernel.size();
  if (absorbing.size() != n) throw ShapeError("absorbing mask does not match kernel size");
  if (source >= n) throw DomainError("source state out of range");
  if (absorbing[source]) throw DomainError("source state is absorbing");

  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{source};
  seen[source] = true;
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    if (absorbing[x]) continue;
    for (const auto& e : kernel.row(x)) {
      if (!seen[e.column]) {
        seen[e.column] = true;
        queue.push_back(e.column);
      }
    }
  }

  // Backward reachability of the absorbing set.
  const SparseMatrix<T> columns = transpose(kernel.matrix());
  std::vector<bool> drains(n, false);
  for (std::size_t x = 0; x < n; ++x) {
    if (absorbing[x]) {
      drains[x] = true;
      queue.push_back(x);
    }
  }
  if (queue.empty()) throw SolverError("no absorbing state: Green function is infinite");
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    for (const auto& e : columns.row(x)) {
      if (!drains[e.column]) {
        drains[e.column] = true;
        queue.push_back(e.column);
      }
    }
  }

  std::vector<std::size_t> support;
  for (std::size_t x = 0; x < n; ++x) {
    if (!seen[x] || absorbing[x]) continue;
    if (!drains[x]) {
      throw SolverError("absorption is unreachable from state " + std::to_string(x));
    }
    support.push_back(x);
  }
  return support;
}

}  // namespace

std::vector<bool> absorbing_layers(const SiteSpace& space, int layer) {
  std::vector<bool> mask(space.size(), false);
  for (std::size_t i = SiteSpace::fiber_begin(std::min(layer, space.layers() + 1)); i < space.size(); ++i) {
    mask[i] = true;
  }
  return mask;
}

std::vector<bool> absorbing_from(std::size_t size, std::size_t state) {
  std::vector<bool> mask(size, false);
  for (std::size_t i = state; i < size; ++i) mask[i] = true;
  return mask;
}

GreenVector<double> green_vector(const StochasticKernel<double>& kernel, std::size_t source,
                                 std::vector<bool> absorbing) {
  const auto support = transient_support(kernel, source, absorbing);
  const std::size_t n = kernel.size();
  std::vector<std::ptrdiff_t> local(n, -1);
  for (std::size_t i = 0; i < support.size(); ++i) local[support[i]] = static_cast<std::ptrdiff_t>(i);

  // A = (I - P_TT)^T
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < support.size(); ++i) {
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for (const auto& e : kernel.row(support[i])) {
      const auto j = local[e.column];
      if (j >= 0) triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), -e.value);
    }
  }
  const auto m = static_cast<Eigen::Index>(support.size());
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(local[source]) = 1.0;
  const Eigen::VectorXd g = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !g.allFinite()) throw SolverError("sparse LU solve failed");

  GreenVector<double> out{source, std::move(absorbing), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < support.size(); ++i) out.visits[support[i]] = g(static_cast<Eigen::Index>(i));
  return out;
}

GreenVector<Rational> green_vector(const StochasticKernel<Rational>& kernel, std::size_t source,
                                   std::vector<bool> absorbing) {
  const auto support = transient_support(kernel, source, absorbing);
  const std::size_t m = support.size();
  if (m > kMaxExactStates) {
    throw SolverError("exact Green solve limited to " + std::to_string(kMaxExactStates) +
                      " transient states, got " + std::to_string(m));
  }
  const std::size_t n = kernel.size();
  std::vector<std::ptrdiff_t> local(n, -1);
  for (std::size_t i = 0; i < m; ++i) local[support[i]] = static_cast<std::ptrdiff_t>(i);

  // Augmented dense system [A | e_source], A = (I - P_TT)^T.
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1));
  for (std::size_t i = 0; i < m; ++i) {
    a[i][i] += 1;
    for (const auto& e : kernel.row(support[i])) {
      const auto j = local[e.column];
      if (j >= 0) a[static_cast<std::size_t>(j)][i] -= e.value;
    }
  }
  a[static_cast<std::size_t>(local[source])][m] = 1;

  // Layer-major ordering keeps A banded, so forward elimination only touches
  // columns up to each pivot row's last nonzero entry.
  std::vector<std::size_t> last(m, 0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = m; c-- > 0;) {
      if (a[r][c] != 0) {
        last[r] = c;
        break;
      }
    }
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    while (pivot < m && a[pivot][col] == 0) ++pivot;
    if (pivot == m) throw SolverError("singular absorbing system");
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(last[pivot], last[col]);
    }
    const std::size_t reach = last[col];
    for (std::size_t r = col + 1; r < m; ++r) {
      if (a[r][col] == 0) continue;
      const Rational factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= reach; ++c) {
        if (a[col][c] != 0) a[r][c] -= factor * a[col][c];
      }
      a[r][m] -= factor * a[col][m];
      last[r] = std::max(last[r], reach);
    }
  }
  for (std::size_t r = m; r-- > 0;) {
    Rational acc = a[r][m];
    for (std::size_t c = r + 1; c <= last[r]; ++c) {
      if (a[r][c] != 0) acc -= a[r][c] * a[c][m];
    }
    a[r][m] = acc / a[r][r];
  }

  GreenVector<Rational> out{source, std::move(absorbing), std::vector<Rational>(n)};
  for (std::size_t i = 0; i < m; ++i) out.visits[support[i]] = a[i][m];
  return out;
}

GreenShapeFit fit_green_shape(const GreenVector<double>& green_1d, int layers, const Angle& alpha) {
  if (layers < 2 || green_1d.size() < static_cast<std::size_t>(layers) + 1) {
    throw ShapeError("Green vector too short for the requested N");
  }
  std::vector<double> ratios;
  for (int y = 1; y < layers; ++y) ratios.push_back(green_1d.visits[y] / green_closed_form_1d(layers, y));

  GreenShapeFit fit;
  double sum = 0.0;
  for (double r : ratios) sum += r;
  fit.constant = sum / static_cast<double>(ratios.size());
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  fit.relative_variation = (*hi - *lo) / std::abs(fit.constant);
  fit.inv_sin2 = 1.0 / alpha.sin_squared().value;
  fit.inv_cos2 = 1.0 / alpha.cos_squared().value;
  fit.apex_visits = green_1d.visits[0];

  auto close = [&](double candidate) { return std::abs(fit.constant - candidate) <= 1e-8 * candidate; };
  const bool sin_ok = close(fit.inv_sin2);
  const bool cos_ok = close(fit.inv_cos2);
  fit.matching_prefactor = sin_ok && cos_ok ? "both" : sin_ok ? "1/sin^2" : cos_ok ? "1/cos^2" : "neither";
  return fit;
}

}  // namespace wedgewalk
