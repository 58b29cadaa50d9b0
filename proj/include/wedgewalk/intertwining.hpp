#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "wedgewalk/geometry.hpp"
#include "wedgewalk/kernels.hpp"

namespace wedgewalk {

// Markov kernel from layer indices {0, ..., K} to sites: uniform law on the
// 2k + 1 sites of layer k.
class MarkovLink {
 public:
  explicit MarkovLink(SiteSpace target) : target_(target) {}

  std::size_t source_size() const { return static_cast<std::size_t>(target_.layers()) + 1; }
  std::size_t target_size() const { return target_.size(); }
  const SiteSpace& target() const { return target_; }

  template <class T>
  T weight(int state) const {
    return T(1) / T(2 * state + 1);
  }

  template <class T>
  SparseMatrix<T> matrix() const {
    std::vector<typename SparseMatrix<T>::Row> rows(source_size());
    for (int k = 0; k <= target_.layers(); ++k) {
      const T w = weight<T>(k);
      const std::size_t begin = SiteSpace::fiber_begin(k);
      for (std::size_t j = 0; j < SiteSpace::fiber_size(k); ++j) rows[k].push_back(Entry<T>{begin + j, w});
    }
    return SparseMatrix<T>::from_rows(std::move(rows), target_size());
  }

 private:
  SiteSpace target_;
};

MarkovLink build_link(const WedgeLattice& lattice);
MarkovLink build_link(const VaseGrid& grid);

template <class T>
T max_abs_difference(const SparseMatrix<T>& a, const SparseMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("operand shapes differ");
  T worst(0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ra = a.row(i);
    auto rb = b.row(i);
    std::size_t p = 0, q = 0;
    while (p < ra.size() || q < rb.size()) {
      T diff(0);
      if (q == rb.size() || (p < ra.size() && ra[p].column < rb[q].column)) {
        diff = ra[p++].value;
      } else if (p == ra.size() || rb[q].column < ra[p].column) {
        diff = rb[q++].value;
      } else {
        diff = ra[p++].value - rb[q++].value;
      }
      const T mag = abs_value(diff);
      if (mag > worst) worst = mag;
    }
  }
  return worst;
}

// max |(Lambda A - B Lambda)(k, z)| over layer states k and sites z.
template <class T>
T intertwining_residual(const MarkovLink& link, const SparseMatrix<T>& two_dim,
                        const SparseMatrix<T>& one_dim) {
  if (two_dim.rows() != link.target_size() || two_dim.cols() != link.target_size()) {
    throw ShapeError("two-dimensional operator does not match the link's target space");
  }
  if (one_dim.rows() != link.source_size() || one_dim.cols() != link.source_size()) {
    throw ShapeError("one-dimensional operator does not match the link's source space");
  }
  const SparseMatrix<T> lambda = link.matrix<T>();
  return max_abs_difference(multiply(lambda, two_dim), multiply(one_dim, lambda));
}

template <class T>
T intertwining_residual(const MarkovLink& link, const StochasticKernel<T>& two_dim,
                        const StochasticKernel<T>& one_dim) {
  return intertwining_residual(link, two_dim.matrix(), one_dim.matrix());
}

double intertwining_residual(const MarkovLink& link, const RateMatrix& two_dim, const RateMatrix& one_dim);

// Same identity for the n-step operators P^n and Q^n.
template <class T>
T intertwining_power_residual(const MarkovLink& link, const StochasticKernel<T>& two_dim,
                              const StochasticKernel<T>& one_dim, int power) {
  if (power < 1) throw DomainError("power must be >= 1");
  SparseMatrix<T> p = two_dim.matrix();
  SparseMatrix<T> q = one_dim.matrix();
  for (int i = 1; i < power; ++i) {
    p = multiply(p, two_dim.matrix());
    q = multiply(q, one_dim.matrix());
  }
  return intertwining_residual(link, p, q);
}

// Layer-lumped form of the identity: max |sum_{z in fiber j} (Lambda A)(k, z) - B(k, j)|.
// Holds whenever the projection of A onto layers is B, even if the fiber law is not uniform.
template <class T>
T lumped_residual(const MarkovLink& link, const SparseMatrix<T>& two_dim, const SparseMatrix<T>& one_dim) {
  const SparseMatrix<T> lambda_a = multiply(link.matrix<T>(), two_dim);
  std::vector<typename SparseMatrix<T>::Row> rows(lambda_a.rows());
  for (std::size_t k = 0; k < lambda_a.rows(); ++k) {
    for (const auto& e : lambda_a.row(k)) {
      rows[k].push_back(Entry<T>{static_cast<std::size_t>(link.target().site(e.column).layer), e.value});
    }
  }
  const auto lumped = SparseMatrix<T>::from_rows(std::move(rows), link.source_size());
  return max_abs_difference(lumped, one_dim);
}

// Lambda e^{tA} versus e^{tB} Lambda, both evaluated by uniformization; the
// Poisson series is truncated once its tail drops below `tail`.
double semigroup_residual(const MarkovLink& link, const RateMatrix& two_dim, const RateMatrix& one_dim,
                          double t, double tail = 1e-14);

// Rows of e^{tQ} for the given initial row vectors (uniformization).
std::vector<std::vector<double>> propagate(const RateMatrix& rates, std::vector<std::vector<double>> rows,
                                           double t, double tail = 1e-14);

// Draws a site from Lambda(state, .).
template <class Rng>
Site filter_sample(const MarkovLink& link, int state, Rng& rng) {
  if (state < 0 || state > link.target().layers()) throw DomainError("link state out of range");
  std::uniform_int_distribution<int> transverse(-state, state);
  return Site{state, transverse(rng)};
}

// sum_j q(i, j) / (2j + 1) - 1 / (2i + 1) at state i.
template <class T>
T harmonic_defect(const StochasticKernel<T>& chain, std::size_t i) {
  T image(0);
  for (const auto& e : chain.row(i)) image += e.value / T(2 * static_cast<long>(e.column) + 1);
  return image - T(1) / T(2 * static_cast<long>(i) + 1);
}

// Largest |harmonic_defect| over non-apex, non-absorbing states.
template <class T>
T harmonic_residual(const StochasticKernel<T>& chain) {
  T worst(0);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (chain.is_absorbing(i)) continue;
    const T mag = abs_value(harmonic_defect(chain, i));
    if (mag > worst) worst = mag;
  }
  return worst;
}

struct ResidualReport {
  std::string identity;
  std::string mode;
  std::size_t size = 0;
  double residual = 0.0;
  bool pass = false;
};

}  // namespace wedgewalk
