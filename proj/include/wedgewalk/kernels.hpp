#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "wedgewalk/geometry.hpp"
#include "wedgewalk/scalar.hpp"

namespace wedgewalk {

template <class T>
struct Entry {
  std::size_t column;
  T value;
};

// Row-compressed sparse matrix. Columns within a row are sorted and unique.
template <class T>
class SparseMatrix {
 public:
  using Row = std::vector<Entry<T>>;

  SparseMatrix() = default;

  // Duplicate columns in a row are summed; explicit zeros are dropped.
  static SparseMatrix from_rows(std::vector<Row> rows, std::size_t cols) {
    SparseMatrix m;
    m.rows_ = rows.size();
    m.cols_ = cols;
    m.offsets_.assign(1, 0);
    m.offsets_.reserve(rows.size() + 1);
    for (auto& row : rows) {
      std::sort(row.begin(), row.end(),
                [](const Entry<T>& a, const Entry<T>& b) { return a.column < b.column; });
      for (std::size_t i = 0; i < row.size();) {
        if (row[i].column >= cols) throw ShapeError("sparse entry column out of range");
        T sum = row[i].value;
        std::size_t j = i + 1;
        for (; j < row.size() && row[j].column == row[i].column; ++j) sum += row[j].value;
        if (sum != T(0)) m.entries_.push_back(Entry<T>{row[i].column, sum});
        i = j;
      }
      m.offsets_.push_back(m.entries_.size());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return entries_.size(); }

  std::span<const Entry<T>> row(std::size_t i) const {
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  T at(std::size_t i, std::size_t j) const {
    for (const auto& e : row(i)) {
      if (e.column == j) return e.value;
    }
    return T(0);
  }

  T row_sum(std::size_t i) const {
    T sum(0);
    for (const auto& e : row(i)) sum += e.value;
    return sum;
  }

  // Returns a copy with one entry overwritten (or inserted).
  SparseMatrix with_entry(std::size_t i, std::size_t j, T value) const {
    std::vector<Row> rows_copy(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (const auto& e : row(r)) rows_copy[r].push_back(e);
    }
    auto& target = rows_copy.at(i);
    auto it = std::find_if(target.begin(), target.end(), [j](const Entry<T>& e) { return e.column == j; });
    if (it == target.end()) {
      target.push_back(Entry<T>{j, value});
    } else {
      it->value = value;
    }
    return from_rows(std::move(rows_copy), cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Entry<T>> entries_;
};

template <class T>
SparseMatrix<T> multiply(const SparseMatrix<T>& a, const SparseMatrix<T>& b) {
  if (a.cols() != b.rows()) throw ShapeError("matrix product dimension mismatch");
  std::vector<typename SparseMatrix<T>::Row> rows(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::map<std::size_t, T> acc;
    for (const auto& ea : a.row(i)) {
      for (const auto& eb : b.row(ea.column)) acc[eb.column] += ea.value * eb.value;
    }
    rows[i].reserve(acc.size());
    for (auto& [col, value] : acc) rows[i].push_back(Entry<T>{col, std::move(value)});
  }
  return SparseMatrix<T>::from_rows(std::move(rows), b.cols());
}

template <class T>
SparseMatrix<T> transpose(const SparseMatrix<T>& a) {
  std::vector<typename SparseMatrix<T>::Row> rows(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (const auto& e : a.row(i)) rows[e.column].push_back(Entry<T>{i, e.value});
  }
  return SparseMatrix<T>::from_rows(std::move(rows), a.rows());
}

// Row-stochastic operator. T = double (float mode) or Rational (exact mode).
template <class T>
class StochasticKernel {
 public:
  StochasticKernel() = default;
  explicit StochasticKernel(SparseMatrix<T> matrix) : matrix_(std::move(matrix)) { validate(); }

  std::size_t size() const { return matrix_.rows(); }
  const SparseMatrix<T>& matrix() const { return matrix_; }
  std::span<const Entry<T>> row(std::size_t i) const { return matrix_.row(i); }
  T probability(std::size_t from, std::size_t to) const { return matrix_.at(from, to); }

  bool is_absorbing(std::size_t i) const {
    auto r = row(i);
    return r.size() == 1 && r[0].column == i;
  }

  // Rows sum to one exactly (rational) or within 1e-12 (float); entries are nonnegative.
  void validate() const {
    if (matrix_.rows() != matrix_.cols()) throw ShapeError("stochastic kernel must be square");
    for (std::size_t i = 0; i < size(); ++i) {
      for (const auto& e : row(i)) {
        if (e.value < T(0)) throw DomainError("negative transition probability in row " + std::to_string(i));
      }
      const T sum = matrix_.row_sum(i);
      if constexpr (is_exact_v<T>) {
        if (sum != T(1)) throw DomainError("row " + std::to_string(i) + " does not sum to 1");
      } else {
        if (std::abs(sum - 1.0) > 1e-12) throw DomainError("row " + std::to_string(i) + " does not sum to 1");
      }
    }
  }

 private:
  SparseMatrix<T> matrix_;
};

// Q-matrix: nonnegative off-diagonal rates, diagonal equal to minus the row sum.
class RateMatrix {
 public:
  RateMatrix() = default;
  explicit RateMatrix(SparseMatrix<double> matrix);

  // Builds the diagonal from off-diagonal rows (diagonal entries in the input are ignored).
  static RateMatrix from_off_diagonal(std::vector<SparseMatrix<double>::Row> rows);

  std::size_t size() const { return matrix_.rows(); }
  const SparseMatrix<double>& matrix() const { return matrix_; }
  std::span<const Entry<double>> row(std::size_t i) const { return matrix_.row(i); }
  double rate(std::size_t from, std::size_t to) const { return matrix_.at(from, to); }
  double exit_rate(std::size_t i) const { return -matrix_.at(i, i); }

  void validate() const;

 private:
  SparseMatrix<double> matrix_;
};

// Probabilities sin^2(alpha)/2 horizontally and cos^2(alpha)/2 vertically at
// inner sites; boundary sites reflect with angle -alpha; sites on layers >= M absorb.
template <class T>
StochasticKernel<T> wedge_kernel(const WedgeLattice& lattice, int absorb_at) {
  const auto& spec = lattice.spec();
  const SiteSpace& space = lattice.space();
  if (absorb_at < 2 || absorb_at > space.layers()) {
    throw DomainError("absorbing layer must satisfy 2 <= M <= N, got " + std::to_string(absorb_at));
  }
  const T half_sin2 = param_as<T>(spec.alpha.sin_squared()) / 2;
  const T half_cos2 = param_as<T>(spec.alpha.cos_squared()) / 2;
  const T r = param_as<T>(spec.apex_hold);

  std::vector<typename SparseMatrix<T>::Row> rows(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Site s = space.site(i);
    auto& row = rows[i];
    auto add = [&](Site to, const T& p) { row.push_back(Entry<T>{space.index(to), p}); };
    const int k = s.layer;
    const int y = s.transverse;
    if (k >= absorb_at) {
      add(s, T(1));
      continue;
    }
    switch (SiteSpace::kind(s)) {
      case SiteKind::apex:
        add({1, -1}, r);
        add({1, 0}, r);
        add({1, 1}, r);
        add(s, T(1) - 3 * r);
        break;
      case SiteKind::inner:
        add({k + 1, y}, half_sin2);
        add({k - 1, y}, half_sin2);
        add({k, y + 1}, half_cos2);
        add({k, y - 1}, half_cos2);
        break;
      case SiteKind::upper_boundary:
        add({k + 1, k}, half_sin2);
        add({k + 1, k + 1}, half_sin2);
        add({k, k - 1}, half_cos2);
        add(s, half_cos2);
        break;
      case SiteKind::lower_boundary:
        add({k + 1, -k}, half_sin2);
        add({k + 1, -k - 1}, half_sin2);
        add({k, -k + 1}, half_cos2);
        add(s, half_cos2);
        break;
    }
  }
  return StochasticKernel<T>(SparseMatrix<T>::from_rows(std::move(rows), space.size()));
}

// Birth-death chain on {0, ..., N} obtained by projecting the wedge walk onto
// its layer index. State N (= spec.layers) absorbs.
template <class T>
StochasticKernel<T> projected_wedge_chain(const WedgeSpec& spec) {
  spec.validate();
  const int n = spec.layers;
  const T sin2 = param_as<T>(spec.alpha.sin_squared());
  const T cos2 = param_as<T>(spec.alpha.cos_squared());
  const T r = param_as<T>(spec.apex_hold);

  std::vector<typename SparseMatrix<T>::Row> rows(static_cast<std::size_t>(n) + 1);
  rows[0] = {{0, T(1) - 3 * r}, {1, 3 * r}};
  for (int i = 1; i < n; ++i) {
    const T denom = T(2 * i + 1);
    rows[i] = {{static_cast<std::size_t>(i - 1), sin2 / 2 * T(2 * i - 1) / denom},
               {static_cast<std::size_t>(i), cos2},
               {static_cast<std::size_t>(i + 1), sin2 / 2 * T(2 * i + 3) / denom}};
  }
  rows[n] = {{static_cast<std::size_t>(n), T(1)}};
  const std::size_t size = rows.size();
  return StochasticKernel<T>(SparseMatrix<T>::from_rows(std::move(rows), size));
}

// Continuous-time walk on the vase grid: vertical rates 1/2, horizontal rates
// [cot a_k (cot a_k + cot a_{k-1})]^{-1} outward and [cot a_{k-1} (...)]^{-1}
// inward; boundary sites jump outward to both neighbours; layer K absorbs.
RateMatrix vase_rate_matrix(const VaseGrid& grid, double apex_rate = 1.0 / 6.0);

// Layer-index chain Q~ on {x_0, ..., x_K}; x_K absorbs.
RateMatrix projected_vase_rates(const VaseGrid& grid, double apex_rate = 1.0 / 6.0);

// Embedded jump chain; zero rows become absorbing.
StochasticKernel<double> jump_chain(const RateMatrix& rates);

// Outward and inward horizontal rates at layer 0 < k < K.
struct LayerRates {
  double outward;
  double inward;
};
LayerRates vase_layer_rates(const VaseGrid& grid, int k);

// Sparse triplet dump: "from to num den" (rational) or "from to value" (float), one entry per line.
template <class T>
void write_triplets(std::ostream& os, const SparseMatrix<T>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (const auto& e : m.row(i)) {
      os << i << ' ' << e.column << ' ';
      if constexpr (is_exact_v<T>) {
        os << boost::multiprecision::numerator(e.value) << ' '
           << boost::multiprecision::denominator(e.value) << '\n';
      } else {
        os << to_string(e.value) << '\n';
      }
    }
  }
}

}  // namespace wedgewalk
