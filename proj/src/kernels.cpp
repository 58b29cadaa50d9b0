#include "wedgewalk/kernels.hpp"

#include <cmath>
#include <string>

namespace wedgewalk {

RateMatrix::RateMatrix(SparseMatrix<double> matrix) : matrix_(std::move(matrix)) { validate(); }

RateMatrix RateMatrix::from_off_diagonal(std::vector<SparseMatrix<double>::Row> rows) {
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = rows[i];
    std::erase_if(row, [i](const Entry<double>& e) { return e.column == i; });
    double total = 0.0;
    for (const auto& e : row) total += e.value;
    if (total > 0.0) row.push_back(Entry<double>{i, -total});
  }
  return RateMatrix(SparseMatrix<double>::from_rows(std::move(rows), n));
}

void RateMatrix::validate() const {
  if (matrix_.rows() != matrix_.cols()) throw ShapeError("rate matrix must be square");
  for (std::size_t i = 0; i < size(); ++i) {
    double sum = 0.0;
    double scale = 0.0;
    for (const auto& e : row(i)) {
      if (!std::isfinite(e.value)) throw DomainError("non-finite rate in row " + std::to_string(i));
      if (e.column != i && e.value < 0.0) {
        throw DomainError("negative off-diagonal rate in row " + std::to_string(i));
      }
      sum += e.value;
      scale += std::abs(e.value);
    }
    if (std::abs(sum) > 1e-12 * std::max(1.0, scale)) {
      throw DomainError("rate row " + std::to_string(i) + " does not sum to 0");
    }
  }
}

LayerRates vase_layer_rates(const VaseGrid& grid, int k) {
  if (k < 1 || k >= grid.layers()) {
    throw DomainError("layer rates need 0 < k < K, got k = " + std::to_string(k));
  }
  const double cot_out = grid.cot(k);
  const double cot_in = grid.cot(k - 1);
  if (!(cot_out > 0.0) || !(cot_in > 0.0) || !std::isfinite(cot_out) || !std::isfinite(cot_in)) {
    throw DomainError("degenerate vase angle at layer " + std::to_string(k));
  }
  const double sum = cot_out + cot_in;
  return LayerRates{1.0 / (cot_out * sum), 1.0 / (cot_in * sum)};
}

RateMatrix vase_rate_matrix(const VaseGrid& grid, double apex_rate) {
  if (!(apex_rate > 0.0)) throw DomainError("vase apex rate must be positive");
  const SiteSpace& space = grid.space();
  const int top = grid.layers();
  std::vector<SparseMatrix<double>::Row> rows(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Site s = space.site(i);
    const int k = s.layer;
    const int y = s.transverse;
    if (k == top) continue;
    auto& row = rows[i];
    auto add = [&](Site to, double rate) { row.push_back(Entry<double>{space.index(to), rate}); };
    if (k == 0) {
      add({1, -1}, apex_rate);
      add({1, 0}, apex_rate);
      add({1, 1}, apex_rate);
      continue;
    }
    const LayerRates h = vase_layer_rates(grid, k);
    switch (SiteSpace::kind(s)) {
      case SiteKind::inner:
        add({k, y + 1}, 0.5);
        add({k, y - 1}, 0.5);
        add({k + 1, y}, h.outward);
        add({k - 1, y}, h.inward);
        break;
      case SiteKind::upper_boundary:
        add({k, k - 1}, 0.5);
        add({k + 1, k}, h.outward);
        add({k + 1, k + 1}, h.outward);
        break;
      case SiteKind::lower_boundary:
        add({k, -k + 1}, 0.5);
        add({k + 1, -k}, h.outward);
        add({k + 1, -k - 1}, h.outward);
        break;
      case SiteKind::apex:
        break;
    }
  }
  return RateMatrix::from_off_diagonal(std::move(rows));
}

RateMatrix projected_vase_rates(const VaseGrid& grid, double apex_rate) {
  if (!(apex_rate > 0.0)) throw DomainError("vase apex rate must be positive");
  const int top = grid.layers();
  std::vector<SparseMatrix<double>::Row> rows(static_cast<std::size_t>(top) + 1);
  rows[0].push_back(Entry<double>{1, 3.0 * apex_rate});
  for (int k = 1; k < top; ++k) {
    const LayerRates h = vase_layer_rates(grid, k);
    const double width = 2.0 * k + 1.0;
    rows[k].push_back(Entry<double>{static_cast<std::size_t>(k + 1), (2.0 * k + 3.0) / width * h.outward});
    rows[k].push_back(Entry<double>{static_cast<std::size_t>(k - 1), (2.0 * k - 1.0) / width * h.inward});
  }
  return RateMatrix::from_off_diagonal(std::move(rows));
}

StochasticKernel<double> jump_chain(const RateMatrix& rates) {
  std::vector<SparseMatrix<double>::Row> rows(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double total = rates.exit_rate(i);
    if (total <= 0.0) {
      rows[i].push_back(Entry<double>{i, 1.0});
      continue;
    }
    for (const auto& e : rates.row(i)) {
      if (e.column != i) rows[i].push_back(Entry<double>{e.column, e.value / total});
    }
  }
  const std::size_t n = rows.size();
  return StochasticKernel<double>(SparseMatrix<double>::from_rows(std::move(rows), n));
}

}  // namespace wedgewalk
