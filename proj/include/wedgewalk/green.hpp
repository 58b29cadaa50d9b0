#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wedgewalk/geometry.hpp"
#include "wedgewalk/kernels.hpp"

namespace wedgewalk {

// Expected number of steps spent at each state before absorption, self-loop
// steps included. Zero on absorbing states.
template <class T>
struct GreenVector {
  std::size_t source = 0;
  std::vector<bool> absorbing;
  std::vector<T> visits;

  std::size_t size() const { return visits.size(); }
};

// Sites on layers >= M.
std::vector<bool> absorbing_layers(const SiteSpace& space, int layer);
// States >= M of a chain on {0, ..., size - 1}.
std::vector<bool> absorbing_from(std::size_t size, std::size_t state);

// Solves (I - P_TT)^T g = e_source over the transient states reachable from the
// source: sparse LU in float mode, exact elimination in rational mode (up to
// kMaxExactStates transient states).
GreenVector<double> green_vector(const StochasticKernel<double>& kernel, std::size_t source,
                                 std::vector<bool> absorbing);
GreenVector<Rational> green_vector(const StochasticKernel<Rational>& kernel, std::size_t source,
                                   std::vector<bool> absorbing);

inline constexpr std::size_t kMaxExactStates = 400;

// (2y + 1)(1 - (2y + 1)/(2N + 1)), without the global prefactor.
template <class T = double>
T green_closed_form_1d(int layers, int y) {
  if (y < 0 || y > layers) throw DomainError("closed-form Green function needs 0 <= y <= N");
  const T width = T(2 * y + 1);
  return width * (T(1) - width / T(2 * layers + 1));
}

struct GreenShapeFit {
  double constant = 0.0;            // mean of g(y) / closed(y) over 1 <= y <= N - 1
  double relative_variation = 0.0;  // (max - min) / |mean| of those ratios
  double inv_sin2 = 0.0;            // candidate prefactor 1 / sin^2(alpha)
  double inv_cos2 = 0.0;            // candidate prefactor 1 / cos^2(alpha)
  double apex_visits = 0.0;         // g(0), which depends on the apex hold
  std::string matching_prefactor;   // "1/sin^2", "1/cos^2", "both" or "neither"
};

GreenShapeFit fit_green_shape(const GreenVector<double>& green_1d, int layers, const Angle& alpha);

// max over 0 <= k < M, |y| <= k of |G(0,(k,y)) - G~(0,k)/(2k+1)|, relative to the latter.
template <class T>
T green_factorization_residual(const GreenVector<T>& green_2d, const GreenVector<T>& green_1d,
                               const SiteSpace& space, int absorb_at) {
  T worst(0);
  for (int k = 0; k < absorb_at; ++k) {
    const T expected = green_1d.visits.at(k) / T(2 * k + 1);
    for (int y = -k; y <= k; ++y) {
      const T diff = abs_value(green_2d.visits.at(space.index({k, y})) - expected) / expected;
      if (diff > worst) worst = diff;
    }
  }
  return worst;
}

template <class T>
void write_green_csv(std::ostream& os, const GreenVector<T>& green, const SiteSpace& space) {
  os << "layer,transverse,visits\n";
  for (std::size_t i = 0; i < green.size(); ++i) {
    const Site s = space.site(i);
    os << s.layer << ',' << s.transverse << ',' << to_string(green.visits[i]) << '\n';
  }
}

// Time reversal of the absorbed chain. State `cemetery` (= forward size) is
// appended: the reversal is killed there on leaving the forward source.
template <class T>
struct ReversedChain {
  StochasticKernel<T> kernel;
  std::vector<T> initial;  // forward absorption law, over size() + 1 states
  std::size_t cemetery = 0;
};

// p^(x, y) = g(y) p(y, x) / g(x) on transient states; from an absorbing state z,
// p^(z, y) = g(y) p(y, z) / nu(z) with nu the absorption law.
template <class T>
ReversedChain<T> nagasawa_reverse(const StochasticKernel<T>& kernel, const GreenVector<T>& green) {
  const std::size_t n = kernel.size();
  if (green.size() != n || green.absorbing.size() != n) throw ShapeError("Green vector does not match kernel");
  const std::size_t cemetery = n;
  const SparseMatrix<T> columns = transpose(kernel.matrix());

  std::vector<T> initial(n + 1, T(0));
  for (std::size_t z = 0; z < n; ++z) {
    if (!green.absorbing[z]) continue;
    for (const auto& e : columns.row(z)) {
      if (!green.absorbing[e.column]) initial[z] += green.visits[e.column] * e.value;
    }
  }

  std::vector<typename SparseMatrix<T>::Row> rows(n + 1);
  for (std::size_t x = 0; x < n; ++x) {
    auto& row = rows[x];
    T mass = green.absorbing[x] ? initial[x] : green.visits[x];
    if (mass == T(0)) {
      if (!green.absorbing[x]) {
        throw UnreachableStateError("state " + std::to_string(x) + " has zero expected visits");
      }
      row.push_back(Entry<T>{x, T(1)});
      continue;
    }
    for (const auto& e : columns.row(x)) {
      if (green.absorbing[e.column]) continue;
      row.push_back(Entry<T>{e.column, green.visits[e.column] * e.value / mass});
    }
    if (x == green.source && !green.absorbing[x]) row.push_back(Entry<T>{cemetery, T(1) / mass});
    if constexpr (!is_exact_v<T>) {
      // Solver rounding leaves the row sum within ~1e-13 of one; renormalize.
      T total(0);
      for (const auto& e : row) total += e.value;
      for (auto& e : row) e.value /= total;
    }
  }
  rows[cemetery].push_back(Entry<T>{cemetery, T(1)});
  return ReversedChain<T>{StochasticKernel<T>(SparseMatrix<T>::from_rows(std::move(rows), n + 1)),
                          std::move(initial), cemetery};
}

// Mean one-step displacement in lattice units: layer steps (multiples of
// cos alpha) and transverse steps (multiples of sin alpha). Moves to states
// outside the site space are ignored.
template <class T>
struct Displacement {
  T layer{0};
  T transverse{0};
};

template <class T>
Displacement<T> mean_displacement(const StochasticKernel<T>& kernel, const SiteSpace& space, Site from) {
  Displacement<T> d;
  for (const auto& e : kernel.row(space.index(from))) {
    if (e.column >= space.size()) continue;
    const Site to = space.site(e.column);
    d.layer += e.value * T(to.layer - from.layer);
    d.transverse += e.value * T(to.transverse - from.transverse);
  }
  return d;
}

// Reflection of a displacement across the inward normal of the upper (or lower)
// boundary line of the wedge, in lattice units.
template <class T>
Displacement<T> mirror_about_normal(const Displacement<T>& d, const T& sin2, bool upper) {
  const T cos2 = T(1) - sin2;
  if (upper) {
    const T diff = d.layer - d.transverse;
    return {2 * diff * sin2 - d.layer, -2 * diff * cos2 - d.transverse};
  }
  const T sum = d.layer + d.transverse;
  return {2 * sum * sin2 - d.layer, 2 * sum * cos2 - d.transverse};
}

// Largest deviation of the reversed kernel from the inner-site table: vertical
// cos^2/2 each way, toward the apex sin^2/2 (N-k+1)/(N-k), outward sin^2/2 (N-k-1)/(N-k).
template <class T>
T reversed_table_residual(const ReversedChain<T>& reversed, const SiteSpace& space, const WedgeSpec& spec,
                          int absorb_at) {
  const T half_sin2 = param_as<T>(spec.alpha.sin_squared()) / 2;
  const T half_cos2 = param_as<T>(spec.alpha.cos_squared()) / 2;
  T worst(0);
  auto check = [&](std::size_t from, Site to, const T& expected) {
    const T diff = abs_value(reversed.kernel.probability(from, space.index(to)) - expected);
    if (diff > worst) worst = diff;
  };
  for (int k = 1; k < absorb_at; ++k) {
    const T gap = T(absorb_at - k);
    for (int y = -k + 1; y <= k - 1; ++y) {
      const std::size_t from = space.index({k, y});
      check(from, {k, y + 1}, half_cos2);
      check(from, {k, y - 1}, half_cos2);
      check(from, {k - 1, y}, half_sin2 * (gap + 1) / gap);
      check(from, {k + 1, y}, half_sin2 * (gap - 1) / gap);
    }
  }
  return worst;
}

template <class T>
struct ReversalAudit {
  std::size_t paths = 0;
  std::size_t mismatches = 0;
  T max_defect{0};
  T forward_mass{0};  // total forward probability of the enumerated paths
};

// Enumerates every path from the source to its first absorption with at most
// max_length steps and compares P_forward(w) with
// initial(x_n) p^(x_n, x_{n-1}) ... p^(x_1, x_0) p^(x_0, cemetery).
template <class T>
ReversalAudit<T> audit_path_reversal(const StochasticKernel<T>& kernel, const ReversedChain<T>& reversed,
                                     const GreenVector<T>& green, int max_length) {
  ReversalAudit<T> audit;
  std::vector<std::size_t> path{green.source};
  std::function<void(const T&)> extend = [&](const T& forward) {
    const std::size_t here = path.back();
    if (green.absorbing[here]) {
      T backward = reversed.initial[here];
      for (std::size_t i = path.size() - 1; i > 0; --i) {
        backward *= reversed.kernel.probability(path[i], path[i - 1]);
      }
      backward *= reversed.kernel.probability(path.front(), reversed.cemetery);
      const T defect = abs_value(forward - backward);
      ++audit.paths;
      audit.forward_mass += forward;
      if (defect != T(0)) ++audit.mismatches;
      if (defect > audit.max_defect) audit.max_defect = defect;
      return;
    }
    if (static_cast<int>(path.size()) - 1 >= max_length) return;
    for (const auto& e : kernel.row(here)) {
      path.push_back(e.column);
      extend(forward * e.value);
      path.pop_back();
    }
  };
  extend(T(1));
  return audit;
}

}  // namespace wedgewalk
