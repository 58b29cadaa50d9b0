#include <cmath>
#include <sstream>

#include "doctest.h"
#include "wedgewalk/green.hpp"
#include "wedgewalk/intertwining.hpp"

using namespace wedgewalk;

namespace {

// Expected visits by summing mu_n = e_source P_TT^n until the surviving mass is negligible.
std::vector<double> green_by_path_sums(const StochasticKernel<double>& p, std::size_t source,
                                       const std::vector<bool>& absorbing, double tail) {
  std::vector<double> mu(p.size(), 0.0), next(p.size()), g(p.size(), 0.0);
  mu[source] = 1.0;
  for (int n = 0; n < 10'000'000; ++n) {
    double mass = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      g[i] += mu[i];
      mass += mu[i];
    }
    if (mass < tail) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (mu[i] == 0.0) continue;
      for (const auto& e : p.row(i)) {
        if (!absorbing[e.column]) next[e.column] += mu[i] * e.value;
      }
    }
    mu.swap(next);
  }
  return g;
}

}  // namespace

TEST_CASE("1-D Green vector against path sums") {
  const auto spec = WedgeSpec::make(Angle::parse("pi/4"), 2, Param::ratio(1, 8));
  const auto q = projected_wedge_chain<double>(spec);
  const auto mask = absorbing_from(q.size(), 2);
  const auto g = green_vector(q, 0, mask);
  const auto oracle = green_by_path_sums(q, 0, mask, 1e-14);
  CHECK(g.visits[1] == doctest::Approx(oracle[1]).epsilon(1e-11));
  CHECK(g.visits[0] == doctest::Approx(oracle[0]).epsilon(1e-11));
  CHECK(g.visits[2] == 0.0);

  const auto exact = green_vector(projected_wedge_chain<Rational>(spec), 0, mask);
  CHECK(std::abs(to_double(exact.visits[1]) - g.visits[1]) <= 1e-12);
  CHECK(exact.visits[2] == Rational(0));
}

TEST_CASE("2-D Green vector factorizes through the link") {
  for (const char* a : {"pi/6", "pi/3"}) {
    const auto spec = WedgeSpec::make(Angle::parse(a), 10);
    const auto lattice = build_wedge_lattice(spec);
    const int m = 10;
    const auto g2 = green_vector(wedge_kernel<double>(lattice, m), 0, absorbing_layers(lattice.space(), m));
    const auto g1 = green_vector(projected_wedge_chain<double>(spec), 0, absorbing_from(m + 1, m));
    CHECK(green_factorization_residual(g2, g1, lattice.space(), m) <= 1e-10);
    for (std::size_t i = SiteSpace::fiber_begin(m); i < lattice.size(); ++i) CHECK(g2.visits[i] == 0.0);
  }
  const auto spec = WedgeSpec::make(Angle::parse("pi/4"), 6);
  const auto lattice = build_wedge_lattice(spec);
  const auto g2 = green_vector(wedge_kernel<Rational>(lattice, 6), 0, absorbing_layers(lattice.space(), 6));
  const auto g1 = green_vector(projected_wedge_chain<Rational>(spec), 0, absorbing_from(7, 6));
  CHECK(green_factorization_residual(g2, g1, lattice.space(), 6) == Rational(0));
}

TEST_CASE("closed-form Green shape") {
  CHECK(green_closed_form_1d<Rational>(2, 1) == Rational(6, 5));
  CHECK(green_closed_form_1d<Rational>(7, 7) == Rational(0));
  CHECK_THROWS_AS(green_closed_form_1d(5, 6), DomainError);

  SUBCASE("float ratio is constant; the constant is 1/sin^2") {
    const Angle alpha = Angle::parse("pi/6");
    const auto spec = WedgeSpec::make(alpha, 50);
    const auto g = green_vector(projected_wedge_chain<double>(spec), 0, absorbing_from(51, 50));
    const auto fit = fit_green_shape(g, 50, alpha);
    CHECK(fit.relative_variation <= 1e-10);
    CHECK(fit.constant == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(fit.matching_prefactor == "1/sin^2");
  }
  SUBCASE("exact: g(y) = closed(y)/sin^2 and g(0) = N/(r(2N+1))") {
    for (const char* a : {"pi/6", "pi/4", "pi/3"}) {
      const auto spec = WedgeSpec::make(Angle::parse(a), 20);
      const auto g = green_vector(projected_wedge_chain<Rational>(spec), 0, absorbing_from(21, 20));
      const Rational s2 = param_as<Rational>(spec.alpha.sin_squared());
      for (int y = 1; y < 20; ++y) CHECK(g.visits[y] == green_closed_form_1d<Rational>(20, y) / s2);
      CHECK(g.visits[0] == Rational(20) / (param_as<Rational>(spec.apex_hold) * 41));
    }
  }
}

TEST_CASE("Green solver errors") {
  using Row = SparseMatrix<double>::Row;
  SUBCASE("absorption unreachable") {
    std::vector<Row> rows{{{1, 1.0}}, {{0, 1.0}}, {{2, 1.0}}};
    const StochasticKernel<double> p(SparseMatrix<double>::from_rows(rows, 3));
    CHECK_THROWS_AS(green_vector(p, 0, absorbing_from(3, 2)), SolverError);
  }
  SUBCASE("no absorbing state") {
    std::vector<Row> rows{{{1, 1.0}}, {{0, 1.0}}};
    const StochasticKernel<double> p(SparseMatrix<double>::from_rows(rows, 2));
    CHECK_THROWS_AS(green_vector(p, 0, std::vector<bool>(2, false)), SolverError);
  }
  SUBCASE("exact mode size limit") {
    const auto spec = WedgeSpec::make(Angle::parse("pi/4"), 25);
    const auto lattice = build_wedge_lattice(spec);
    CHECK_THROWS_AS(green_vector(wedge_kernel<Rational>(lattice, 25), 0, absorbing_layers(lattice.space(), 25)),
                    SolverError);
  }
  SUBCASE("unreachable transient state in the reversal") {
    std::vector<Row> rows{{{2, 1.0}}, {{2, 1.0}}, {{2, 1.0}}};
    const StochasticKernel<double> p(SparseMatrix<double>::from_rows(rows, 3));
    const auto g = green_vector(p, 0, absorbing_from(3, 2));
    CHECK(g.visits[1] == 0.0);
    CHECK_THROWS_AS(nagasawa_reverse(p, g), UnreachableStateError);
  }
}

TEST_CASE("Nagasawa reversal of the wedge walk") {
  const int n = 8;
  for (const char* a : {"pi/6", "pi/4", "pi/3"}) {
    const auto spec = WedgeSpec::make(Angle::parse(a), n);
    const auto lattice = build_wedge_lattice(spec);
    const auto& space = lattice.space();
    const auto p = wedge_kernel<Rational>(lattice, n);
    const auto g = green_vector(p, 0, absorbing_layers(space, n));
    const auto rev = nagasawa_reverse(p, g);

    CHECK(reversed_table_residual(rev, space, spec, n) == Rational(0));
    for (std::size_t i = 0; i < rev.kernel.size(); ++i) CHECK(rev.kernel.matrix().row_sum(i) == Rational(1));
    CHECK(rev.kernel.probability(0, rev.cemetery) == 1 / g.visits[0]);

    // initial law: uniform on layer n
    for (int y = -n; y <= n; ++y) CHECK(rev.initial[space.index({n, y})] == Rational(1, 2 * n + 1));

    // boundary rows: the reversed drift is the mirrored forward drift, up to the (N-k) corrections
    const Rational s2 = param_as<Rational>(spec.alpha.sin_squared());
    for (int k = 1; k < n; ++k) {
      for (bool upper : {true, false}) {
        const Site site{k, upper ? k : -k};
        const auto forward = mean_displacement(p, space, site);
        const auto reversed = mean_displacement(rev.kernel, space, site);
        const auto mirrored = mirror_about_normal(forward, s2, upper);
        const Rational gap(n - k);
        CHECK(reversed.layer - mirrored.layer == -s2 / gap);
        CHECK(reversed.transverse - mirrored.transverse == (upper ? -s2 : s2) / (2 * gap));
      }
    }
  }
}

TEST_CASE("mirror about the boundary normal") {
  // forward upper drift (s, (s - c)/2) mirrors to (0, -1/2)
  const Rational s2(1, 4);
  const Displacement<Rational> forward{s2, (s2 - (1 - s2)) / 2};
  const auto m = mirror_about_normal(forward, s2, true);
  CHECK(m.layer == Rational(0));
  CHECK(m.transverse == Rational(-1, 2));
  // an involution
  const auto back = mirror_about_normal(m, s2, true);
  CHECK(back.layer == forward.layer);
  CHECK(back.transverse == forward.transverse);
  const auto low = mirror_about_normal(mirror_about_normal(forward, s2, false), s2, false);
  CHECK(low.layer == forward.layer);
}

TEST_CASE("reversed ratios approach the forward kernel as N grows") {
  double previous = 1.0;
  for (int n : {10, 40, 160}) {
    const auto spec = WedgeSpec::make(Angle::parse("pi/4"), n);
    const auto lattice = build_wedge_lattice(spec);
    const auto& space = lattice.space();
    const auto p = wedge_kernel<double>(lattice, n);
    const auto rev = nagasawa_reverse(p, green_vector(p, 0, absorbing_layers(space, n)));
    const double ratio = rev.kernel.probability(space.index({5, 0}), space.index({4, 0})) / 0.25;
    CHECK(ratio == doctest::Approx((n - 4.0) / (n - 5.0)).epsilon(1e-11));
    CHECK(ratio - 1.0 < previous);
    previous = ratio - 1.0;
  }
  CHECK(previous < 0.01);
}

TEST_CASE("exact path reversal on a small wedge") {
  const auto spec = WedgeSpec::make(Angle::parse("pi/6"), 3);
  const auto lattice = build_wedge_lattice(spec);
  const auto p = wedge_kernel<Rational>(lattice, 3);
  const auto g = green_vector(p, 0, absorbing_layers(lattice.space(), 3));
  const auto rev = nagasawa_reverse(p, g);
  const auto audit = audit_path_reversal(p, rev, g, 8);
  CHECK(audit.paths > 100);
  CHECK(audit.mismatches == 0);
  CHECK(audit.max_defect == Rational(0));
  CHECK(audit.forward_mass > Rational(0));
  CHECK(audit.forward_mass < Rational(1));
}

TEST_CASE("float reversal rows are stochastic") {
  const auto spec = WedgeSpec::make(Angle::from_radians(0.5), 30);
  const auto lattice = build_wedge_lattice(spec);
  const auto p = wedge_kernel<double>(lattice, 30);
  const auto g = green_vector(p, 0, absorbing_layers(lattice.space(), 30));
  const auto rev = nagasawa_reverse(p, g);
  CHECK(reversed_table_residual(rev, lattice.space(), spec, 30) <= 1e-12);
}

TEST_CASE("Green CSV export") {
  const auto spec = WedgeSpec::make(Angle::parse("pi/4"), 2);
  const auto lattice = build_wedge_lattice(spec);
  const auto g = green_vector(wedge_kernel<Rational>(lattice, 2), 0, absorbing_layers(lattice.space(), 2));
  std::ostringstream os;
  write_green_csv(os, g, lattice.space());
  const std::string text = os.str();
  CHECK(text.rfind("layer,transverse,visits\n", 0) == 0);
  CHECK(text.find("\n2,2,0\n") != std::string::npos);
}
