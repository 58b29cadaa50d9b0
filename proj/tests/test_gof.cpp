#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "wedgewalk/errors.hpp"
#include "wedgewalk/gof.hpp"

using namespace wedgewalk;

TEST_CASE("chi-square of perfectly uniform counts") {
  const auto r = chi_square_uniform(std::vector<std::uint64_t>(10, 100));
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(r.dof == 9);
}

TEST_CASE("chi-square statistic and p-value") {
  const std::vector<std::uint64_t> obs{30, 20, 50};
  const std::vector<double> p{0.25, 0.25, 0.5};
  const auto r = chi_square_gof(obs, p);
  const double stat = (30 - 25.0) * (30 - 25.0) / 25 + (20 - 25.0) * (20 - 25.0) / 25;
  CHECK(r.statistic == doctest::Approx(stat));
  const boost::math::chi_squared dist(2);
  CHECK(r.p_value == doctest::Approx(boost::math::cdf(boost::math::complement(dist, stat))).epsilon(1e-12));
}

TEST_CASE("under-filled bins are merged") {
  const std::vector<std::uint64_t> obs{1, 2, 1, 30, 30, 2};
  const std::vector<double> p{0.02, 0.02, 0.02, 0.45, 0.45, 0.04};
  const auto r = chi_square_gof(obs, p);
  CHECK(r.bins == 6);
  CHECK(r.merged_bins < 6);
  CHECK(r.dof == static_cast<int>(r.merged_bins) - 1);
  CHECK_THROWS_AS(chi_square_gof({1, 1}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(chi_square_gof({1, 1}, {0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(chi_square_gof({1, 1, 1}, {0.5, 0.5}), ShapeError);
}

TEST_CASE("homogeneity") {
  const std::vector<std::uint64_t> a{100, 200, 300}, b{50, 100, 150};
  CHECK(chi_square_homogeneity(a, b).statistic == doctest::Approx(0.0));
  const std::vector<std::uint64_t> c{300, 200, 100};
  CHECK(chi_square_homogeneity(a, c).p_value < 1e-10);
}

TEST_CASE("Kolmogorov distribution") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.358) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(kolmogorov_survival(1.9495) == doctest::Approx(0.001).epsilon(0.01));
  CHECK(ks_critical_value(10000, 0.001) == doctest::Approx(1.9495 / 100).epsilon(1e-3));
}

TEST_CASE("KS distance") {
  const std::size_t n = 1000;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = (i + 0.5) / n;
  CHECK(ks_uniform(grid).distance <= 1.0 / (2 * n) + 1e-15);
  std::vector<double> skewed(grid);
  for (auto& v : skewed) v = v * v;
  CHECK(ks_uniform(skewed).p_value < 1e-6);
  CHECK_THROWS_AS(ks_uniform({}), DomainError);
}

TEST_CASE("p-values of uniform draws are calibrated") {
  std::vector<double> chi_p, ks_p;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> draws(100000);
    std::vector<std::uint64_t> counts(50, 0);
    for (auto& d : draws) {
      d = u(rng);
      ++counts[static_cast<std::size_t>(d * 50)];
    }
    chi_p.push_back(chi_square_uniform(counts).p_value);
    ks_p.push_back(ks_uniform(draws).p_value);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[9] + v[10]);
  };
  CHECK(median(chi_p) > 0.2);
  CHECK(median(chi_p) < 0.8);
  CHECK(median(ks_p) > 0.2);
  CHECK(median(ks_p) < 0.8);
}
