#include "wedgewalk/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wedgewalk/errors.hpp"
#include "wedgewalk/kernels.hpp"

namespace wedgewalk {

namespace {

void require_unit(double s, const char* what) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1], got " + std::to_string(s));
}

void require_open_unit(double a, const char* what) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError(std::string(what) + " must lie in (0, 1), got " + std::to_string(a));
}

}  // namespace

double Quadrature::integrate(const std::function<double(double)>& f, double lo, double hi) const {
  if (lo == hi) return 0.0;
  double error = 0.0;
  // Below ~1e-13 the summed Kronrod estimates are dominated by roundoff.
  const double relative = std::max(0.1 * tolerance, 1e-13);
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, max_depth, relative, &error);
  if (!std::isfinite(value) || error > tolerance) {
    throw QuadratureError("quadrature error estimate " + std::to_string(error) + " exceeds tolerance " +
                          std::to_string(tolerance) + " on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return value;
}

double Quadrature::integrate_power_left(const std::function<double(double)>& g, double b, double s) const {
  if (!(b > 0.0)) throw DomainError("power substitution needs b > 0");
  if (s == 0.0) return 0.0;
  // b = p/q with a small denominator: t = v^q turns t^(b-1) dt into q v^(p-1) dv.
  for (int q = 1; q <= 12; ++q) {
    const double p = b * q;
    if (std::abs(p - std::round(p)) > 1e-12) continue;
    const int pi = static_cast<int>(std::round(p));
    return integrate(
        [&](double v) { return q * std::pow(v, pi - 1) * g(std::pow(v, q)); }, 0.0, std::pow(s, 1.0 / q));
  }
  // Otherwise peel off the integer part of b - 1 and substitute t = v^(1/f) on the rest.
  const double whole = std::ceil(b) - 1.0;
  const double f = b - whole;
  const double inv = 1.0 / f;
  return integrate(
      [&](double v) {
        const double t = std::pow(v, inv);
        return inv * std::pow(t, whole) * g(t);
      },
      0.0, std::pow(s, f));
}

double beta_function(double p, double q) {
  return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

double incomplete_beta_quad(double s, double p, double q, double tolerance) {
  require_unit(s, "incomplete beta argument");
  if (!(p > 0.0 && p <= 1.0 && q > 0.0 && q <= 1.0)) throw DomainError("incomplete beta needs 0 < p, q <= 1");
  const Quadrature quad{tolerance};
  // int_0^m t^(p-1) (1-t)^(q-1) dt and its mirror, each with the singular end at 0.
  auto left = [&](double m) {
    return quad.integrate_power_left([&](double t) { return std::pow(1.0 - t, q - 1.0); }, p, m);
  };
  auto right = [&](double m) {
    return quad.integrate_power_left([&](double t) { return std::pow(1.0 - t, p - 1.0); }, q, m);
  };
  const double total = beta_function(p, q);
  if (s <= 0.5) return left(s) / total;
  // int_0^s = int_0^(1/2) + int_(1-s)^(1/2) of the mirrored integrand.
  return (left(0.5) + right(0.5) - right(1.0 - s)) / total;
}

double watts_closed(double s) {
  require_unit(s, "watts_closed argument");
  if (s > 0.5) return 1.0 - incomplete_beta_quad(1.0 - s, 2.0 / 3.0, 2.0 / 3.0);
  return incomplete_beta_quad(s, 2.0 / 3.0, 2.0 / 3.0);
}

double hyp2f1_euler(double a, double b, double c, double z) {
  if (!(c > b && b > 0.0)) throw DomainError("Euler integral needs c > b > 0");
  if (!(z < 1.0)) throw DomainError("Euler integral needs z < 1");
  const double e = c - b;
  const Quadrature quad{1e-11};
  // Split at 1/2: near 0 the factor t^(b-1), near 1 the factor (1-t)^(e-1).
  auto integrand_tail = [&](double w) {  // w = 1 - t
    return std::pow(1.0 - w, b - 1.0) * std::pow(1.0 - z * (1.0 - w), -a);
  };
  const double near_one = quad.integrate_power_left(integrand_tail, e, 0.5);
  auto integrand_head = [&](double t) { return std::pow(1.0 - t, e - 1.0) * std::pow(1.0 - z * t, -a); };
  const double near_zero = quad.integrate_power_left(integrand_head, b, 0.5);
  const double norm = std::exp(std::lgamma(c) - std::lgamma(b) - std::lgamma(e));
  return norm * (near_zero + near_one);
}

double watts_via_hypergeometric(double a) {
  require_open_unit(a, "watts_via_hypergeometric argument");
  if (a > 0.9) return 1.0 - watts_via_hypergeometric(1.0 - a);
  const double g = std::tgamma(2.0 / 3.0);
  const double prefactor = std::numbers::pi * std::numbers::sqrt3 / (3.0 * g * g * g);
  return prefactor * std::pow(a * (1.0 - a), 2.0 / 3.0) * hyp2f1_euler(4.0 / 3.0, 1.0, 5.0 / 3.0, a);
}

double sc_map(double a) {
  require_unit(a, "sc_map argument");
  if (a > 0.5) return 1.0 - incomplete_beta_quad(1.0 - a, 1.0 / 3.0, 1.0 / 3.0);
  return incomplete_beta_quad(a, 1.0 / 3.0, 1.0 / 3.0);
}

double sc_deriv(double a) {
  require_open_unit(a, "sc_deriv argument");
  return std::pow(a * (1.0 - a), -2.0 / 3.0) / beta_function(1.0 / 3.0, 1.0 / 3.0);
}

double sc_inverse(double x) {
  require_unit(x, "sc_inverse argument");
  if (x == 0.0 || x == 1.0) return x;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (sc_map(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double watts_via_integral(double a) {
  require_open_unit(a, "watts_via_integral argument");
  const Quadrature quad{1e-12};
  // The head peaks at 3 / (1 - a); its error is scaled down again by 1 / F'(a).
  const Quadrature peaked{1e-12 / (1.0 - a)};
  // u = 1 + v^3 on [1, 2]; then v = 1/w on the tail.
  const double head = peaked.integrate(
      [&](double v) {
        const double u = 1.0 + v * v * v;
        return 3.0 * std::pow(u, -2.0 / 3.0) / (u - a);
      },
      0.0, 1.0);
  const double tail = quad.integrate(
      [&](double w) {
        const double w3 = w * w * w;
        return 3.0 * w3 * std::pow(w3 + 1.0, -2.0 / 3.0) / (1.0 + (1.0 - a) * w3);
      },
      0.0, 1.0);
  const double constant = std::numbers::sqrt3 / (2.0 * std::numbers::pi * beta_function(1.0 / 3.0, 1.0 / 3.0));
  return constant * (head + tail) / sc_deriv(a);
}

double watts_composed(double x) { return watts_closed(sc_inverse(x)); }

double bessel3_hit(double x, double a, double b) {
  if (!(a > 0.0 && a <= x && x <= b && a < b)) {
    throw DomainError("bessel3_hit needs 0 < a <= x <= b with a < b");
  }
  return (1.0 / x - 1.0 / b) / (1.0 / a - 1.0 / b);
}

double scale_function(const ShapeFunction& shape, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("scale function needs x > 0");
  if (x == 1.0) return 0.0;
  const double lo = std::min(1.0, x);
  const double hi = std::max(1.0, x);
  for (int i = 0; i <= 64; ++i) {
    const double u = lo + (hi - lo) * i / 64.0;
    if (!(shape(u) > 0.0)) {
      throw DomainError("scale function diverges: h(" + std::to_string(u) + ") = " + std::to_string(shape(u)));
    }
  }
  const Quadrature quad{1e-10};
  const double value = quad.integrate(
      [&](double u) {
        const double h = shape(u);
        return 1.0 / (h * h);
      },
      lo, hi);
  return x > 1.0 ? value : -value;
}

double generator_residual(const ShapeFunction& shape, const TestFunction& test, double x, int resolution) {
  if (resolution < 2) throw DomainError("generator residual needs N >= 2");
  if (!(x > 0.0)) throw DomainError("generator residual needs x > 0");
  const int k = static_cast<int>(std::lround(resolution * shape(x)));
  if (k < 2) throw DomainError("x = " + std::to_string(x) + " is too close to the apex for N = " + std::to_string(resolution));

  VaseGrid grid = [&] {
    try {
      return build_vase_grid(shape, resolution, k + 1);
    } catch (const DomainError& e) {
      throw DomainError(std::string("grid around x does not exist: ") + e.what());
    }
  }();
  const auto& xs = grid.abscissas();
  const LayerRates rates = vase_layer_rates(grid, k);
  const double width = 2.0 * k + 1.0;
  const double up = (2.0 * k + 3.0) / width * rates.outward;
  const double down = (2.0 * k - 1.0) / width * rates.inward;
  const double xk = xs[k];
  const double fk = test.f(xk);
  const double discrete = static_cast<double>(resolution) * resolution *
                          (up * (test.f(xs[k + 1]) - fk) + down * (test.f(xs[k - 1]) - fk));
  const double limit = shape.derivative(xk) / shape(xk) * test.df(xk) + 0.5 * test.d2f(xk);
  return std::abs(discrete - limit);
}

}  // namespace wedgewalk
