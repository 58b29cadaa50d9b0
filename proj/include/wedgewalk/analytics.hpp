#pragma once

#include <functional>

#include "wedgewalk/geometry.hpp"

namespace wedgewalk {

// Adaptive Gauss-Kronrod on a finite interval. Integrands with an endpoint
// singularity t^(b-1) are handled by a power substitution first.
struct Quadrature {
  double tolerance = 1e-10;  // absolute, on the returned error estimate
  unsigned max_depth = 18;   // bisection budget of the adaptive scheme

  // Throws QuadratureError when the error estimate exceeds the tolerance.
  double integrate(const std::function<double(double)>& f, double lo, double hi) const;

  // int_0^s t^(b-1) g(t) dt for b > 0. For b = p/q uses t = v^q, which leaves
  // the smooth integrand q v^(p-1) g(v^q).
  double integrate_power_left(const std::function<double(double)>& g, double b, double s) const;
};

double beta_function(double p, double q);

// Regularized incomplete beta I_s(p, q) for 0 < p, q <= 1 by substituted quadrature.
double incomplete_beta_quad(double s, double p, double q, double tolerance = 1e-12);

// I_s(2/3, 2/3).
double watts_closed(double s);

// 2F1(a, b; c; z) for c > b > 0 and z < 1 from the Euler integral
// Gamma(c) / (Gamma(b) Gamma(c - b)) int_0^1 t^(b-1) (1-t)^(c-b-1) (1-zt)^(-a) dt.
double hyp2f1_euler(double a, double b, double c, double z);

// (pi sqrt3 / (3 Gamma(2/3)^3)) (a(1-a))^(2/3) 2F1(1, 4/3; 5/3; a).
double watts_via_hypergeometric(double a);

// Schwarz-Christoffel map of the upper half plane onto the equilateral
// triangle, restricted to the base: F(a) = I_a(1/3, 1/3).
double sc_map(double a);
double sc_deriv(double a);
double sc_inverse(double x);

// F'(a)^(-1) sqrt3 / (2 pi B(1/3,1/3)) int_1^inf du / ((u(u-1))^(2/3) (u - a)).
double watts_via_integral(double a);

// watts_closed(sc_inverse(x)).
double watts_composed(double x);

// (1/x - 1/b) / (1/a - 1/b).
double bessel3_hit(double x, double a, double b);

// phi(x) = int_1^x du / h(u)^2.
double scale_function(const ShapeFunction& shape, double x);

struct TestFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

// |N^2 (Q~ f)(x_k) - ((h'/h) f' + f''/2)(x_k)| at the grid layer k nearest x.
double generator_residual(const ShapeFunction& shape, const TestFunction& test, double x, int resolution);

}  // namespace wedgewalk
