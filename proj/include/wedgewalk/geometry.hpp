#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wedgewalk/scalar.hpp"

namespace wedgewalk {

// Opening half-angle of the wedge. The tokens pi/6, pi/4 and pi/3 carry exact
// rational sin^2 so kernels built from them can run in rational mode.
struct Angle {
  double radians = 0.0;
  std::optional<Ratio> sin2;

  static Angle from_radians(double radians);
  // Accepts "pi/6", "pi/4", "pi/3" or a literal number of radians.
  static Angle parse(std::string_view text);

  Param sin_squared() const;
  Param cos_squared() const;
  std::string label() const;
};

struct WedgeSpec {
  Angle alpha;
  int layers = 0;   // truncation layer N
  Param apex_hold;  // r: probability of each of the three apex moves

  // apex_hold defaults to min(1/3, cos^2(alpha)/2).
  static WedgeSpec make(Angle alpha, int layers, std::optional<Param> apex_hold = std::nullopt);
  void validate() const;
};

struct Site {
  int layer = 0;
  int transverse = 0;

  friend auto operator<=>(const Site&, const Site&) = default;
};

enum class SiteKind { apex, inner, upper_boundary, lower_boundary };

// Sites (k, y) with 0 <= k <= layers and |y| <= k. Layer k occupies the
// contiguous index range [k^2, (k+1)^2), ordered by increasing y.
class SiteSpace {
 public:
  SiteSpace() = default;
  explicit SiteSpace(int layers);

  int layers() const { return layers_; }
  std::size_t size() const { return static_cast<std::size_t>(layers_ + 1) * (layers_ + 1); }

  bool contains(Site s) const {
    return s.layer >= 0 && s.layer <= layers_ && s.transverse >= -s.layer && s.transverse <= s.layer;
  }
  std::size_t index(Site s) const;
  Site site(std::size_t index) const;

  static std::size_t fiber_begin(int layer) { return static_cast<std::size_t>(layer) * layer; }
  static std::size_t fiber_size(int layer) { return 2 * static_cast<std::size_t>(layer) + 1; }

  static SiteKind kind(Site s);

 private:
  int layers_ = 0;
};

class WedgeLattice {
 public:
  explicit WedgeLattice(WedgeSpec spec);

  const WedgeSpec& spec() const { return spec_; }
  const SiteSpace& space() const { return space_; }
  std::size_t size() const { return space_.size(); }

  // k cos(alpha) + i y sin(alpha)
  std::complex<double> position(Site s) const;

 private:
  WedgeSpec spec_;
  SiteSpace space_;
};

WedgeLattice build_wedge_lattice(const WedgeSpec& spec);

// Vase profile h with h(0) = 0, h > 0 and strictly increasing on (0, domain_hint].
class ShapeFunction {
 public:
  using Fn = std::function<double(double)>;

  ShapeFunction(Fn h, Fn h_prime, std::optional<double> domain_hint, std::string description);

  static ShapeFunction linear(double slope);
  static ShapeFunction power(double exponent);
  // Monotone cubic (PCHIP) through the table; requires xs[0] = 0, hs[0] = 0.
  static ShapeFunction tabulated(std::vector<double> xs, std::vector<double> hs);

  double operator()(double x) const { return h_(x); }
  double derivative(double x) const { return h_prime_(x); }
  const std::optional<double>& domain_hint() const { return domain_hint_; }
  const std::string& description() const { return description_; }

  // Solves h(x) = level by expanding a bracket from [0, 1] and bisecting to 1e-12.
  double inverse(double level) const;

  // Checks h(0) = 0, positivity and monotonicity on a sample grid, and that
  // h' agrees with central differences to 1e-6 relative.
  void validate(double upto) const;

 private:
  Fn h_;
  Fn h_prime_;
  std::optional<double> domain_hint_;
  std::string description_;
};

class VaseGrid {
 public:
  VaseGrid(int resolution, int layers, std::vector<double> abscissas);

  int resolution() const { return resolution_; }
  int layers() const { return layers_; }
  const SiteSpace& space() const { return space_; }
  std::size_t size() const { return space_.size(); }

  // x_0 .. x_K
  const std::vector<double>& abscissas() const { return abscissas_; }
  // alpha_0 .. alpha_{K-1}, tan(alpha_k) = (1/N) / (x_{k+1} - x_k)
  const std::vector<double>& angles() const { return angles_; }
  // cot(alpha_k) = N (x_{k+1} - x_k), kept separately to avoid a tan/atan round trip.
  double cot(int k) const { return cot_.at(static_cast<std::size_t>(k)); }

  // x_k + i y / N
  std::complex<double> position(Site s) const;

 private:
  int resolution_;
  int layers_;
  std::vector<double> abscissas_;
  std::vector<double> angles_;
  std::vector<double> cot_;
  SiteSpace space_;
};

VaseGrid build_vase_grid(const ShapeFunction& shape, int resolution, int layers);

}  // namespace wedgewalk
