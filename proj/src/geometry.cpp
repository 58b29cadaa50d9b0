#include "wedgewalk/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/interpolators/pchip.hpp>

namespace wedgewalk {

namespace {

constexpr double kRootTolerance = 1e-12;
constexpr double kLevelTolerance = 1e-10;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Angle Angle::from_radians(double radians) { return Angle{radians, std::nullopt}; }

Angle Angle::parse(std::string_view text) {
  using std::numbers::pi;
  if (text == "pi/6") return Angle{pi / 6, Ratio{1, 4}};
  if (text == "pi/4") return Angle{pi / 4, Ratio{1, 2}};
  if (text == "pi/3") return Angle{pi / 3, Ratio{3, 4}};

  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DomainError("cannot parse angle '" + std::string(text) +
                      "' (expected radians or one of pi/6, pi/4, pi/3)");
  }
  return from_radians(value);
}

Param Angle::sin_squared() const {
  if (sin2) return Param{sin2->value(), sin2};
  const double s = std::sin(radians);
  return Param::real(s * s);
}

Param Angle::cos_squared() const {
  if (sin2) {
    Ratio c{sin2->den - sin2->num, sin2->den};
    return Param{c.value(), c};
  }
  const double c = std::cos(radians);
  return Param::real(c * c);
}

std::string Angle::label() const {
  if (sin2) {
    if (sin2->num == 1 && sin2->den == 4) return "pi/6";
    if (sin2->num == 1 && sin2->den == 2) return "pi/4";
    if (sin2->num == 3 && sin2->den == 4) return "pi/3";
  }
  return format_double(radians);
}

WedgeSpec WedgeSpec::make(Angle alpha, int layers, std::optional<Param> apex_hold) {
  WedgeSpec spec{alpha, layers, Param::real(0.0)};
  if (apex_hold) {
    spec.apex_hold = *apex_hold;
  } else {
    const Param cos2 = alpha.cos_squared();
    if (cos2.exact) {
      // min(1/3, cos^2/2) compared exactly
      const Rational half_cos2 = cos2.exact->exact() / 2;
      if (half_cos2 >= Rational(1, 3)) {
        spec.apex_hold = Param::ratio(1, 3);
      } else {
        spec.apex_hold = Param::ratio(cos2.exact->num, 2 * cos2.exact->den);
      }
    } else {
      spec.apex_hold = Param::real(std::min(1.0 / 3.0, cos2.value / 2.0));
    }
  }
  spec.validate();
  return spec;
}

void WedgeSpec::validate() const {
  if (!(alpha.radians > 0.0 && alpha.radians < std::numbers::pi / 2)) {
    throw DomainError("wedge angle must lie in (0, pi/2), got " + format_double(alpha.radians));
  }
  if (layers < 2) {
    throw DomainError("wedge needs at least 2 layers, got " + std::to_string(layers));
  }
  const bool ok = apex_hold.exact
                      ? (apex_hold.exact->exact() > 0 && 3 * apex_hold.exact->exact() <= 1)
                      : (apex_hold.value > 0.0 && 3.0 * apex_hold.value <= 1.0);
  if (!ok) {
    throw DomainError("apex hold r must satisfy 0 < 3r <= 1, got " + format_double(apex_hold.value));
  }
}

SiteSpace::SiteSpace(int layers) : layers_(layers) {
  if (layers < 0) throw DomainError("negative layer count");
}

std::size_t SiteSpace::index(Site s) const {
  if (!contains(s)) {
    throw DomainError("site (" + std::to_string(s.layer) + ", " + std::to_string(s.transverse) +
                      ") outside the site space");
  }
  return fiber_begin(s.layer) + static_cast<std::size_t>(s.transverse + s.layer);
}

Site SiteSpace::site(std::size_t index) const {
  if (index >= size()) throw DomainError("site index out of range");
  auto k = static_cast<int>(std::sqrt(static_cast<double>(index)));
  while (fiber_begin(k) > index) --k;
  while (fiber_begin(k + 1) <= index) ++k;
  return Site{k, static_cast<int>(index - fiber_begin(k)) - k};
}

SiteKind SiteSpace::kind(Site s) {
  if (s.layer == 0) return SiteKind::apex;
  if (s.transverse == s.layer) return SiteKind::upper_boundary;
  if (s.transverse == -s.layer) return SiteKind::lower_boundary;
  return SiteKind::inner;
}

WedgeLattice::WedgeLattice(WedgeSpec spec) : spec_(std::move(spec)), space_(spec_.layers) {
  spec_.validate();
}

std::complex<double> WedgeLattice::position(Site s) const {
  if (!space_.contains(s)) throw DomainError("site outside the wedge lattice");
  return {s.layer * std::cos(spec_.alpha.radians), s.transverse * std::sin(spec_.alpha.radians)};
}

WedgeLattice build_wedge_lattice(const WedgeSpec& spec) { return WedgeLattice(spec); }

ShapeFunction::ShapeFunction(Fn h, Fn h_prime, std::optional<double> domain_hint,
                             std::string description)
    : h_(std::move(h)),
      h_prime_(std::move(h_prime)),
      domain_hint_(domain_hint),
      description_(std::move(description)) {}

ShapeFunction ShapeFunction::linear(double slope) {
  if (!(slope > 0.0)) throw DomainError("linear shape needs a positive slope");
  return ShapeFunction([slope](double x) { return slope * x; }, [slope](double) { return slope; },
                       std::nullopt, "linear(" + format_double(slope) + ")");
}

ShapeFunction ShapeFunction::power(double exponent) {
  if (!(exponent > 0.0)) throw DomainError("power shape needs a positive exponent");
  return ShapeFunction([exponent](double x) { return std::pow(x, exponent); },
                       [exponent](double x) { return exponent * std::pow(x, exponent - 1.0); },
                       std::nullopt, "power(" + format_double(exponent) + ")");
}

ShapeFunction ShapeFunction::tabulated(std::vector<double> xs, std::vector<double> hs) {
  if (xs.size() != hs.size() || xs.size() < 4) {
    throw DomainError("tabulated shape needs at least 4 matching (x, h) pairs");
  }
  if (xs.front() != 0.0 || hs.front() != 0.0) {
    throw DomainError("tabulated shape must start at (0, 0)");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1]) || !(hs[i] > hs[i - 1])) {
      throw DomainError("tabulated shape must be strictly increasing in x and h");
    }
  }
  const double upper = xs.back();
  const std::size_t count = xs.size();
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  auto interp = std::make_shared<Pchip>(std::move(xs), std::move(hs));
  auto check = [upper](double x) {
    if (x < 0.0 || x > upper) throw DomainError("tabulated shape evaluated outside its table");
  };
  return ShapeFunction(
      [interp, check](double x) {
        check(x);
        return (*interp)(x);
      },
      [interp, check](double x) {
        check(x);
        return interp->prime(x);
      },
      upper, "tabulated(" + std::to_string(count) + " points)");
}

double ShapeFunction::inverse(double level) const {
  if (level < 0.0) throw DomainError("negative shape level");
  if (level == 0.0) return 0.0;

  double hi = domain_hint_ ? std::min(1.0, *domain_hint_) : 1.0;
  while (h_(hi) < level) {
    if (domain_hint_ && hi >= *domain_hint_) {
      throw DomainError("shape level " + format_double(level) + " is not reached on [0, " +
                        format_double(*domain_hint_) + "]");
    }
    hi *= 2.0;
    if (domain_hint_) hi = std::min(hi, *domain_hint_);
    if (hi > 1e15) throw DomainError("shape level " + format_double(level) + " is unreachable");
  }
  double lo = 0.0;
  while (hi - lo > kRootTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h_(mid) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void ShapeFunction::validate(double upto) const {
  if (!(upto > 0.0)) throw DomainError("shape validation range must be positive");
  if (std::abs(h_(0.0)) > 0.0) throw DomainError("shape must satisfy h(0) = 0");

  constexpr int samples = 256;
  double previous = 0.0;
  for (int j = 1; j <= samples; ++j) {
    const double x = upto * j / samples;
    const double value = h_(x);
    if (!(value > previous)) {
      throw DomainError(description_ + " is not strictly increasing near x = " + format_double(x));
    }
    previous = value;

    // Central differences stay inside the domain; skip the last sample on bounded tables.
    if (j == samples && domain_hint_) continue;
    const double step = 1e-7 * x;
    const double fd = (h_(x + step) - h_(x - step)) / (2.0 * step);
    const double exact = h_prime_(x);
    if (std::abs(fd - exact) > 1e-6 * std::max(std::abs(exact), 1e-12)) {
      throw DomainError(description_ + ": h' disagrees with finite differences at x = " +
                        format_double(x));
    }
  }
}

VaseGrid::VaseGrid(int resolution, int layers, std::vector<double> abscissas)
    : resolution_(resolution), layers_(layers), abscissas_(std::move(abscissas)), space_(layers) {
  if (resolution < 1 || layers < 1) throw DomainError("vase grid needs N >= 1 and K >= 1");
  if (abscissas_.size() != static_cast<std::size_t>(layers) + 1) {
    throw ShapeError("vase grid expects K + 1 abscissas");
  }
  const double spacing = 1.0 / resolution;
  angles_.reserve(layers);
  cot_.reserve(layers);
  for (int k = 0; k < layers; ++k) {
    const double dx = abscissas_[k + 1] - abscissas_[k];
    if (!(dx > 0.0) || !std::isfinite(dx)) {
      throw DomainError("vase abscissas must be strictly increasing (k = " + std::to_string(k) + ")");
    }
    angles_.push_back(std::atan2(spacing, dx));
    cot_.push_back(resolution * dx);
  }
}

std::complex<double> VaseGrid::position(Site s) const {
  if (!space_.contains(s)) throw DomainError("site outside the vase grid");
  return {abscissas_[s.layer], static_cast<double>(s.transverse) / resolution_};
}

VaseGrid build_vase_grid(const ShapeFunction& shape, int resolution, int layers) {
  if (resolution < 1 || layers < 1) throw DomainError("vase grid needs N >= 1 and K >= 1");
  std::vector<double> xs(static_cast<std::size_t>(layers) + 1, 0.0);
  for (int k = 1; k <= layers; ++k) {
    const double level = static_cast<double>(k) / resolution;
    xs[k] = shape.inverse(level);
    if (std::abs(shape(xs[k]) - level) > kLevelTolerance) {
      throw DomainError("root finder could not reproduce h(x_k) = k/N at k = " + std::to_string(k));
    }
  }
  shape.validate(xs.back());
  return VaseGrid(resolution, layers, std::move(xs));
}

}  // namespace wedgewalk
