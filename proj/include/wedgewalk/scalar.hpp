#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "wedgewalk/errors.hpp"

namespace wedgewalk {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

// Small exact fraction used to carry parameters such as sin^2(pi/6) = 1/4.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational exact() const { return Rational(num, den); }
};

// A real parameter that may also have an exact rational value.
struct Param {
  double value = 0.0;
  std::optional<Ratio> exact;

  static Param real(double v) { return Param{v, std::nullopt}; }
  static Param ratio(std::int64_t num, std::int64_t den) {
    Ratio r{num, den};
    return Param{r.value(), r};
  }
  bool is_exact() const { return exact.has_value(); }
};

template <class T>
T param_as(const Param& p) {
  if constexpr (is_exact_v<T>) {
    if (!p.exact) {
      throw DomainError("rational mode requested for a parameter without an exact value");
    }
    return p.exact->exact();
  } else {
    return static_cast<T>(p.value);
  }
}

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.convert_to<double>(); }

inline double abs_value(double v) { return std::abs(v); }
inline Rational abs_value(const Rational& v) { return boost::multiprecision::abs(v); }

inline std::string to_string(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string to_string(const Rational& v) { return v.str(); }

}  // namespace wedgewalk
