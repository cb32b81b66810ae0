// Observables: real-valued functions on a system, with a declared sup bound.
//
// Finite systems carry exact rational values per point and the bound is
// checked exactly at construction. Interval systems carry callables; the
// bound is trusted metadata there. The optional exact callable serves maps
// whose state is kept rational (the doubling map).

#ifndef ERGO_OBSERVABLE_HPP
#define ERGO_OBSERVABLE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergo/rational.hpp"

namespace ergo {

struct FiniteObservable {
  std::vector<Rational> values;
  Rational sup_bound;  // |values[i]| <= sup_bound for every i
};

inline FiniteObservable make_observable(std::vector<Rational> values, Rational sup_bound) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (abs(values[i]) > sup_bound) {
      throw std::invalid_argument("observable: sup_bound below |value| at point " +
                                  std::to_string(i));
    }
  }
  return FiniteObservable{std::move(values), std::move(sup_bound)};
}

/// Tight bound: sup_bound = max |values|.
inline FiniteObservable make_observable(std::vector<Rational> values) {
  Rational bound(0);
  for (const Rational& v : values) {
    const Rational a = abs(v);
    if (a > bound) bound = a;
  }
  return FiniteObservable{std::move(values), std::move(bound)};
}

inline FiniteObservable constant_observable(std::size_t n, const Rational& c) {
  return FiniteObservable{std::vector<Rational>(n, c), abs(c)};
}

inline FiniteObservable negated(const FiniteObservable& f) {
  std::vector<Rational> values;
  values.reserve(f.values.size());
  for (const Rational& v : f.values) values.push_back(-v);
  return FiniteObservable{std::move(values), f.sup_bound};
}

/// Pointwise max(f, 0); the original bound still dominates.
inline FiniteObservable positive_part(const FiniteObservable& f) {
  std::vector<Rational> values;
  values.reserve(f.values.size());
  for (const Rational& v : f.values) values.push_back(positive_part(v));
  return FiniteObservable{std::move(values), f.sup_bound};
}

inline FiniteObservable linear_combination(const Rational& a, const FiniteObservable& f,
                                           const Rational& b, const FiniteObservable& g) {
  if (f.values.size() != g.values.size()) {
    throw std::invalid_argument("linear_combination: size mismatch");
  }
  std::vector<Rational> values;
  values.reserve(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    values.push_back(a * f.values[i] + b * g.values[i]);
  }
  return FiniteObservable{std::move(values), abs(a) * f.sup_bound + abs(b) * g.sup_bound};
}

// ---------------------------------------------------------------------------

struct IntervalObservable {
  std::string name;
  std::function<double(double)> value;
  std::function<Rational(const Rational&)> exact_value;  // empty when unavailable
  double sup_bound = 0.0;
};

/// Built-in observables addressable by name in system-description files:
///   cos2pi               cos(2*pi*x)
///   sin2pi               sin(2*pi*x)
///   coordinate           x
///   indicator_lower_half 1 on [0, 1/2), else 0
///   one                  constant 1
inline IntervalObservable named_observable(const std::string& name) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  if (name == "cos2pi") {
    return {name, [](double x) { return std::cos(two_pi * x); }, nullptr, 1.0};
  }
  if (name == "sin2pi") {
    return {name, [](double x) { return std::sin(two_pi * x); }, nullptr, 1.0};
  }
  if (name == "coordinate") {
    return {name, [](double x) { return x; },
            [](const Rational& x) { return x; }, 1.0};
  }
  if (name == "indicator_lower_half") {
    return {name, [](double x) { return x < 0.5 ? 1.0 : 0.0; },
            [](const Rational& x) { return x < Rational(1, 2) ? Rational(1) : Rational(0); },
            1.0};
  }
  if (name == "one") {
    return {name, [](double) { return 1.0; },
            [](const Rational&) { return Rational(1); }, 1.0};
  }
  throw std::invalid_argument("unknown observable name '" + name + "'");
}

}  // namespace ergo

#endif  // ERGO_OBSERVABLE_HPP
