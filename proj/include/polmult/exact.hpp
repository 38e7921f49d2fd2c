#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace polmult::exact {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// n! for 0 <= n <= kMaxFactorial, from a table built once on first use.
const BigInt& factorial(int n);
inline constexpr int kMaxFactorial = 640;

/// Correctly rounded projection of a rational to double.
double to_double(const Rational& r);
/// sqrt(r) projected to double, evaluated in extended precision first.
double sqrt_to_double(const Rational& r);

/// A value of the form coefficient * sqrt(radicand) with both parts rational
/// and radicand >= 0. Values sharing a radicand add exactly.
struct RootRational {
    Rational coefficient{0};
    Rational radicand{1};

    bool is_zero() const { return coefficient == 0 || radicand == 0; }
    int sign() const { return is_zero() ? 0 : (coefficient > 0 ? 1 : -1); }
    /// value^2, exact.
    Rational square() const { return coefficient * coefficient * radicand; }
    double to_double() const;
};

}  // namespace polmult::exact
