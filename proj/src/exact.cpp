#include "polmult/exact.hpp"

#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace polmult::exact {

namespace {

using Float = boost::multiprecision::cpp_bin_float_100;

std::vector<BigInt> build_factorials() {
    std::vector<BigInt> table(kMaxFactorial + 1);
    table[0] = 1;
    for (int i = 1; i <= kMaxFactorial; ++i) table[i] = table[i - 1] * i;
    return table;
}

}  // namespace

const BigInt& factorial(int n) {
    static const std::vector<BigInt> table = build_factorials();
    if (n < 0 || n > kMaxFactorial) throw std::out_of_range("factorial argument out of range");
    return table[static_cast<std::size_t>(n)];
}

double to_double(const Rational& r) {
    Float x = Float(boost::multiprecision::numerator(r)) / Float(boost::multiprecision::denominator(r));
    return static_cast<double>(x);
}

double sqrt_to_double(const Rational& r) {
    if (r < 0) throw std::domain_error("sqrt of negative rational");
    Float x = Float(boost::multiprecision::numerator(r)) / Float(boost::multiprecision::denominator(r));
    return static_cast<double>(boost::multiprecision::sqrt(x));
}

double RootRational::to_double() const {
    if (is_zero()) return 0.0;
    Float c = Float(boost::multiprecision::numerator(coefficient)) /
              Float(boost::multiprecision::denominator(coefficient));
    Float r = Float(boost::multiprecision::numerator(radicand)) /
              Float(boost::multiprecision::denominator(radicand));
    return static_cast<double>(c * boost::multiprecision::sqrt(r));
}

}  // namespace polmult::exact
