#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace polmult {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

/// Raised when a numerical procedure cannot produce a meaningful result
/// (singular design matrix, degenerate integral). Maps to CLI exit code 1.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Spin label of a photon-number block, stored doubled: two_s = 2S = N.
/// Magnetic numbers are passed around doubled as well (m2 = 2m), so that
/// half-integers stay exact.
struct Spin {
    int two_s = 0;

    constexpr Spin() = default;
    constexpr explicit Spin(int doubled) : two_s(doubled) {
        if (doubled < 0) throw std::invalid_argument("Spin: two_s must be non-negative");
    }
    static constexpr Spin from_photons(int n) { return Spin(n); }

    constexpr double value() const { return 0.5 * two_s; }
    constexpr int dim() const { return two_s + 1; }
    constexpr bool is_integer() const { return two_s % 2 == 0; }

    /// Row/column index of doubled magnetic number m2 in the descending basis
    /// m = S, S-1, ..., -S.
    constexpr int index_of(int m2) const { return (two_s - m2) / 2; }
    constexpr int m2_at(int index) const { return two_s - 2 * index; }
    constexpr bool admits(int m2) const {
        return std::abs(m2) <= two_s && (two_s - m2) % 2 == 0;
    }

    friend constexpr auto operator<=>(Spin, Spin) = default;
};

std::string to_string(Spin s);

struct MultipoleIndex {
    int k = 0;
    int q = 0;

    MultipoleIndex(int k_, int q_) : k(k_), q(q_) {
        if (k_ < 0 || std::abs(q_) > k_) {
            throw std::invalid_argument("MultipoleIndex: need k >= 0 and |q| <= k");
        }
    }
    /// Flat position of (k, q) in a table ordered k = 0, 1, ...; q = -k..k.
    int flat() const { return k * k + k + q; }
    static int flat(int k, int q) { return k * k + k + q; }
    /// Number of (k, q) pairs with k <= k_max.
    static int count_up_to(int k_max) { return (k_max + 1) * (k_max + 1); }
};

struct SphericalDirection {
    double theta = 0.0;
    double phi = 0.0;

    Eigen::Vector3d unit() const {
        return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    }
    /// Angles of a (not necessarily normalized) nonzero vector; phi in [0, 2pi).
    static SphericalDirection from_vector(const Eigen::Vector3d& v);
};

}  // namespace polmult
