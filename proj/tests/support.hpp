#pragma once

// Independent oracles and random-state generators shared by the test suites.

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "polmult/state.hpp"
#include "polmult/types.hpp"

namespace polmult::oracle {

inline Vector random_pure(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    return v.normalized();
}

/// Ginibre ensemble: G G^dagger / Tr, full rank with probability one.
inline Matrix random_mixed(int dim, std::mt19937_64& rng, int rank = -1) {
    std::normal_distribution<double> g;
    const int r = rank > 0 ? rank : dim;
    Matrix G(dim, r);
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < r; ++k) G(i, k) = Complex(g(rng), g(rng));
    Matrix rho = G * G.adjoint();
    return rho / rho.trace().real();
}

inline DensityBlock random_block(Spin s, std::mt19937_64& rng) { return {s, random_mixed(s.dim(), rng)}; }

inline PolarizationSector random_sector(int max_two_s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::bernoulli_distribution keep(0.6);
    std::vector<std::pair<Spin, double>> picks;
    double total = 0.0;
    for (int n = 0; n <= max_two_s; ++n) {
        if (!keep(rng) && !(n == max_two_s && picks.empty())) continue;
        const double w = u(rng);
        picks.emplace_back(Spin(n), w);
        total += w;
    }
    PolarizationSector out;
    for (const auto& [s, w] : picks) out.add_block(w / total, random_block(s, rng));
    return out;
}

/// Angular-momentum matrices built directly from the ladder action, in the
/// descending m basis. Used as an oracle independent of stokes_matrices.
struct Generators {
    Matrix jx, jy, jz;
};

inline Generators generators(Spin s) {
    const int d = s.dim();
    const double j = s.value();
    Matrix jp = Matrix::Zero(d, d);
    Generators out{Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
    for (int i = 0; i < d; ++i) {
        const double m = j - i;
        out.jz(i, i) = m;
        if (i >= 1) jp(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    out.jx = (jp + jp.adjoint()) / 2.0;
    out.jy = (jp - jp.adjoint()) / Complex(0.0, 2.0);
    return out;
}

/// exp(i theta S_2) exp(i phi S_3) by dense matrix exponentials.
inline Matrix displacement_by_expm(Spin s, double theta, double phi) {
    const Generators g = generators(s);
    const Complex i(0.0, 1.0);
    const Matrix a = (i * theta * g.jy).exp();
    const Matrix b = (i * phi * g.jz).exp();
    return a * b;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace polmult::oracle
