#include "polmult/stokes.hpp"

#include <mutex>
#include <shared_mutex>
#include <tuple>

#include "polmult/angular.hpp"

namespace polmult {

using exact::BigInt;
using exact::Rational;
using exact::RootRational;

Matrix StokesMatrices::along(const Eigen::Vector3d& n) const {
    return n.x() * s1 + n.y() * s2 + n.z() * s3;
}

const Matrix& StokesMatrices::component(int k) const {
    switch (k) {
        case 0: return s0;
        case 1: return s1;
        case 2: return s2;
        case 3: return s3;
        default: throw std::invalid_argument("StokesMatrices: component must be 0..3");
    }
}

StokesMatrices stokes_matrices(Spin s) {
    const int d = s.dim();
    const double S = s.value();
    Matrix plus = Matrix::Zero(d, d);
    Matrix s3 = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double m = 0.5 * s.m2_at(i);
        s3(i, i) = m;
        // S_+ |m> = sqrt((S-m)(S+m+1)) |m+1>, and m+1 sits one row up
        if (i > 0) plus(i - 1, i) = std::sqrt((S - m) * (S + m + 1.0));
    }
    const Matrix minus = plus.adjoint();
    const Complex half_i(0.0, 0.5);
    return {s, S * Matrix::Identity(d, d), 0.5 * (plus + minus), -half_i * (plus - minus), s3};
}

namespace {

double moment_of_probabilities(const Eigen::VectorXd& p, Spin s, int ell) {
    double mu = 0.0;
    for (int i = 0; i < s.dim(); ++i) mu += p(i) * std::pow(0.5 * s.m2_at(i), ell);
    return mu;
}

}  // namespace

double moment_direct(const DensityBlock& block, SphericalDirection dir, int ell) {
    if (ell < 0) throw std::invalid_argument("moment_direct: ell must be non-negative");
    const Spin s = block.spin;
    if (ell == 0) return block.matrix.trace().real();
    // S_n is diagonalized by D: D^dagger S_3 D = n . S, so the outcome
    // distribution of S_n is diag(D rho D^dagger).
    const Matrix d = wigner_D_matrix(s, dir.theta, dir.phi);
    const Eigen::VectorXd p = (d * block.matrix * d.adjoint()).diagonal().real();
    return moment_of_probabilities(p, s, ell);
}

SectorMoment moment_direct(const PolarizationSector& sector, SphericalDirection dir, int ell) {
    SectorMoment out;
    for (const auto& [s, wb] : sector.blocks()) {
        const double mu = moment_direct(wb.block, dir, ell);
        out.per_block.emplace(s, mu);
        out.aggregate += wb.weight * mu;
    }
    return out;
}

RootRational f_coeff_exact(Spin s, int k, int ell) {
    if (k < 0 || k > s.two_s) throw std::invalid_argument("f_coeff: need 0 <= K <= 2S");
    if (ell < 0) throw std::invalid_argument("f_coeff: ell must be non-negative");
    RootRational acc = clebsch_gordan_diagonal(s, s.two_s, k);
    acc.coefficient = 0;
    if ((ell - k) % 2 != 0 || k > ell) return acc;
    for (int m2 = -s.two_s; m2 <= s.two_s; m2 += 2) {
        if (ell > 0 && m2 == 0) continue;
        const RootRational c = clebsch_gordan_diagonal(s, m2, k);
        Rational power = 1;
        for (int e = 0; e < ell; ++e) power *= Rational(m2, 2);
        acc.coefficient += power * c.coefficient;
    }
    return acc;
}

double f_coeff(Spin s, int k, int ell) {
    static std::shared_mutex mutex;
    static std::map<std::tuple<int, int, int>, double> memo;
    const auto key = std::make_tuple(s.two_s, k, ell);
    {
        std::shared_lock lock(mutex);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
    }
    const double v = f_coeff_exact(s, k, ell).to_double();
    std::unique_lock lock(mutex);
    memo.emplace(key, v);
    return v;
}

double moment_from_multipoles(const BlockMultipoles& b, SphericalDirection dir, int ell) {
    if (ell < 0) throw std::invalid_argument("moment_from_multipoles: ell must be non-negative");
    const Spin s = b.spin;
    const int top = std::min(ell, s.two_s);
    const auto y = spherical_harmonics_upto(top, dir.theta, dir.phi);
    Complex acc = 0.0;
    for (int k = ell % 2; k <= top; k += 2) {
        Complex inner = 0.0;
        for (int q = -k; q <= k; ++q) {
            inner += b.at(k, q) * y[static_cast<std::size_t>(MultipoleIndex::flat(k, q))];
        }
        acc += f_coeff(s, k, ell) * inner;
    }
    return std::sqrt(4.0 * kPi / s.dim()) * acc.real();
}

Eigen::Vector3d stokes_mean(const DensityBlock& block) {
    const StokesMatrices st = stokes_matrices(block.spin);
    Eigen::Vector3d v;
    for (int k = 1; k <= 3; ++k) v(k - 1) = (st.component(k) * block.matrix).trace().real();
    return v;
}

StokesStatistics stokes_statistics(const PolarizationSector& sector) {
    StokesStatistics out;
    Eigen::Vector3d second = Eigen::Vector3d::Zero();
    for (const auto& [s, wb] : sector.blocks()) {
        const StokesMatrices st = stokes_matrices(s);
        for (int k = 1; k <= 3; ++k) {
            const Matrix& sk = st.component(k);
            out.mean(k - 1) += wb.weight * (sk * wb.block.matrix).trace().real();
            second(k - 1) += wb.weight * (sk * sk * wb.block.matrix).trace().real();
        }
        out.mean_photons += wb.weight * s.two_s;
    }
    out.variance = second - out.mean.cwiseAbs2();
    return out;
}

Matrix fock_stokes_operator(const std::vector<FockLabel>& basis, int k) {
    if (k < 0 || k > 3) throw std::invalid_argument("fock_stokes_operator: component must be 0..3");
    const int d = static_cast<int>(basis.size());
    auto find = [&](FockLabel l) {
        for (int i = 0; i < d; ++i) {
            if (basis[static_cast<std::size_t>(i)] == l) return i;
        }
        return -1;
    };
    Matrix out = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        const FockLabel f = basis[static_cast<std::size_t>(j)];
        if (k == 0 || k == 3) {
            out(j, j) = k == 0 ? 0.5 * (f.n_h + f.n_v) : 0.5 * (f.n_h - f.n_v);
            continue;
        }
        // a_H^dagger a_V |n_h, n_v> and a_V^dagger a_H |n_h, n_v>
        if (f.n_v > 0) {
            const int i = find({f.n_h + 1, f.n_v - 1});
            if (i >= 0) {
                const double amp = std::sqrt(static_cast<double>(f.n_h + 1) * f.n_v);
                out(i, j) += k == 1 ? Complex(0.5 * amp) : Complex(0.0, -0.5 * amp);
            }
        }
        if (f.n_h > 0) {
            const int i = find({f.n_h - 1, f.n_v + 1});
            if (i >= 0) {
                const double amp = std::sqrt(static_cast<double>(f.n_v + 1) * f.n_h);
                out(i, j) += k == 1 ? Complex(0.5 * amp) : Complex(0.0, 0.5 * amp);
            }
        }
    }
    return out;
}

}  // namespace polmult
