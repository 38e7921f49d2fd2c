#pragma once

#include <map>
#include <vector>

#include "polmult/exact.hpp"
#include "polmult/multipole.hpp"
#include "polmult/state.hpp"
#include "polmult/types.hpp"

namespace polmult {

/// Stokes operators restricted to one block: S_0 = S 1, S_3 = diag(m) and
/// S_1 +- i S_2 the standard ladder operators.
struct StokesMatrices {
    Spin spin;
    Matrix s0, s1, s2, s3;

    /// n . S for a (unit) direction vector.
    Matrix along(const Eigen::Vector3d& n) const;
    const Matrix& component(int k) const;
};

StokesMatrices stokes_matrices(Spin s);

/// mu_l = Tr[S_n^l rho] for one block.
double moment_direct(const DensityBlock& block, SphericalDirection dir, int ell);

struct SectorMoment {
    std::map<Spin, double> per_block;
    double aggregate = 0.0;  // sum_S P_S mu_l^(S)
};
SectorMoment moment_direct(const PolarizationSector& sector, SphericalDirection dir, int ell);

/// f_Kl = sum_m m^l C^{Sm}_{Sm,K0}, evaluated exactly. Zero when l - K is odd
/// or K > l. Throws std::invalid_argument unless 0 <= K <= 2S and l >= 0.
exact::RootRational f_coeff_exact(Spin s, int k, int ell);
double f_coeff(Spin s, int k, int ell);

/// mu_l from the multipoles: sqrt(4pi/(2S+1)) sum_{K <= min(l, 2S)} sum_q rho_Kq f_Kl Y_Kq.
double moment_from_multipoles(const BlockMultipoles& b, SphericalDirection dir, int ell);

/// <S> of one block.
Eigen::Vector3d stokes_mean(const DensityBlock& block);

struct StokesStatistics {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d variance = Eigen::Vector3d::Zero();
    double mean_photons = 0.0;

    /// sum_k Var(S_k) - <N>/2; never negative for a physical state.
    double uncertainty_excess() const { return variance.sum() - 0.5 * mean_photons; }
};

/// First and second Stokes moments of the sector (the full mixture, not per block).
StokesStatistics stokes_statistics(const PolarizationSector& sector);

/// Two-mode Stokes operator S_k (k = 0..3) over an explicit Fock basis, built
/// from the mode operators. Matrix elements leading outside the basis are dropped.
Matrix fock_stokes_operator(const std::vector<FockLabel>& basis, int k);

}  // namespace polmult
