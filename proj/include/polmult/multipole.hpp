#pragma once

#include <map>
#include <vector>

#include "polmult/state.hpp"
#include "polmult/types.hpp"

namespace polmult {

/// Irreducible tensor operator T^(S)_Kq with entries
/// sqrt((2K+1)/(2S+1)) C^{S m'}_{S m, K q} at (m', m).
struct TensorOperator {
    Spin spin;
    MultipoleIndex index;
    Matrix matrix;
};

TensorOperator tensor_operator(Spin s, MultipoleIndex index);

/// Nonzero entries of T_Kq for fixed q >= 0, for every K = q..2S.
///
/// Row K - q holds T_Kq(i, i + q) for i = 0..2S-q (descending m'). Each row
/// is a Clebsch-Gordan vector, obtained as an eigenvector of J^2 on the
/// M = q subspace of S x S (a tridiagonal matrix with known eigenvalues
/// K(K+1)). Results for 2S <= 64 are cached (thread-safe).
const RealMatrix& tensor_diagonals(Spin s, int q);

/// State multipoles rho_Kq of one block, K = 0..2S, indexed by
/// MultipoleIndex::flat.
struct BlockMultipoles {
    Spin spin;
    double weight = 1.0;
    std::vector<Complex> values;

    int k_max() const { return spin.two_s; }
    Complex at(int k, int q) const { return values[static_cast<std::size_t>(MultipoleIndex::flat(k, q))]; }
    Complex& at(int k, int q) { return values[static_cast<std::size_t>(MultipoleIndex::flat(k, q))]; }

    static BlockMultipoles zeros(Spin s, double weight);
};

class MultipoleTable {
public:
    using BlockMap = std::map<Spin, BlockMultipoles>;

    void add_block(BlockMultipoles b);
    const BlockMap& blocks() const { return blocks_; }
    BlockMap& blocks() { return blocks_; }
    const BlockMultipoles& block(Spin s) const;
    const TruncationNote& truncation() const { return truncation_; }
    void set_truncation(TruncationNote n) { truncation_ = n; }

private:
    BlockMap blocks_;
    TruncationNote truncation_;
};

BlockMultipoles decompose_block(const DensityBlock& block, double weight = 1.0);
MultipoleTable decompose(const PolarizationSector& sector);

/// Throws std::invalid_argument if rho*_Kq != (-1)^q rho_{K,-q} beyond 1e-10.
DensityBlock recompose_block(const BlockMultipoles& b);
PolarizationSector recompose(const MultipoleTable& table);

// --- measure hierarchy -------------------------------------------------------

/// W_K^(S) = sum_q |rho_Kq|^2 for K = 0..2S.
std::vector<double> w_spectrum(const BlockMultipoles& b);

struct WSpectrum {
    std::map<Spin, std::vector<double>> per_block;
    std::vector<double> aggregate;  // W_K = sum_S P_S W_K^(S), K = 0..max 2S
};
WSpectrum w_spectrum(const MultipoleTable& table);

/// A_K^(S) = sum_{l=1}^{min(K, 2S)} W_l^(S); K >= 1.
double cumulative_a(const BlockMultipoles& b, int k);
std::map<Spin, double> cumulative_a(const MultipoleTable& table, int k);

/// Cumulative multipole content of an SU(2) coherent state,
/// 2S/(2S+1) - Gamma(2S+1)^2 / (Gamma(2S-K) Gamma(2S+K+2)), for 1 <= K <= 2S.
double a_su2_max(Spin s, int k);

/// P_K = sum_S P_S sqrt(A_K^(S) / A_K,SU(2)^(S)); blocks with 2S < K and the
/// vacuum contribute nothing.
double degree_p(const MultipoleTable& table, int k);

/// Stokes-vector route to P_1: sum_S P_S |<S>|_S / S over non-vacuum blocks.
double degree_p1_closed_form(const PolarizationSector& sector);

struct MeasureRow {
    Spin spin;
    int k = 0;
    double weight = 0.0;
    double w = 0.0;
    double a = 0.0;      // NaN for K = 0
    double a_max = 0.0;  // NaN for K = 0
    double p_contribution = 0.0;
};

struct MeasureReport {
    int k_max = 0;
    std::vector<MeasureRow> rows;     // per block, K = 0..min(k_max, 2S)
    std::vector<double> w_aggregate;  // K = 0..k_max
    std::vector<double> degree;       // P_K at index K (index 0 unused, NaN)
    double tail_bound = 0.0;
};

MeasureReport measure_report(const MultipoleTable& table, int k_max);

/// Printed closed forms used as golden references.
namespace closed_form {
/// W_K of |S, m>: (2K+1)/(2S+1) (C^{Sm}_{Sm,K0})^2.
double w_fock(Spin s, int m_2, int k);
/// W_K of an SU(2) coherent state: (2K+1)/(2S+1) (C^{SS}_{SS,K0})^2.
double w_su2(Spin s, int k);
/// Table 1 degree for |S, m>, square root of the cumulative-sum ratio.
double pk_fock(Spin s, int m_2, int k);
/// Table 1 degree for a quadrature coherent state: Poisson mass of N >= K.
double pk_quadrature(double nbar, int k);
/// Large-Nbar asymptotic 1/2 erfc((K - Nbar) / sqrt(2 Nbar)).
double pk_quadrature_erfc(double nbar, int k);
/// P_2 for quadrature coherent states: 1 - (1 + Nbar) exp(-Nbar).
double p2_quadrature(double nbar);
/// Printed P_2(|S,m>) = [45 m^4 + 5 S^2 (S+1)^2 - 9 m^2 (2S(S+1)+1)] / [4 S^2 (2S-1)(4S+1)], S >= 1.
double p2_fock(Spin s, int m_2);
/// Printed minimum (9 + 18 S + 8 S^2) / (80 S^2) and its location
/// m = sqrt(1 + 2S + 2S^2) / sqrt(10).
double p2_fock_minimum(Spin s);
double p2_fock_argmin(Spin s);
}  // namespace closed_form

}  // namespace polmult
