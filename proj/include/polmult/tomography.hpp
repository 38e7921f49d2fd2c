#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "polmult/directions.hpp"
#include "polmult/multipole.hpp"
#include "polmult/state.hpp"
#include "polmult/types.hpp"

namespace polmult {

struct MomentRecord {
    SphericalDirection direction;
    int ell = 0;
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t shots = 0;
};

/// Outcome histogram of S_n on one block; keys are doubled m.
struct CountRecord {
    SphericalDirection direction;
    Spin spin;
    std::map<int, std::int64_t> counts;

    std::int64_t total() const;
};

/// The explicit dipole inversion from first moments along x, y, z.
/// Returns (rho_11, rho_10, rho_1-1).
std::array<Complex, 3> invert_dipole(const std::array<double, 3>& mu_axes, Spin s);

struct OrderSolution {
    int order = 0;
    std::vector<Complex> rho;        // q = -L..L
    double condition_number = 0.0;   // of the Gram matrix P_L
    std::vector<double> residuals;   // measured minus fitted mu_L, per direction
};

/// Solves for rho_Lq from mu_L along each direction, after removing the
/// contributions of the already known orders K < L held in `lower`.
/// The unknowns are the 2L+1 real parameters of a Hermitian-consistent row,
/// so the result always satisfies rho*_Lq = (-1)^q rho_L,-q. More than 2L+1
/// directions give the least-squares solution.
/// Throws std::invalid_argument for fewer than 2L+1 directions or L > 2S,
/// and NumericalError when the Gram matrix condition number exceeds 1e8.
OrderSolution invert_order(int order, const DirectionSet& directions, const std::vector<double>& mu,
                           const BlockMultipoles& lower);
OrderSolution invert_order(int order, const DirectionSet& directions, const std::vector<MomentRecord>& moments,
                           const BlockMultipoles& lower);

/// Independent stream seed for item `index` of a run seeded with `seed`.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

/// Outcome probabilities of S_n on one block, indexed like the m basis.
Eigen::VectorXd outcome_probabilities(const DensityBlock& block, SphericalDirection dir);

/// Draws `shots` events: a block with probability P_S, then an outcome m.
/// One record per block of the sector (possibly with zero events).
std::vector<CountRecord> simulate_counts(const PolarizationSector& sector, SphericalDirection dir, std::int64_t shots,
                                         std::uint64_t seed);

/// Empirical mu_l pooled over the records (one direction), with the plug-in
/// standard error sqrt((<m^2l> - <m^l>^2) / n).
MomentRecord estimate_moments(const std::vector<CountRecord>& counts, int ell);
MomentRecord estimate_moments(const CountRecord& counts, int ell);

struct ReconstructionOptions {
    int l_max = 2;
    /// Direction set per order; canonical_directions(L) where absent.
    std::map<int, DirectionSet> directions;

    DirectionSet directions_for(int order) const;
    std::vector<SphericalDirection> all_directions() const;  // union over 1..l_max, order of first use
};

struct OrderDiagnostics {
    Spin spin;
    int order = 0;
    std::string label;
    double condition_number = 0.0;
    double max_residual = 0.0;
};

struct Reconstruction {
    MultipoleTable table;
    /// Standard errors of Re and Im of each rho_Kq, packed as a complex
    /// number; empty in exact mode.
    std::map<Spin, std::vector<Complex>> std_errors;
    std::vector<OrderDiagnostics> diagnostics;
    std::map<Spin, std::vector<MomentRecord>> moments;  // per block, order by order
    std::map<Spin, int> order_reached;  // min(l_max, 2S) per block
    std::optional<std::uint64_t> seed;
};

/// Exact mode: moments computed from the state itself.
Reconstruction reconstruct(const PolarizationSector& sector, const ReconstructionOptions& options);

/// Count mode: records for every direction the options require, for every
/// block. Block weights come from per-block event totals.
Reconstruction reconstruct(const std::vector<CountRecord>& counts, const ReconstructionOptions& options);

/// Sampled mode: simulate `shots` events per direction, then reconstruct.
Reconstruction reconstruct_sampled(const PolarizationSector& sector, const ReconstructionOptions& options,
                                   std::int64_t shots, std::uint64_t seed);

}  // namespace polmult
