#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "polmult/types.hpp"

namespace polmult {

/// Density matrix of one photon-number block, rows/cols in m = S, S-1, ..., -S.
struct DensityBlock {
    Spin spin;
    Matrix matrix;

    static DensityBlock pure(Spin s, const Vector& amplitudes);
    static DensityBlock maximally_mixed(Spin s);

    /// Throws std::invalid_argument unless Hermitian (1e-12), unit trace
    /// (1e-12) and positive semidefinite (eigenvalues >= -1e-10).
    void validate() const;
    double purity() const;
};

struct WeightedBlock {
    double weight = 0.0;
    DensityBlock block;
};

/// Records probability mass dropped when truncating an infinite family.
struct TruncationNote {
    double tail_tol = 0.0;
    double dropped_mass = 0.0;
};

/// Block-diagonal polarization sector: P_S and rho^(S) for each occupied S.
class PolarizationSector {
public:
    using BlockMap = std::map<Spin, WeightedBlock>;

    PolarizationSector() = default;

    /// Adds a block; throws if the spin is already present or weight <= 0.
    void add_block(double weight, DensityBlock block);

    const BlockMap& blocks() const { return blocks_; }
    const WeightedBlock& block(Spin s) const;
    bool contains(Spin s) const { return blocks_.count(s) != 0; }
    std::size_t size() const { return blocks_.size(); }
    double total_weight() const;
    Spin max_spin() const;

    const TruncationNote& truncation() const { return truncation_; }
    void set_truncation(TruncationNote note) { truncation_ = note; }

    /// Validates every block and the weight budget.
    void validate() const;

private:
    BlockMap blocks_;
    TruncationNote truncation_;
};

inline constexpr double kDefaultTailTol = 1e-10;

/// Amplitudes of the spin coherent state whose Stokes vector points along
/// (theta, phi): <S_n> = S, S_n |psi> = S |psi>.
Vector su2_coherent_amplitudes(Spin s, double theta, double phi);

PolarizationSector fock_state(int n_h, int n_v);
PolarizationSector su2_coherent(Spin s, double theta, double phi);
PolarizationSector quadrature_coherent(Complex alpha_h, Complex alpha_v, double tail_tol = kDefaultTailTol);
PolarizationSector noon_state(int n);
PolarizationSector tmsv_state(double r, double tail_tol = kDefaultTailTol);

/// Two-mode Fock label |n_H, n_V>.
struct FockLabel {
    int n_h = 0;
    int n_v = 0;
    int photons() const { return n_h + n_v; }
    friend bool operator==(const FockLabel&, const FockLabel&) = default;
};

/// A full two-mode density matrix over an explicit list of Fock labels.
struct RawState {
    std::vector<FockLabel> basis;
    Matrix matrix;
};

/// Drops coherences between different photon numbers; each block is
/// renormalized and its trace becomes P_S. Labels absent from the basis are
/// treated as unpopulated.
PolarizationSector project_polarization_sector(const RawState& raw);

/// Raw two-mode matrix of a pure state given by amplitudes over labels.
RawState raw_pure_state(std::vector<FockLabel> basis, const Vector& amplitudes);

// Declarative state descriptions (the StateSpec schema).
namespace spec {
struct Fock { int n_h = 0; int n_v = 0; };
struct Su2Coherent { int two_s = 0; double theta = 0; double phi = 0; };
struct QuadratureCoherent { Complex alpha_h; Complex alpha_v; double tail_tol = kDefaultTailTol; };
struct Noon { int n = 1; };
struct Tmsv { double r = 0; double tail_tol = kDefaultTailTol; };
struct Raw { RawState state; };
}  // namespace spec

using StateSpec = std::variant<spec::Fock, spec::Su2Coherent, spec::QuadratureCoherent, spec::Noon, spec::Tmsv, spec::Raw>;

std::string family_name(const StateSpec& s);
PolarizationSector build_state(const StateSpec& s);

}  // namespace polmult
