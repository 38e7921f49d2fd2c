#pragma once

#include <string>
#include <vector>

#include "polmult/multipole.hpp"
#include "polmult/types.hpp"

namespace polmult {

/// Product rule on the sphere: Gauss-Legendre nodes in cos(theta) times
/// equispaced phi. Integrates every Y_Kq with K <= band_limit exactly.
struct SphereGrid {
    int band_limit = 0;
    std::vector<double> theta;
    std::vector<double> theta_weight;  // Gauss-Legendre weight of each ring
    std::vector<double> phi;
    std::string scheme;

    std::size_t size() const { return theta.size() * phi.size(); }
    double weight(std::size_t ring) const { return theta_weight[ring] * (2.0 * kPi / static_cast<double>(phi.size())); }
    SphericalDirection node(std::size_t index) const {
        return {theta[index / phi.size()], phi[index % phi.size()]};
    }
    double node_weight(std::size_t index) const { return weight(index / phi.size()); }

    static SphereGrid for_band_limit(int band_limit);
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// (C^{SS}_{SS,K0})^(-r) for K = 0..2S, in log space.
std::vector<double> clebsch_power(Spin s, double r);

/// W_r(theta, phi) = sqrt(4pi/(2S+1)) sum_Kq (C^{SS}_{SS,K0})^(-r) rho_Kq Y_Kq.
/// r = 1, 0, -1 give the P, Wigner and Q functions; with this convention the
/// Q function is <n|rho|n> for the coherent state |n> along (theta, phi).
double quasi_value(const BlockMultipoles& b, double r, SphericalDirection dir);
double quasi_value(const MultipoleTable& table, Spin s, double r, SphericalDirection dir);

/// Convenience view sum_S P_S W_r^(S) over all blocks.
double quasi_value_weighted(const MultipoleTable& table, double r, SphericalDirection dir);

/// Messages for parameter choices that are accepted but questionable.
std::vector<std::string> quasi_warnings(Spin s, double r);

/// Sigma = 1 / int W_r^2 dOmega by quadrature. Throws std::invalid_argument if
/// the grid band limit is below 2(2S), NumericalError if the integral is not
/// positive.
double localization_sigma(const BlockMultipoles& b, double r, const SphereGrid& grid);
double localization_sigma(const MultipoleTable& table, Spin s, double r, const SphereGrid& grid);

/// int W_r^2 dOmega by quadrature.
double localization_integral(const BlockMultipoles& b, double r, const SphereGrid& grid);

/// Closed form 4pi/(2S+1) sum_K (C^{SS}_{SS,K0})^(-2r) W_K.
double localization_identity(const BlockMultipoles& b, double r);
double localization_identity(const MultipoleTable& table, Spin s, double r);

}  // namespace polmult
