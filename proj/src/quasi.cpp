#include "polmult/quasi.hpp"

#include <sstream>

#include "polmult/angular.hpp"
#include "polmult/kernels.hpp"

namespace polmult {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute the derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = -x;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

SphereGrid SphereGrid::for_band_limit(int band_limit) {
    if (band_limit < 0) throw std::invalid_argument("SphereGrid: band limit must be non-negative");
    SphereGrid g;
    g.band_limit = band_limit;
    const int n_theta = (band_limit + 2) / 2;  // 2 n_theta - 1 >= band_limit
    const int n_phi = band_limit + 1;
    std::vector<double> x, w;
    gauss_legendre(n_theta, x, w);
    for (int i = 0; i < n_theta; ++i) {
        g.theta.push_back(std::acos(x[static_cast<std::size_t>(i)]));
        g.theta_weight.push_back(w[static_cast<std::size_t>(i)]);
    }
    for (int j = 0; j < n_phi; ++j) g.phi.push_back(2.0 * kPi * j / n_phi);
    std::ostringstream os;
    os << "gauss-legendre(" << n_theta << ")xuniform(" << n_phi << ")";
    g.scheme = os.str();
    return g;
}

std::vector<double> clebsch_power(Spin s, double r) {
    const int n = s.two_s;
    std::vector<double> out(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        // log C^{SS}_{SS,K0} = log (2S)! + (log(2S+1) - log (2S-K)! - log (2S+1+K)!) / 2
        const double log_c = std::lgamma(n + 1.0) +
                             0.5 * (std::log(n + 1.0) - std::lgamma(n - k + 1.0) - std::lgamma(n + k + 2.0));
        out[static_cast<std::size_t>(k)] = std::exp(-r * log_c);
    }
    return out;
}

double quasi_value(const BlockMultipoles& b, double r, SphericalDirection dir) {
    const Spin s = b.spin;
    const auto c = clebsch_power(s, r);
    const auto y = spherical_harmonics_upto(s.two_s, dir.theta, dir.phi);
    double acc = 0.0;
    for (int k = 0; k <= s.two_s; ++k) {
        Complex inner = 0.0;
        for (int q = -k; q <= k; ++q) {
            const auto f = static_cast<std::size_t>(MultipoleIndex::flat(k, q));
            inner += b.values[f] * y[f];
        }
        acc += c[static_cast<std::size_t>(k)] * inner.real();
    }
    return std::sqrt(4.0 * kPi / s.dim()) * acc;
}

double quasi_value(const MultipoleTable& table, Spin s, double r, SphericalDirection dir) {
    return quasi_value(table.block(s), r, dir);
}

double quasi_value_weighted(const MultipoleTable& table, double r, SphericalDirection dir) {
    double acc = 0.0;
    for (const auto& [s, b] : table.blocks()) acc += b.weight * quasi_value(b, r, dir);
    return acc;
}

std::vector<std::string> quasi_warnings(Spin s, double r) {
    std::vector<std::string> out;
    if (r < -1.0 || r > 1.0) {
        out.push_back("r = " + std::to_string(r) + " lies outside [-1, 1]; the distribution is not one of the standard family");
    }
    if (r >= 1.0 && s.two_s > 30) {
        out.push_back("P function with 2S = " + std::to_string(s.two_s) +
                      " > 30: high multipoles are amplified by the inverse Clebsch-Gordan factors, values may be dominated by rounding");
    }
    return out;
}

double localization_integral(const BlockMultipoles& b, double r, const SphereGrid& grid) {
    if (grid.band_limit < 2 * b.spin.two_s) {
        throw std::invalid_argument("localization: grid band limit " + std::to_string(grid.band_limit) +
                                    " is below 2(2S) = " + std::to_string(2 * b.spin.two_s));
    }
    const auto values = kernels::omp::quasi_grid(b, r, grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += grid.node_weight(i) * values[i] * values[i];
    return acc;
}

double localization_sigma(const BlockMultipoles& b, double r, const SphereGrid& grid) {
    const double integral = localization_integral(b, r, grid);
    if (!(integral > 0.0)) throw NumericalError("localization_sigma: integral of W_r^2 is not positive");
    return 1.0 / integral;
}

double localization_sigma(const MultipoleTable& table, Spin s, double r, const SphereGrid& grid) {
    return localization_sigma(table.block(s), r, grid);
}

double localization_identity(const BlockMultipoles& b, double r) {
    const auto c = clebsch_power(b.spin, r);
    const auto w = w_spectrum(b);
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += c[k] * c[k] * w[k];
    return 4.0 * kPi / b.spin.dim() * acc;
}

double localization_identity(const MultipoleTable& table, Spin s, double r) {
    return localization_identity(table.block(s), r);
}

}  // namespace polmult
