#include "polmult/kernels.hpp"

#include <omp.h>

#include "polmult/angular.hpp"

namespace polmult::kernels {

namespace serial {

std::vector<double> quasi_grid(const BlockMultipoles& b, double r, const SphereGrid& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = quasi_value(b, r, grid.node(i));
    return out;
}

std::vector<std::vector<CountRecord>> simulate_directions(const PolarizationSector& sector,
                                                          const std::vector<SphericalDirection>& dirs,
                                                          std::int64_t shots, std::uint64_t seed) {
    std::vector<std::vector<CountRecord>> out;
    out.reserve(dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) out.push_back(simulate_counts(sector, dirs[i], shots, split_seed(seed, i)));
    return out;
}

}  // namespace serial

namespace omp {

std::vector<double> quasi_grid(const BlockMultipoles& b, double r, const SphereGrid& grid) {
    const Spin s = b.spin;
    const int top = s.two_s;
    const auto c = clebsch_power(s, r);
    const double norm = std::sqrt(4.0 * kPi / s.dim());
    // fold the Clebsch factors in once: a_Kq = C_K^(-r) rho_Kq
    std::vector<Complex> a(b.values.size());
    for (int k = 0; k <= top; ++k) {
        for (int q = -k; q <= k; ++q) {
            const auto f = static_cast<std::size_t>(MultipoleIndex::flat(k, q));
            a[f] = c[static_cast<std::size_t>(k)] * b.values[f];
        }
    }
    const std::size_t n_phi = grid.phi.size();
    std::vector<double> out(grid.size());
    const auto rings = static_cast<std::ptrdiff_t>(grid.theta.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < rings; ++t) {
        // Y_Kq(theta, phi) = Y_Kq(theta, 0) e^{i q phi}
        const auto y0 = spherical_harmonics_upto(top, grid.theta[static_cast<std::size_t>(t)], 0.0);
        std::vector<Complex> row(static_cast<std::size_t>(2 * top + 1));
        for (int q = -top; q <= top; ++q) {
            Complex acc = 0.0;
            for (int k = std::abs(q); k <= top; ++k) {
                const auto f = static_cast<std::size_t>(MultipoleIndex::flat(k, q));
                acc += a[f] * y0[f];
            }
            row[static_cast<std::size_t>(q + top)] = acc;
        }
        for (std::size_t j = 0; j < n_phi; ++j) {
            const double phi = grid.phi[j];
            double v = row[static_cast<std::size_t>(top)].real();
            for (int q = 1; q <= top; ++q) {
                const Complex e = std::polar(1.0, q * phi);
                v += (row[static_cast<std::size_t>(top + q)] * e + row[static_cast<std::size_t>(top - q)] * std::conj(e)).real();
            }
            out[static_cast<std::size_t>(t) * n_phi + j] = norm * v;
        }
    }
    return out;
}

std::vector<std::vector<CountRecord>> simulate_directions(const PolarizationSector& sector,
                                                          const std::vector<SphericalDirection>& dirs,
                                                          std::int64_t shots, std::uint64_t seed) {
    std::vector<std::vector<CountRecord>> out(dirs.size());
    const auto n = static_cast<std::ptrdiff_t>(dirs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = simulate_counts(sector, dirs[k], shots, split_seed(seed, k));
    }
    return out;
}

}  // namespace omp

int max_threads() { return omp_get_max_threads(); }

}  // namespace polmult::kernels
