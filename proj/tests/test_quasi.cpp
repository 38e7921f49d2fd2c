#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "polmult/angular.hpp"
#include "polmult/kernels.hpp"
#include "polmult/multipole.hpp"
#include "polmult/quasi.hpp"
#include "support.hpp"

using namespace polmult;

TEST(GaussLegendre, NodesAndWeights) {
    std::vector<double> x, w;
    gauss_legendre(3, x, w);
    ASSERT_EQ(x.size(), 3u);
    const double r = std::sqrt(0.6);
    std::sort(x.begin(), x.end());
    EXPECT_NEAR(x[0], -r, 1e-15);
    EXPECT_NEAR(x[1], 0.0, 1e-15);
    EXPECT_NEAR(x[2], r, 1e-15);
    double sw = 0.0;
    for (double v : w) sw += v;
    EXPECT_NEAR(sw, 2.0, 1e-14);
    // degree 2n - 1 exactness
    gauss_legendre(12, x, w);
    for (int p = 0; p <= 23; ++p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * std::pow(x[i], p);
        EXPECT_NEAR(acc, p % 2 ? 0.0 : 2.0 / (p + 1), 1e-14) << p;
    }
}

TEST(SphereGrid, IntegratesHarmonicsUpToTheBandLimit) {
    for (int band : {0, 3, 8, 17}) {
        const auto grid = SphereGrid::for_band_limit(band);
        double area = 0.0;
        std::vector<Complex> acc(static_cast<std::size_t>((band + 1) * (band + 1)), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            area += grid.node_weight(i);
            const auto n = grid.node(i);
            const auto y = spherical_harmonics_upto(band, n.theta, n.phi);
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += grid.node_weight(i) * y[j];
        }
        EXPECT_NEAR(area, 4 * kPi, 1e-12);
        EXPECT_NEAR(std::abs(acc[0] - std::sqrt(4 * kPi)), 0.0, 1e-12);
        for (std::size_t j = 1; j < acc.size(); ++j) EXPECT_LT(std::abs(acc[j]), 1e-12) << band << ' ' << j;
    }
    EXPECT_THROW(SphereGrid::for_band_limit(-1), std::invalid_argument);
}

TEST(Quasi, MaximallyMixedIsFlat) {
    for (int n = 0; n <= 6; ++n) {
        const auto b = decompose_block(DensityBlock::maximally_mixed(Spin(n)));
        for (double r : {-1.0, 0.0, 0.5, 1.0})
            for (auto d : {SphericalDirection{0.2, 0.1}, SphericalDirection{2.0, -1.0}})
                EXPECT_NEAR(quasi_value(b, r, d), 1.0 / (n + 1), 1e-13);
    }
}

TEST(Quasi, QFunctionIsCoherentStateOverlap) {
    std::mt19937_64 rng(5);
    for (int n = 1; n <= 7; ++n) {
        const Spin s(n);
        const DensityBlock rho = oracle::random_block(s, rng);
        const auto b = decompose_block(rho);
        for (auto d : {SphericalDirection{0.3, 0.9}, SphericalDirection{1.9, -2.2}, SphericalDirection{kPi, 0.0}}) {
            const Vector v = su2_coherent_amplitudes(s, d.theta, d.phi);
            const double overlap = (v.adjoint() * rho.matrix * v)(0, 0).real();
            EXPECT_NEAR(quasi_value(b, -1.0, d), overlap, 1e-12) << n;
        }
    }
}

TEST(Quasi, QFunctionPeaksAtTheCoherentDirection) {
    const double th = 1.2, ph = 0.7;
    const auto table = decompose(su2_coherent(Spin(6), th, ph));
    const auto grid = SphereGrid::for_band_limit(40);
    const auto values = kernels::serial::quasi_grid(table.block(Spin(6)), -1.0, grid);
    std::size_t best = 0;
    double lo = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
        lo = std::min(lo, values[i]);
    }
    EXPECT_LT(line_angle(grid.node(best), {th, ph}), 0.1);
    EXPECT_NEAR(quasi_value(table, Spin(6), -1.0, {th, ph}), 1.0, 1e-12);
    EXPECT_GE(lo, -1e-14);
}

TEST(Quasi, QFunctionIsNonnegative) {
    std::mt19937_64 rng(6);
    const auto grid = SphereGrid::for_band_limit(16);
    for (int n = 1; n <= 8; ++n) {
        const auto b = decompose_block(oracle::random_block(Spin(n), rng));
        for (double v : kernels::serial::quasi_grid(b, -1.0, grid)) EXPECT_GE(v, -1e-13);
    }
}

TEST(Quasi, NormalizedForEveryOrdering) {
    std::mt19937_64 rng(7);
    for (int n = 0; n <= 6; ++n) {
        const auto b = decompose_block(oracle::random_block(Spin(n), rng));
        const auto grid = SphereGrid::for_band_limit(n);
        for (double r : {-1.0, -0.3, 0.0, 1.0}) {
            const auto v = kernels::serial::quasi_grid(b, r, grid);
            double acc = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) acc += grid.node_weight(i) * v[i];
            EXPECT_NEAR(acc * (n + 1) / (4 * kPi), 1.0, 1e-12) << n << ' ' << r;
        }
    }
}

TEST(Quasi, LocalizationIdentity) {
    std::mt19937_64 rng(8);
    for (int n = 0; n <= 6; ++n) {
        for (int trial = 0; trial < 4; ++trial) {
            const auto b = decompose_block(oracle::random_block(Spin(n), rng));
            const auto grid = SphereGrid::for_band_limit(2 * n);
            for (double r : {-1.0, 0.0, 1.0}) {
                const double quad = localization_integral(b, r, grid);
                const double closed = localization_identity(b, r);
                EXPECT_NEAR(quad / closed, 1.0, 1e-8) << n << ' ' << r;
                EXPECT_NEAR(localization_sigma(b, r, grid), 1.0 / quad, 1e-12 / quad);
            }
        }
    }
}

TEST(Quasi, LocalizationNeedsADoubleBandGrid) {
    const auto b = decompose_block(DensityBlock::maximally_mixed(Spin(3)));
    EXPECT_THROW(localization_integral(b, 0.0, SphereGrid::for_band_limit(5)), std::invalid_argument);
    EXPECT_NO_THROW(localization_integral(b, 0.0, SphereGrid::for_band_limit(6)));
}

TEST(Quasi, CoherentStatesAreMoreLocalizedThanMixedStates) {
    for (int n = 1; n <= 8; ++n) {
        const auto grid = SphereGrid::for_band_limit(2 * n);
        const auto coh = decompose_block(DensityBlock::pure(Spin(n), su2_coherent_amplitudes(Spin(n), 0.5, 0.5)));
        const auto mix = decompose_block(DensityBlock::maximally_mixed(Spin(n)));
        for (double r : {-1.0, 0.0}) EXPECT_LT(localization_sigma(coh, r, grid), localization_sigma(mix, r, grid));
        EXPECT_NEAR(localization_sigma(mix, 0.0, grid), (n + 1) * (n + 1) / (4 * kPi), 1e-10);
    }
}

TEST(Quasi, InvariantUnderRecomposition) {
    std::mt19937_64 rng(9);
    const auto b = decompose_block(oracle::random_block(Spin(5), rng));
    const auto again = decompose_block(recompose_block(b));
    for (double r : {-1.0, 0.0, 1.0})
        EXPECT_NEAR(quasi_value(b, r, {0.4, 0.4}), quasi_value(again, r, {0.4, 0.4}), 1e-12);
}

TEST(Quasi, ClebschPowerEndpoints) {
    const auto c0 = clebsch_power(Spin(4), 0.0);
    for (double v : c0) EXPECT_DOUBLE_EQ(v, 1.0);
    const auto c1 = clebsch_power(Spin(4), 1.0);
    const auto cm = clebsch_power(Spin(4), -1.0);
    for (int k = 0; k <= 4; ++k) {
        const double c = clebsch_gordan_stretched(Spin(4), k).to_double();
        EXPECT_NEAR(c1[static_cast<std::size_t>(k)], 1.0 / c, 1e-13);
        EXPECT_NEAR(cm[static_cast<std::size_t>(k)], c, 1e-14);
    }
    // large spins stay finite in log space
    for (double v : clebsch_power(Spin(200), 1.0)) EXPECT_TRUE(std::isfinite(v));
}

TEST(Quasi, Warnings) {
    EXPECT_TRUE(quasi_warnings(Spin(4), 0.5).empty());
    EXPECT_FALSE(quasi_warnings(Spin(4), 1.5).empty());
    EXPECT_FALSE(quasi_warnings(Spin(4), -2.0).empty());
    EXPECT_TRUE(quasi_warnings(Spin(30), 1.0).empty());
    EXPECT_FALSE(quasi_warnings(Spin(31), 1.0).empty());
}

TEST(Kernels, ParallelGridMatchesSerial) {
    std::mt19937_64 rng(10);
    for (int n : {1, 4, 9}) {
        const auto b = decompose_block(oracle::random_block(Spin(n), rng));
        const auto grid = SphereGrid::for_band_limit(2 * n + 3);
        for (double r : {-1.0, 0.0, 1.0}) {
            const auto s = kernels::serial::quasi_grid(b, r, grid);
            const auto p = kernels::omp::quasi_grid(b, r, grid);
            ASSERT_EQ(s.size(), p.size());
            double worst = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                worst = std::max(worst, std::abs(s[i] - p[i]));
                scale = std::max(scale, std::abs(s[i]));
            }
            EXPECT_LT(worst, 1e-12 * std::max(1.0, scale)) << n << ' ' << r;
        }
    }
}

TEST(Quasi, WeightedViewSumsBlocks) {
    std::mt19937_64 rng(11);
    const auto sector = oracle::random_sector(4, rng);
    const auto table = decompose(sector);
    const SphericalDirection d{1.0, 2.0};
    double acc = 0.0;
    for (const auto& [s, b] : table.blocks()) acc += b.weight * quasi_value(b, -1.0, d);
    EXPECT_NEAR(quasi_value_weighted(table, -1.0, d), acc, 1e-14);
}
