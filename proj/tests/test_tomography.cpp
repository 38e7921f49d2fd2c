#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "polmult/directions.hpp"
#include "polmult/kernels.hpp"
#include "polmult/multipole.hpp"
#include "polmult/stokes.hpp"
#include "polmult/tomography.hpp"
#include "support.hpp"

using namespace polmult;

namespace {

PolarizationSector single(const DensityBlock& b) {
    PolarizationSector s;
    s.add_block(1.0, b);
    return s;
}

double max_table_diff(const BlockMultipoles& a, const BlockMultipoles& b, int k_max) {
    double worst = 0.0;
    for (int k = 0; k <= k_max; ++k)
        for (int q = -k; q <= k; ++q) worst = std::max(worst, std::abs(a.at(k, q) - b.at(k, q)));
    return worst;
}

}  // namespace

TEST(Directions, AxesAreOrthogonal) {
    const auto a = canonical_directions(1);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) EXPECT_NEAR(a.directions[i].unit().dot(a.directions[j].unit()), 0.0, 1e-15);
}

TEST(Directions, IcosahedralLinesReachTheOptimalAngle) {
    const auto five = canonical_directions(2);
    ASSERT_EQ(five.size(), 5u);
    const double expect = std::atan(2.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) EXPECT_NEAR(line_angle(five.directions[i], five.directions[j]), expect, 1e-12);
    EXPECT_NEAR(min_line_angle(five), expect, 1e-12);
    EXPECT_LT(design_condition(2, five), 10.0);
}

TEST(Directions, GramMatrixIsTheScaledDesignProduct) {
    for (int L = 1; L <= 4; ++L) {
        const auto set = canonical_directions(L);
        const Matrix y = harmonic_design(L, set);
        const Matrix p = 4 * kPi / (2 * L + 1) * y * y.adjoint();
        EXPECT_LT(oracle::max_abs(p - gram_matrix(L, set).cast<Complex>()), 1e-12);
        const Eigen::JacobiSVD<RealMatrix> svd(gram_matrix(L, set));
        const auto sv = svd.singularValues();
        EXPECT_NEAR(design_condition(L, set) / (sv(0) / sv(sv.size() - 1)), 1.0, 1e-8);
    }
}

TEST(Directions, HigherOrderSetsAreSpreadAndWellConditioned) {
    for (int L = 3; L <= 5; ++L) {
        const auto set = canonical_directions(L);
        ASSERT_EQ(static_cast<int>(set.size()), 2 * L + 1);
        const double cond = design_condition(L, set);
        EXPECT_TRUE(std::isfinite(cond));
        EXPECT_LT(cond, kMaxDesignCondition);
        EXPECT_GT(min_line_angle(set), 0.5);  // about 29 degrees at worst
        // deterministic
        const auto again = canonical_directions(L);
        for (std::size_t i = 0; i < set.size(); ++i) EXPECT_EQ(set.directions[i].theta, again.directions[i].theta);
    }
    // seven lines: compare with a fresh optimizer run from another seed
    EXPECT_GT(min_line_angle(spread_lines(7, 99)), 0.8 * min_line_angle(canonical_directions(3)));
}

TEST(DipoleInversion, TableTwoDipole) {
    const auto rho = invert_dipole({0.0, 0.0, 1.0}, Spin(2));
    EXPECT_NEAR(std::abs(rho[0]), 0.0, 1e-15);
    EXPECT_NEAR(rho[1].real(), 0.7071, 1e-4);
    EXPECT_NEAR(rho[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(rho[2]), 0.0, 1e-15);
    const auto zero = invert_dipole({0.0, 0.0, 0.0}, Spin(5));
    for (auto z : zero) EXPECT_EQ(z, Complex(0.0));
}

TEST(DipoleInversion, AgreesWithDecomposition) {
    std::mt19937_64 rng(31);
    for (int n = 1; n <= 6; ++n) {
        const DensityBlock b = oracle::random_block(Spin(n), rng);
        const auto axes = canonical_directions(1);
        std::array<double, 3> mu{};
        for (std::size_t i = 0; i < 3; ++i) mu[i] = moment_direct(b, axes.directions[i], 1);
        const auto rho = invert_dipole(mu, Spin(n));
        const auto ref = decompose_block(b);
        EXPECT_NEAR(std::abs(rho[0] - ref.at(1, 1)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(rho[1] - ref.at(1, 0)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(rho[2] - ref.at(1, -1)), 0.0, 1e-12);
    }
}

TEST(OrderInversion, TableTwoQuadrupole) {
    const auto b = fock_state(2, 0).block(Spin(2)).block;
    BlockMultipoles lower = BlockMultipoles::zeros(Spin(2), 1.0);
    lower.at(0, 0) = 1.0 / std::sqrt(3.0);
    lower.at(1, 0) = 1.0 / std::sqrt(2.0);
    const std::vector<double> mu2 = {0.5 * (1 + 0.5 + 0.5 / std::sqrt(5.0)), 0.5 * (1 + 0.5 + 0.5 / std::sqrt(5.0)), 0.5,
                                     0.5, 0.5 * (1 + 0.5 - 0.5 / std::sqrt(5.0))};
    const auto five = canonical_directions(2);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(mu2[i], moment_direct(b, five.directions[i], 2), 1e-14);
    const auto sol = invert_order(2, five, mu2, lower);
    EXPECT_NEAR(sol.rho[2].real(), 0.4082, 1e-4);
    EXPECT_NEAR(sol.rho[2].real(), 1.0 / std::sqrt(6.0), 1e-14);
    for (int q : {0, 1, 3, 4}) EXPECT_LT(std::abs(sol.rho[static_cast<std::size_t>(q)]), 1e-14);
    for (double r : sol.residuals) EXPECT_LT(std::abs(r), 1e-14);
}

TEST(OrderInversion, MaximallyMixedGivesNoMultipoles) {
    const DensityBlock b = DensityBlock::maximally_mixed(Spin(4));
    ReconstructionOptions opt;
    opt.l_max = 4;
    const auto rec = reconstruct(single(b), opt);
    const auto& t = rec.table.block(Spin(4));
    for (int k = 1; k <= 4; ++k)
        for (int q = -k; q <= k; ++q) EXPECT_LT(std::abs(t.at(k, q)), 1e-12);
}

TEST(OrderInversion, ErrorsForBadDirectionSets) {
    BlockMultipoles lower = BlockMultipoles::zeros(Spin(4), 1.0);
    lower.at(0, 0) = 1.0 / std::sqrt(5.0);
    const auto five = canonical_directions(2);
    DirectionSet four{"short", {five.directions.begin(), five.directions.begin() + 4}};
    EXPECT_THROW(invert_order(2, four, std::vector<double>(4, 0.5), lower), std::invalid_argument);
    EXPECT_THROW(invert_order(5, canonical_directions(5), std::vector<double>(11, 0.5), lower), std::invalid_argument);
    // five lines in one plane cannot separate the quadrupole
    DirectionSet planar{"planar", {}};
    for (int i = 0; i < 5; ++i) planar.directions.push_back({kPi / 2, i * kPi / 5});
    try {
        invert_order(2, planar, std::vector<double>(5, 0.5), lower);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("theta=1.5708"), std::string::npos);
    }
}

TEST(OrderInversion, MomentRecordOverloadChecksConsistency) {
    const auto b = fock_state(2, 0).block(Spin(2)).block;
    auto lower = BlockMultipoles::zeros(Spin(2), 1.0);
    lower.at(0, 0) = 1.0 / std::sqrt(3.0);
    const auto axes = canonical_directions(1);
    std::vector<MomentRecord> recs;
    for (const auto& d : axes.directions) recs.push_back({d, 1, moment_direct(b, d, 1), 0.0, 0});
    EXPECT_NEAR(invert_order(1, axes, recs, lower).rho[1].real(), 1.0 / std::sqrt(2.0), 1e-14);
    recs[0].ell = 2;
    EXPECT_THROW(invert_order(1, axes, recs, lower), std::invalid_argument);
}

TEST(Reconstruction, ExactMomentsInvertDecomposition) {
    std::mt19937_64 rng(41);
    for (int n = 1; n <= 6; ++n) {
        for (int trial = 0; trial < 10; ++trial) {
            const DensityBlock b = oracle::random_block(Spin(n), rng);
            ReconstructionOptions opt;
            opt.l_max = n;
            const auto rec = reconstruct(single(b), opt);
            EXPECT_LT(max_table_diff(rec.table.block(Spin(n)), decompose_block(b), n), 1e-10) << "2S=" << n;
            EXPECT_EQ(rec.order_reached.at(Spin(n)), n);
            EXPECT_EQ(static_cast<int>(rec.diagnostics.size()), n);
        }
    }
}

TEST(Reconstruction, ClampsOrderPerBlockAndLeavesHigherOrdersEmpty) {
    std::mt19937_64 rng(43);
    PolarizationSector s;
    s.add_block(0.3, oracle::random_block(Spin(1), rng));
    s.add_block(0.7, oracle::random_block(Spin(4), rng));
    ReconstructionOptions opt;
    opt.l_max = 2;
    const auto rec = reconstruct(s, opt);
    EXPECT_EQ(rec.order_reached.at(Spin(1)), 1);
    EXPECT_EQ(rec.order_reached.at(Spin(4)), 2);
    const auto truth = decompose(s);
    EXPECT_LT(max_table_diff(rec.table.block(Spin(4)), truth.block(Spin(4)), 2), 1e-10);
    EXPECT_EQ(rec.table.block(Spin(4)).at(3, 1), Complex(0.0));
    EXPECT_DOUBLE_EQ(rec.table.block(Spin(4)).weight, 0.7);
}

TEST(Reconstruction, OverdeterminedSetsUseLeastSquares) {
    std::mt19937_64 rng(47);
    const DensityBlock b = oracle::random_block(Spin(3), rng);
    ReconstructionOptions opt;
    opt.l_max = 2;
    DirectionSet many = canonical_directions(2);
    const auto axes = canonical_directions(1);
    many.directions.insert(many.directions.end(), axes.directions.begin(), axes.directions.end());
    many.label = "eight";
    opt.directions[2] = many;
    const auto rec = reconstruct(single(b), opt);
    EXPECT_LT(max_table_diff(rec.table.block(Spin(3)), decompose_block(b), 2), 1e-10);
}

TEST(Simulation, EigenstatesGiveASingleOutcome) {
    const auto f = fock_state(2, 0);
    const auto recs = simulate_counts(f, {0.0, 0.0}, 1000, 5);
    ASSERT_EQ(recs.size(), 1u);
    ASSERT_EQ(recs[0].counts.size(), 1u);
    EXPECT_EQ(recs[0].counts.at(2), 1000);
    for (int n : {1, 4, 9}) {
        const double th = 1.1, ph = -2.0;
        const auto c = simulate_counts(su2_coherent(Spin(n), th, ph), {th, ph}, 5000, 6);
        EXPECT_EQ(c[0].counts.size(), 1u);
        EXPECT_EQ(c[0].counts.at(n), 5000);
    }
}

TEST(Simulation, DeterministicAndSplitBySeed) {
    std::mt19937_64 rng(53);
    const auto sector = oracle::random_sector(4, rng);
    const auto a = simulate_counts(sector, {0.4, 0.5}, 100000, 77);
    const auto b = simulate_counts(sector, {0.4, 0.5}, 100000, 77);
    const auto c = simulate_counts(sector, {0.4, 0.5}, 100000, 78);
    ASSERT_EQ(a.size(), b.size());
    bool differs = false;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].counts, b[i].counts);
        differs = differs || a[i].counts != c[i].counts;
        total += a[i].total();
    }
    EXPECT_TRUE(differs);
    EXPECT_EQ(total, 100000);
    EXPECT_NE(split_seed(1, 0), split_seed(1, 1));
    EXPECT_NE(split_seed(1, 0), split_seed(2, 0));
}

TEST(Simulation, SerialAndParallelKernelsAreIdentical) {
    std::mt19937_64 rng(59);
    const auto sector = oracle::random_sector(6, rng);
    ReconstructionOptions opt;
    opt.l_max = 4;
    const auto dirs = opt.all_directions();
    const auto s = kernels::serial::simulate_directions(sector, dirs, 20000, 3);
    const auto p = kernels::omp::simulate_directions(sector, dirs, 20000, 3);
    ASSERT_EQ(s.size(), p.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_EQ(s[i].size(), p[i].size());
        for (std::size_t j = 0; j < s[i].size(); ++j) EXPECT_EQ(s[i][j].counts, p[i][j].counts);
    }
}

TEST(Simulation, EmpiricalDistributionConvergesInTotalVariation) {
    std::mt19937_64 rng(61);
    const DensityBlock b = oracle::random_block(Spin(4), rng);
    const SphericalDirection d{0.8, 1.9};
    const Eigen::VectorXd p = outcome_probabilities(b, d);
    for (std::int64_t shots : {10000, 1000000}) {
        const auto rec = simulate_counts(single(b), d, shots, 9)[0];
        double tv = 0.0, bound = 0.0;
        for (int i = 0; i < 5; ++i) {
            const int m2 = Spin(4).m2_at(i);
            const double emp = rec.counts.count(m2) ? static_cast<double>(rec.counts.at(m2)) / shots : 0.0;
            tv += 0.5 * std::abs(emp - p(i));
            bound += 0.5 * 3.0 * std::sqrt(p(i) * (1 - p(i)) / shots);
        }
        EXPECT_LT(tv, bound) << shots;
    }
}

TEST(Estimation, TrivialRecords) {
    CountRecord rec{{0.0, 0.0}, Spin(2), {{2, 500}}};
    for (int l = 0; l <= 4; ++l) {
        const auto m = estimate_moments(rec, l);
        EXPECT_DOUBLE_EQ(m.value, 1.0);
        EXPECT_DOUBLE_EQ(m.std_error, 0.0);
        EXPECT_EQ(m.shots, 500);
    }
    EXPECT_THROW(estimate_moments(std::vector<CountRecord>{}, 1), std::invalid_argument);
    CountRecord empty{{0.0, 0.0}, Spin(2), {}};
    EXPECT_THROW(estimate_moments(empty, 1), std::invalid_argument);
    EXPECT_DOUBLE_EQ(estimate_moments(empty, 0).value, 1.0);
    CountRecord other{{1.0, 0.0}, Spin(2), {{0, 3}}};
    EXPECT_THROW(estimate_moments(std::vector<CountRecord>{rec, other}, 1), std::invalid_argument);
}

TEST(Estimation, PooledOverBlocks) {
    CountRecord a{{0.0, 0.0}, Spin(2), {{2, 30}, {0, 10}}};
    CountRecord b{{0.0, 0.0}, Spin(1), {{1, 60}}};
    const auto m = estimate_moments(std::vector<CountRecord>{a, b}, 1);
    EXPECT_NEAR(m.value, (30 * 1.0 + 60 * 0.5) / 100, 1e-15);
    EXPECT_EQ(m.shots, 100);
}

TEST(Estimation, SampledTableTwoMomentsWithinThreeSigma) {
    const auto f = fock_state(2, 0);
    const auto five = canonical_directions(2);
    const double mu2[5] = {0.8618, 0.8618, 0.5000, 0.5000, 0.6382};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto m = estimate_moments(simulate_counts(f, five.directions[i], 1000000, 100 + i), 2);
        const double exact = moment_direct(f, five.directions[i], 2).aggregate;
        EXPECT_NEAR(exact, mu2[i], 1e-4);
        EXPECT_LT(std::abs(m.value - exact), 3 * m.std_error + 1e-12) << i;
    }
}

TEST(Reconstruction, CountModeWeightsAndErrors) {
    PolarizationSector s;
    std::mt19937_64 rng(67);
    s.add_block(0.25, oracle::random_block(Spin(1), rng));
    s.add_block(0.75, oracle::random_block(Spin(3), rng));
    ReconstructionOptions opt;
    opt.l_max = 3;
    const auto rec = reconstruct_sampled(s, opt, 400000, 12);
    EXPECT_NEAR(rec.table.block(Spin(1)).weight, 0.25, 0.01);
    EXPECT_NEAR(rec.table.block(Spin(3)).weight, 0.75, 0.01);
    EXPECT_EQ(rec.order_reached.at(Spin(1)), 1);
    EXPECT_EQ(rec.order_reached.at(Spin(3)), 3);
    ASSERT_TRUE(rec.seed.has_value());
    const auto truth = decompose(s);
    int outside = 0, total = 0;
    for (const auto& [spin, b] : rec.table.blocks()) {
        const auto& err = rec.std_errors.at(spin);
        for (int k = 1; k <= rec.order_reached.at(spin); ++k) {
            for (int q = -k; q <= k; ++q) {
                const auto f = static_cast<std::size_t>(MultipoleIndex::flat(k, q));
                const Complex d = b.at(k, q) - truth.block(spin).at(k, q);
                EXPECT_GT(err[f].real(), 0.0);
                outside += std::abs(d.real()) > 4 * err[f].real();
                total += 1;
            }
        }
    }
    EXPECT_LE(outside, 1) << "of " << total;
}

TEST(Reconstruction, CountModeNeedsEveryDirection) {
    const auto f = fock_state(1, 1);
    ReconstructionOptions opt;
    opt.l_max = 2;
    std::vector<CountRecord> recs;
    for (const auto& d : canonical_directions(1).directions) {
        auto r = simulate_counts(f, d, 1000, 1);
        recs.insert(recs.end(), r.begin(), r.end());
    }
    // no order-2 directions: reconstruction stops after the dipole
    const auto rec = reconstruct(recs, opt);
    EXPECT_EQ(rec.order_reached.at(Spin(2)), 1);
    recs.push_back({{0.0, 0.0}, Spin(2), {{3, 1}}});
    EXPECT_THROW(reconstruct(recs, opt), std::invalid_argument);
}

TEST(Reconstruction, NoisyErrorsShrinkAsInverseRootShots) {
    std::mt19937_64 rng(71);
    const DensityBlock b = oracle::random_block(Spin(2), rng);
    const auto truth = decompose_block(b);
    ReconstructionOptions opt;
    opt.l_max = 2;
    std::vector<double> rms;
    for (std::int64_t shots : {10000, 100000, 1000000}) {
        double acc = 0.0;
        int count = 0;
        for (std::uint64_t rep = 0; rep < 40; ++rep) {
            const auto rec = reconstruct_sampled(single(b), opt, shots, 1000 + rep);
            const auto& t = rec.table.block(Spin(2));
            for (int k = 1; k <= 2; ++k)
                for (int q = -k; q <= k; ++q) {
                    acc += std::norm(t.at(k, q) - truth.at(k, q));
                    ++count;
                }
        }
        rms.push_back(std::sqrt(acc / count));
    }
    for (std::size_t i = 1; i < rms.size(); ++i) {
        const double ratio = rms[i - 1] / rms[i];
        EXPECT_GT(ratio, std::sqrt(10.0) / 2) << i;
        EXPECT_LT(ratio, std::sqrt(10.0) * 2) << i;
    }
}
