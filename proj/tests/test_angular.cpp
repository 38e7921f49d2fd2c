#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "polmult/angular.hpp"
#include "support.hpp"

using namespace polmult;

namespace {

double cg(int j1, int m1, int j2, int m2, int j, int m) {
    return clebsch_gordan_exact(Spin(j1), m1, Spin(j2), m2, Spin(j), m).to_double();
}

}  // namespace

TEST(ClebschGordan, TextbookValues) {
    const double r2 = 1.0 / std::sqrt(2.0), r3 = 1.0 / std::sqrt(3.0);
    EXPECT_NEAR(cg(1, 1, 1, -1, 2, 0), r2, 1e-15);
    EXPECT_NEAR(cg(1, 1, 1, -1, 0, 0), r2, 1e-15);
    EXPECT_NEAR(cg(1, -1, 1, 1, 0, 0), -r2, 1e-15);
    EXPECT_NEAR(cg(2, 0, 2, 0, 4, 0), std::sqrt(2.0 / 3.0), 1e-15);
    EXPECT_NEAR(cg(2, 0, 2, 0, 2, 0), 0.0, 1e-15);
    EXPECT_NEAR(cg(2, 2, 2, -2, 0, 0), r3, 1e-15);
    EXPECT_NEAR(cg(2, 0, 2, 0, 0, 0), -r3, 1e-15);
    EXPECT_NEAR(cg(2, 2, 1, -1, 3, 1), std::sqrt(1.0 / 3.0), 1e-15);
}

TEST(ClebschGordan, SelectionRulesGiveZero) {
    EXPECT_TRUE(clebsch_gordan_exact(Spin(2), 2, Spin(2), 0, Spin(2), 0).is_zero());  // m1 + m2 != m
    EXPECT_TRUE(clebsch_gordan_exact(Spin(2), 0, Spin(2), 0, Spin(6), 0).is_zero());  // triangle
    EXPECT_THROW(clebsch_gordan_exact(Spin(2), 4, Spin(2), 0, Spin(2), 4), std::invalid_argument);
    EXPECT_THROW(clebsch_gordan_exact(Spin(2), 1, Spin(2), 0, Spin(2), 1), std::invalid_argument);
}

TEST(ClebschGordan, OrthogonalityOverProjections) {
    for (int j1 = 0; j1 <= 6; ++j1) {
        for (int j2 = 0; j2 <= 5; ++j2) {
            for (int j = std::abs(j1 - j2); j <= j1 + j2; j += 2) {
                for (int jp = std::abs(j1 - j2); jp <= j1 + j2; jp += 2) {
                    for (int m = -std::min(j, jp); m <= std::min(j, jp); m += 2) {
                        double acc = 0.0;
                        for (int m1 = -j1; m1 <= j1; m1 += 2) {
                            const int m2 = m - m1;
                            if (std::abs(m2) > j2) continue;
                            acc += cg(j1, m1, j2, m2, j, m) * cg(j1, m1, j2, m2, jp, m);
                        }
                        EXPECT_NEAR(acc, j == jp ? 1.0 : 0.0, 1e-13) << j1 << ' ' << j2 << ' ' << j << ' ' << jp << ' ' << m;
                    }
                }
            }
        }
    }
}

TEST(ClebschGordan, MemoizedFloatMatchesExact) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int j1 = static_cast<int>(rng() % 12), j2 = static_cast<int>(rng() % 12);
        const int j = std::abs(j1 - j2) + 2 * static_cast<int>(rng() % (std::min(j1, j2) + 1));
        const int m1 = -j1 + 2 * static_cast<int>(rng() % (j1 + 1));
        const int m = -j + 2 * static_cast<int>(rng() % (j + 1));
        if (std::abs(m - m1) > j2) continue;
        const double a = clebsch_gordan(Spin(j1), m1, Spin(j2), m - m1, Spin(j), m);
        EXPECT_NEAR(a, cg(j1, m1, j2, m - m1, j, m), 1e-15);
        EXPECT_EQ(a, clebsch_gordan(Spin(j1), m1, Spin(j2), m - m1, Spin(j), m));
    }
}

TEST(ClebschGordan, DiagonalFormMatchesGeneral) {
    for (int n = 0; n <= 20; ++n) {
        for (int k = 0; k <= n; ++k) {
            for (int m2 = -n; m2 <= n; m2 += 2) {
                const auto d = clebsch_gordan_diagonal(Spin(n), m2, k);
                const auto g = clebsch_gordan_exact(Spin(n), m2, Spin(2 * k), 0, Spin(n), m2);
                EXPECT_EQ(d.square(), g.square()) << n << ' ' << k << ' ' << m2;
                EXPECT_EQ(d.sign(), g.sign());
            }
        }
    }
}

TEST(ClebschGordan, StretchedClosedForm) {
    for (int n = 0; n <= 40; ++n) {
        for (int k = 0; k <= n; ++k) {
            const auto a = clebsch_gordan_stretched(Spin(n), k);
            const auto b = clebsch_gordan_diagonal(Spin(n), n, k);
            EXPECT_EQ(a.square(), b.square());
            EXPECT_EQ(a.sign(), b.sign());
        }
    }
}

TEST(WignerSmallD, MatchesMatrixExponential) {
    for (int n = 0; n <= 14; ++n) {
        for (double theta : {0.0, 0.3, 1.1, kPi / 2, 2.5, kPi, -0.7}) {
            const Matrix ref = oracle::displacement_by_expm(Spin(n), theta, 0.0);
            const RealMatrix d = wigner_small_d_matrix(Spin(n), theta);
            EXPECT_LT(oracle::max_abs(ref - d.cast<Complex>()), 1e-12) << "2j=" << n << " theta=" << theta;
        }
    }
}

TEST(WignerSmallD, JacobiRouteAgreesWithSum) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(0.0, kPi);
    for (int n = 1; n <= detail::kSmallDSumLimit; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            const int m = -n + 2 * static_cast<int>(rng() % (n + 1));
            const int mp = -n + 2 * static_cast<int>(rng() % (n + 1));
            const double th = angle(rng);
            EXPECT_NEAR(detail::wigner_small_d_jacobi(Spin(n), m, mp, th), detail::wigner_small_d_sum(Spin(n), m, mp, th),
                        1e-10)
                << "2j=" << n << " m2=" << m << " mp2=" << mp << " theta=" << th;
        }
    }
}

TEST(WignerSmallD, LargeSpinsStayOrthogonalAndMatchExpm) {
    for (int n : {61, 80, 101, 140}) {
        const double theta = 0.9;
        const RealMatrix d = wigner_small_d_matrix(Spin(n), theta);
        EXPECT_LT((d * d.transpose() - RealMatrix::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff(), 1e-9) << n;
        if (n <= 101) {
            const Matrix ref = oracle::displacement_by_expm(Spin(n), theta, 0.0);
            EXPECT_LT(oracle::max_abs(ref - d.cast<Complex>()), 1e-9) << n;
        }
    }
}

TEST(WignerD, MatchesProductOfExponentials) {
    for (int n : {1, 2, 3, 6, 9}) {
        const Matrix ref = oracle::displacement_by_expm(Spin(n), 1.234, -0.456);
        EXPECT_LT(oracle::max_abs(ref - wigner_D_matrix(Spin(n), 1.234, -0.456)), 1e-12);
        EXPECT_NEAR(std::abs(wigner_D(Spin(n), n, n - 2, 1.234, -0.456) - ref(0, 1)), 0.0, 1e-12);
    }
}

TEST(WignerD, RotatesS3OntoTheDirection) {
    const Spin s(5);
    const auto g = oracle::generators(s);
    for (auto [th, ph] : {std::pair{0.4, 1.3}, std::pair{2.2, -0.8}, std::pair{kPi / 2, kPi / 2}}) {
        const Matrix d = wigner_D_matrix(s, th, ph);
        const Eigen::Vector3d n = SphericalDirection{th, ph}.unit();
        const Matrix sn = n.x() * g.jx + n.y() * g.jy + n.z() * g.jz;
        EXPECT_LT(oracle::max_abs(d.adjoint() * g.jz * d - sn), 1e-12);
    }
}

TEST(SphericalHarmonics, MatchStandardLibrary) {
    for (int l = 0; l <= 12; ++l) {
        for (int m = -l; m <= l; ++m) {
            for (auto [th, ph] : {std::pair{0.3, 0.2}, std::pair{1.7, -2.1}, std::pair{3.0, 4.0}}) {
                const int am = std::abs(m);
                Complex ref = std::sph_legendre(l, am, th) * std::polar(1.0, am * ph);
                if (m < 0) ref = (am % 2 ? -1.0 : 1.0) * std::conj(ref);
                EXPECT_NEAR(std::abs(spherical_harmonic(l, m, th, ph) - ref), 0.0, 1e-13) << l << ' ' << m;
            }
        }
    }
}

TEST(SphericalHarmonics, TableMatchesSingleEvaluations) {
    const auto all = spherical_harmonics_upto(20, 0.77, 1.9);
    ASSERT_EQ(all.size(), 441u);
    for (int l = 0; l <= 20; ++l)
        for (int m = -l; m <= l; ++m)
            EXPECT_NEAR(std::abs(all[static_cast<std::size_t>(MultipoleIndex::flat(l, m))] - spherical_harmonic(l, m, 0.77, 1.9)),
                        0.0, 1e-14);
}

TEST(Legendre, MatchesStandardLibrary) {
    for (int l = 0; l <= 30; ++l)
        for (double x : {-1.0, -0.6, 0.0, 0.31, 0.9, 1.0}) EXPECT_NEAR(legendre_p(l, x), std::legendre(l, x), 1e-13);
}
