#pragma once

// SU(2) special functions. Condon-Shortley phase convention throughout.
// Magnetic quantum numbers are doubled integers (m2 = 2m).

#include <vector>

#include "polmult/exact.hpp"
#include "polmult/types.hpp"

namespace polmult {

/// C^{j m}_{j1 m1, j2 m2} in exact arithmetic, as coefficient * sqrt(radicand).
///
/// Zero when m != m1 + m2 or the triangle rule fails. Throws
/// std::invalid_argument when some |m| exceeds its j or j - m is not an
/// integer.
exact::RootRational clebsch_gordan_exact(Spin j1, int m1_2, Spin j2, int m2_2, Spin j, int m_2);

/// Floating-point projection of clebsch_gordan_exact, memoized (the memo
/// table is safe for concurrent use).
double clebsch_gordan(Spin j1, int m1_2, Spin j2, int m2_2, Spin j, int m_2);

/// C^{S m}_{S m, K 0} written over the m-independent radicand
/// (2S+1) (2S-K)! / (2S+K+1)!, so that sums over m stay exact.
exact::RootRational clebsch_gordan_diagonal(Spin s, int m_2, int k);

/// Closed form C^{S S}_{S S, K 0} = sqrt(2S+1) (2S)! / sqrt((2S-K)! (2S+1+K)!).
exact::RootRational clebsch_gordan_stretched(Spin s, int k);

/// <j m| exp(i theta S_2) |j mp>. Real; the matrix over (m, mp) is orthogonal.
double wigner_small_d(Spin j, int m_2, int mp_2, double theta);

/// Full (2j+1)x(2j+1) matrix of wigner_small_d, rows/cols in descending m.
RealMatrix wigner_small_d_matrix(Spin j, double theta);

/// <j m| exp(i theta S_2) exp(i phi S_3) |j mp> = d(m, mp; theta) e^{i phi mp}.
Complex wigner_D(Spin j, int m_2, int mp_2, double theta, double phi);

/// Unitary matrix of the two-angle displacement, descending m ordering.
Matrix wigner_D_matrix(Spin j, double theta, double phi);

/// Orthonormal Y_kq with the Condon-Shortley phase.
Complex spherical_harmonic(int k, int q, double theta, double phi);

/// All Y_kq for k <= k_max at one point, indexed by MultipoleIndex::flat.
std::vector<Complex> spherical_harmonics_upto(int k_max, double theta, double phi);

/// Legendre polynomial P_l(x) by the three-term recurrence.
double legendre_p(int l, double x);

namespace detail {
// Exposed for tests: the two evaluation routes of wigner_small_d.
double wigner_small_d_sum(Spin j, int m_2, int mp_2, double theta);
double wigner_small_d_jacobi(Spin j, int m_2, int mp_2, double theta);
inline constexpr int kSmallDSumLimit = 40;  // largest 2j evaluated by the factorial sum (cancellation grows past this)
}  // namespace detail

}  // namespace polmult
