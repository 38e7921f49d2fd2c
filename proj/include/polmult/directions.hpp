#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polmult/types.hpp"

namespace polmult {

/// Measurement directions treated as lines: n and -n give the same even
/// moments, and the stored vector fixes the sign of odd ones.
struct DirectionSet {
    std::string label;
    std::vector<SphericalDirection> directions;

    std::size_t size() const { return directions.size(); }
};

/// Angle between the lines through a and b, in [0, pi/2].
double line_angle(const SphericalDirection& a, const SphericalDirection& b);
double min_line_angle(const DirectionSet& set);

/// Y_Lq(n_i): rows are directions, columns q = -L..L.
Matrix harmonic_design(int order, const DirectionSet& set);

/// P_L(cos omega_ij) = 4pi/(2L+1) (Y Y^dagger)_ij, with omega_ij the angle
/// between directions i and j.
RealMatrix gram_matrix(int order, const DirectionSet& set);

/// Condition number of the Gram matrix, (sigma_max / sigma_min)^2 of the
/// design; +inf when singular.
double design_condition(int order, const DirectionSet& set);

inline constexpr double kMaxDesignCondition = 1e8;

/// L = 1: coordinate axes. L = 2: the five icosahedral lines
/// (0, +-2, 1+sqrt5), (+-2, 1+sqrt5, 0), (1+sqrt5, 0, 2). L >= 3: 2L+1 lines
/// spread by maximizing the smallest pairwise line angle from a fixed seed,
/// then moved (keeping that angle within 10%) to maximize det P_L, since the
/// most symmetric spreads can make the order-L design singular.
/// Throws NumericalError if no nonsingular set is found. Results are cached.
DirectionSet canonical_directions(int order);

/// The optimizer behind canonical_directions, exposed for tests. With
/// design_order > 0 the conditioning stage for that order runs as well.
DirectionSet spread_lines(int count, std::uint64_t seed, int restarts = 8, int design_order = 0);

}  // namespace polmult
