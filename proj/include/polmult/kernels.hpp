#pragma once

// Hot loops in two flavours: a plain serial reference and an OpenMP version.
// Simulation results are bit-identical between the two; grid values agree to
// rounding (the summation order differs). The serial versions are the oracle
// in tests and the baseline in benchmarks.

#include <cstdint>
#include <vector>

#include "polmult/multipole.hpp"
#include "polmult/quasi.hpp"
#include "polmult/tomography.hpp"

namespace polmult::kernels {

namespace serial {

/// W_r at every grid node (theta-major), one quasi_value call per node.
std::vector<double> quasi_grid(const BlockMultipoles& b, double r, const SphereGrid& grid);

/// simulate_counts for each direction, seeded with split_seed(seed, i).
std::vector<std::vector<CountRecord>> simulate_directions(const PolarizationSector& sector,
                                                          const std::vector<SphericalDirection>& dirs,
                                                          std::int64_t shots, std::uint64_t seed);

}  // namespace serial

namespace omp {

/// Same values as serial::quasi_grid; the Legendre part is shared along each
/// theta ring and rings are evaluated in parallel.
std::vector<double> quasi_grid(const BlockMultipoles& b, double r, const SphereGrid& grid);

std::vector<std::vector<CountRecord>> simulate_directions(const PolarizationSector& sector,
                                                          const std::vector<SphericalDirection>& dirs,
                                                          std::int64_t shots, std::uint64_t seed);

}  // namespace omp

int max_threads();

}  // namespace polmult::kernels
