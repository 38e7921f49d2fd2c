#include "polmult/directions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>

#include "polmult/angular.hpp"

namespace polmult {

double line_angle(const SphericalDirection& a, const SphericalDirection& b) {
    const double c = std::clamp(std::abs(a.unit().dot(b.unit())), 0.0, 1.0);
    return std::acos(c);
}

double min_line_angle(const DirectionSet& set) {
    double best = kPi;
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            best = std::min(best, line_angle(set.directions[i], set.directions[j]));
        }
    }
    return best;
}

Matrix harmonic_design(int order, const DirectionSet& set) {
    if (order < 0) throw std::invalid_argument("harmonic_design: order must be non-negative");
    Matrix y(static_cast<Eigen::Index>(set.size()), 2 * order + 1);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& d = set.directions[i];
        for (int q = -order; q <= order; ++q) {
            y(static_cast<Eigen::Index>(i), q + order) = spherical_harmonic(order, q, d.theta, d.phi);
        }
    }
    return y;
}

RealMatrix gram_matrix(int order, const DirectionSet& set) {
    const auto n = static_cast<Eigen::Index>(set.size());
    RealMatrix p(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double c = set.directions[static_cast<std::size_t>(i)].unit().dot(
                set.directions[static_cast<std::size_t>(j)].unit());
            p(i, j) = legendre_p(order, std::clamp(c, -1.0, 1.0));
        }
    }
    return p;
}

double design_condition(int order, const DirectionSet& set) {
    const Eigen::JacobiSVD<Matrix> svd(harmonic_design(order, set));
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return std::numeric_limits<double>::infinity();
    const double lo = sv(sv.size() - 1);
    if (lo <= 0.0 || static_cast<Eigen::Index>(set.size()) < 2 * order + 1) {
        return std::numeric_limits<double>::infinity();
    }
    const double ratio = sv(0) / lo;
    return ratio * ratio;
}

namespace {

DirectionSet axes() {
    return {"axes", {{kPi / 2, 0.0}, {kPi / 2, kPi / 2}, {0.0, 0.0}}};
}

DirectionSet icosahedral_lines() {
    const double g = 1.0 + std::sqrt(5.0);
    const std::vector<Eigen::Vector3d> v = {{0, 2, g}, {0, -2, g}, {2, g, 0}, {-2, g, 0}, {g, 0, 2}};
    DirectionSet set{"icosahedral", {}};
    for (const auto& x : v) set.directions.push_back(SphericalDirection::from_vector(x));
    return set;
}

// Upper-hemisphere representative, so that output does not depend on which
// end of a line the optimizer converged to.
Eigen::Vector3d fold(Eigen::Vector3d v) {
    v.normalize();
    const double eps = 1e-12;
    if (v.z() < -eps || (std::abs(v.z()) <= eps && (v.y() < -eps || (std::abs(v.y()) <= eps && v.x() < 0)))) v = -v;
    return v;
}

double min_abs_cos_gap(const std::vector<Eigen::Vector3d>& pts) {
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) worst = std::max(worst, std::abs(pts[i].dot(pts[j])));
    }
    return worst;
}

// Projected gradient descent on sum_{i<j} (n_i . n_j)^(2p), stepping p up so
// the energy approaches the largest |cos| (the smallest line angle).
std::vector<Eigen::Vector3d> relax(std::vector<Eigen::Vector3d> pts) {
    const std::size_t n = pts.size();
    for (int p : {2, 4, 8, 16, 32}) {
        double step = 0.05;
        for (int it = 0; it < 1500; ++it) {
            std::vector<Eigen::Vector3d> grad(n, Eigen::Vector3d::Zero());
            const double scale = min_abs_cos_gap(pts);
            if (scale <= 0.0) break;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double c = pts[i].dot(pts[j]);
                    // derivative of (c / scale)^(2p), normalized to avoid underflow
                    const double g = 2.0 * p * std::pow(c / scale, 2 * p - 1) / scale;
                    grad[i] += g * pts[j];
                    grad[j] += g * pts[i];
                }
            }
            double gmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] -= grad[i].dot(pts[i]) * pts[i];
                gmax = std::max(gmax, grad[i].norm());
            }
            if (gmax < 1e-14) break;
            for (std::size_t i = 0; i < n; ++i) pts[i] = (pts[i] - (step / gmax) * grad[i]).normalized();
            step *= 0.997;
        }
    }
    return pts;
}

// P_L(x) and P_L'(x) by the upward recurrences.
std::pair<double, double> legendre_with_derivative(int order, double x) {
    double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
    if (order == 0) return {1.0, 0.0};
    for (int l = 1; l < order; ++l) {
        const double p2 = ((2 * l + 1) * x * p1 - l * p0) / (l + 1);
        const double d2 = d0 + (2 * l + 1) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    return {p1, d1};
}

double log_det_gram(int order, const std::vector<Eigen::Vector3d>& pts, RealMatrix* inverse) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    RealMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = legendre_with_derivative(order, std::clamp(pts[static_cast<std::size_t>(i)].dot(pts[static_cast<std::size_t>(j)]), -1.0, 1.0)).first;
    const Eigen::LDLT<RealMatrix> ldlt(g);
    const auto d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 0.0) return -std::numeric_limits<double>::infinity();
    if (inverse) *inverse = ldlt.solve(RealMatrix::Identity(n, n));
    return d.array().log().sum();
}

// Max-spread optima can be singular for the degree-L design (seven lines
// settle on the cube axes and diagonals). Ascend log det of the Gram matrix,
// accepting only steps that keep the smallest line angle within 10% of the
// spread optimum.
std::vector<Eigen::Vector3d> condition_for_order(std::vector<Eigen::Vector3d> pts, int order) {
    const std::size_t n = pts.size();
    const double angle_floor = 0.9 * std::acos(std::min(1.0, min_abs_cos_gap(pts)));
    const double cos_ceiling = std::cos(angle_floor);
    // nudge off an exactly singular start
    std::mt19937_64 rng(0x0c0ffee);
    std::normal_distribution<double> normal(0.0, 1e-3);
    RealMatrix inv;
    double current = log_det_gram(order, pts, &inv);
    for (int tries = 0; !std::isfinite(current) && tries < 50; ++tries) {
        for (auto& v : pts) v = (v + Eigen::Vector3d(normal(rng), normal(rng), normal(rng))).normalized();
        current = log_det_gram(order, pts, &inv);
    }
    if (!std::isfinite(current)) return pts;
    double step = 0.05;
    for (int it = 0; it < 3000 && step > 1e-10; ++it) {
        std::vector<Eigen::Vector3d> grad(n, Eigen::Vector3d::Zero());
        double gmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double dp = legendre_with_derivative(order, pts[i].dot(pts[j])).second;
                grad[i] += 2.0 * inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * dp * pts[j];
            }
            grad[i] -= grad[i].dot(pts[i]) * pts[i];
            gmax = std::max(gmax, grad[i].norm());
        }
        if (gmax < 1e-12) break;
        std::vector<Eigen::Vector3d> trial(n);
        for (std::size_t i = 0; i < n; ++i) trial[i] = (pts[i] + (step / gmax) * grad[i]).normalized();
        RealMatrix trial_inv;
        const double value = log_det_gram(order, trial, &trial_inv);
        if (value > current && min_abs_cos_gap(trial) <= cos_ceiling) {
            pts = std::move(trial);
            inv = std::move(trial_inv);
            current = value;
            step *= 1.2;
        } else {
            step *= 0.5;
        }
    }
    return pts;
}

}  // namespace

DirectionSet spread_lines(int count, std::uint64_t seed, int restarts, int design_order) {
    if (count < 1) throw std::invalid_argument("spread_lines: need at least one line");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Eigen::Vector3d> best;
    double best_gap = 2.0;
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(count));
        for (auto& v : pts) v = Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized();
        if (count > 1) pts = relax(std::move(pts));
        if (design_order > 0 && count > 1) pts = condition_for_order(std::move(pts), design_order);
        const double gap = count > 1 ? min_abs_cos_gap(pts) : 0.0;
        if (gap < best_gap) {
            best_gap = gap;
            best = std::move(pts);
        }
    }
    DirectionSet set{"spread-" + std::to_string(count), {}};
    for (const auto& v : best) set.directions.push_back(SphericalDirection::from_vector(fold(v)));
    return set;
}

DirectionSet canonical_directions(int order) {
    if (order < 1) throw std::invalid_argument("canonical_directions: order must be >= 1");
    if (order == 1) return axes();
    if (order == 2) return icosahedral_lines();
    static std::mutex mutex;
    static std::map<int, DirectionSet> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(order); it != cache.end()) return it->second;
    constexpr std::uint64_t kSeed = 0x5eed0f5u;
    for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
        DirectionSet set = spread_lines(2 * order + 1, kSeed + attempt, 8, order);
        set.label = "spread-L" + std::to_string(order);
        if (design_condition(order, set) < kMaxDesignCondition) return cache.emplace(order, set).first->second;
    }
    throw NumericalError("canonical_directions: no nonsingular direction set found for L=" + std::to_string(order));
}

}  // namespace polmult
