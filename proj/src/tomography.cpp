#include "polmult/tomography.hpp"

#include <functional>
#include <random>
#include <sstream>

#include "polmult/angular.hpp"
#include "polmult/kernels.hpp"
#include "polmult/stokes.hpp"

namespace polmult {

namespace {

constexpr double kSameDirection = 1e-9;

bool same_direction(const SphericalDirection& a, const SphericalDirection& b) {
    return (a.unit() - b.unit()).norm() < kSameDirection;
}

std::string describe(const DirectionSet& set) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < set.size(); ++i) {
        os << (i ? ", " : "") << "(theta=" << set.directions[i].theta << ", phi=" << set.directions[i].phi << ")";
    }
    return os.str();
}

std::vector<std::int64_t> multinomial(std::int64_t n, const std::vector<double>& p, std::mt19937_64& rng) {
    std::vector<std::int64_t> out(p.size(), 0);
    double mass = 0.0;
    for (double x : p) mass += x;
    for (std::size_t k = 0; k < p.size() && n > 0; ++k) {
        if (k + 1 == p.size()) {
            out[k] = n;
            break;
        }
        const double prob = mass > 0.0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> draw(n, prob);
        out[k] = draw(rng);
        n -= out[k];
        mass -= p[k];
    }
    return out;
}

double power(double m, int ell) {
    double v = 1.0;
    for (int e = 0; e < ell; ++e) v *= m;
    return v;
}

}  // namespace

std::int64_t CountRecord::total() const {
    std::int64_t n = 0;
    for (const auto& [m2, c] : counts) n += c;
    return n;
}

std::array<Complex, 3> invert_dipole(const std::array<double, 3>& mu, Spin s) {
    if (s.two_s < 1) throw std::invalid_argument("invert_dipole: needs S >= 1/2");
    const double S = s.value();
    const double pre = std::sqrt(3.0 / (2.0 * S * (S + 1.0) * (2.0 * S + 1.0)));
    const Complex i(0.0, 1.0);
    return {pre * (-mu[0] + i * mu[1]), Complex(pre * std::sqrt(2.0) * mu[2]), pre * (mu[0] + i * mu[1])};
}

OrderSolution invert_order(int order, const DirectionSet& directions, const std::vector<double>& mu,
                           const BlockMultipoles& lower) {
    const Spin s = lower.spin;
    const int L = order;
    if (L < 1 || L > s.two_s) throw std::invalid_argument("invert_order: need 1 <= L <= 2S");
    const auto n = static_cast<Eigen::Index>(directions.size());
    if (n < 2 * L + 1) {
        throw std::invalid_argument("invert_order: order " + std::to_string(L) + " needs at least " +
                                    std::to_string(2 * L + 1) + " directions, got " + std::to_string(n));
    }
    if (mu.size() != directions.size()) throw std::invalid_argument("invert_order: one moment per direction required");

    OrderSolution sol;
    sol.order = L;
    sol.condition_number = design_condition(L, directions);
    if (!(sol.condition_number <= kMaxDesignCondition)) {
        std::ostringstream os;
        os << "invert_order: Gram matrix for L=" << L << " is singular or ill-conditioned (condition "
           << sol.condition_number << ") for directions " << describe(directions);
        throw NumericalError(os.str());
    }

    const double norm = std::sqrt(4.0 * kPi / s.dim());
    const double c = f_coeff(s, L, L) * norm;
    Eigen::VectorXd rhs(n);
    Eigen::MatrixXd design(n, 2 * L + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& d = directions.directions[static_cast<std::size_t>(i)];
        const auto y = spherical_harmonics_upto(L, d.theta, d.phi);
        Complex known = 0.0;
        for (int k = L % 2; k < L; k += 2) {
            Complex inner = 0.0;
            for (int q = -k; q <= k; ++q) inner += lower.at(k, q) * y[static_cast<std::size_t>(MultipoleIndex::flat(k, q))];
            known += f_coeff(s, k, L) * inner;
        }
        rhs(i) = mu[static_cast<std::size_t>(i)] - norm * known.real();
        // rho_Lq Y_Lq + rho_L,-q Y_L,-q = 2 Re(rho_Lq) Re(Y_Lq) - 2 Im(rho_Lq) Im(Y_Lq)
        design(i, 0) = c * y[static_cast<std::size_t>(MultipoleIndex::flat(L, 0))].real();
        for (int q = 1; q <= L; ++q) {
            const Complex yq = y[static_cast<std::size_t>(MultipoleIndex::flat(L, q))];
            design(i, 2 * q - 1) = 2.0 * c * yq.real();
            design(i, 2 * q) = -2.0 * c * yq.imag();
        }
    }
    const Eigen::VectorXd x = design.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd res = rhs - design * x;
    sol.residuals.assign(res.data(), res.data() + res.size());

    sol.rho.assign(static_cast<std::size_t>(2 * L + 1), Complex(0.0));
    sol.rho[static_cast<std::size_t>(L)] = x(0);
    for (int q = 1; q <= L; ++q) {
        const Complex v(x(2 * q - 1), x(2 * q));
        sol.rho[static_cast<std::size_t>(L + q)] = v;
        sol.rho[static_cast<std::size_t>(L - q)] = (q % 2 ? -1.0 : 1.0) * std::conj(v);
    }
    return sol;
}

OrderSolution invert_order(int order, const DirectionSet& directions, const std::vector<MomentRecord>& moments,
                           const BlockMultipoles& lower) {
    if (moments.size() != directions.size()) throw std::invalid_argument("invert_order: one moment per direction required");
    std::vector<double> mu;
    for (std::size_t i = 0; i < moments.size(); ++i) {
        if (moments[i].ell != order) throw std::invalid_argument("invert_order: moment order does not match L");
        if (!same_direction(moments[i].direction, directions.directions[i])) {
            throw std::invalid_argument("invert_order: moment direction does not match the direction set");
        }
        mu.push_back(moments[i].value);
    }
    return invert_order(order, directions, mu, lower);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    // SplitMix64 finalizer over the (seed, index) pair
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

Eigen::VectorXd outcome_probabilities(const DensityBlock& block, SphericalDirection dir) {
    const Matrix d = wigner_D_matrix(block.spin, dir.theta, dir.phi);
    Eigen::VectorXd p = (d * block.matrix * d.adjoint()).diagonal().real().cwiseMax(0.0);
    const double total = p.sum();
    if (total > 0.0) p /= total;
    return p;
}

std::vector<CountRecord> simulate_counts(const PolarizationSector& sector, SphericalDirection dir, std::int64_t shots,
                                         std::uint64_t seed) {
    if (shots < 0) throw std::invalid_argument("simulate_counts: shots must be non-negative");
    std::mt19937_64 rng(seed);
    std::vector<double> weights;
    for (const auto& [s, wb] : sector.blocks()) weights.push_back(wb.weight);
    const auto per_block = multinomial(shots, weights, rng);

    std::vector<CountRecord> out;
    std::size_t b = 0;
    for (const auto& [s, wb] : sector.blocks()) {
        CountRecord rec{dir, s, {}};
        const std::int64_t n = per_block[b++];
        const Eigen::VectorXd p = outcome_probabilities(wb.block, dir);
        const auto draws = multinomial(n, std::vector<double>(p.data(), p.data() + p.size()), rng);
        for (int i = 0; i < s.dim(); ++i) {
            if (draws[static_cast<std::size_t>(i)] > 0) rec.counts[s.m2_at(i)] = draws[static_cast<std::size_t>(i)];
        }
        out.push_back(std::move(rec));
    }
    return out;
}

MomentRecord estimate_moments(const std::vector<CountRecord>& counts, int ell) {
    if (counts.empty()) throw std::invalid_argument("estimate_moments: no count records");
    if (ell < 0) throw std::invalid_argument("estimate_moments: ell must be non-negative");
    MomentRecord out{counts.front().direction, ell, 0.0, 0.0, 0};
    double first = 0.0, second = 0.0;
    for (const auto& rec : counts) {
        if (!same_direction(rec.direction, out.direction)) {
            throw std::invalid_argument("estimate_moments: records mix different directions");
        }
        for (const auto& [m2, c] : rec.counts) {
            if (c < 0) throw std::invalid_argument("estimate_moments: negative count");
            const double v = power(0.5 * m2, ell);
            first += static_cast<double>(c) * v;
            second += static_cast<double>(c) * v * v;
            out.shots += c;
        }
    }
    if (ell == 0) {
        out.value = 1.0;
        return out;
    }
    if (out.shots == 0) throw std::invalid_argument("estimate_moments: no events recorded");
    const double n = static_cast<double>(out.shots);
    out.value = first / n;
    out.std_error = std::sqrt(std::max(second / n - out.value * out.value, 0.0) / n);
    return out;
}

MomentRecord estimate_moments(const CountRecord& counts, int ell) {
    return estimate_moments(std::vector<CountRecord>{counts}, ell);
}

DirectionSet ReconstructionOptions::directions_for(int order) const {
    auto it = directions.find(order);
    return it != directions.end() ? it->second : canonical_directions(order);
}

std::vector<SphericalDirection> ReconstructionOptions::all_directions() const {
    std::vector<SphericalDirection> out;
    for (int L = 1; L <= l_max; ++L) {
        for (const auto& d : directions_for(L).directions) {
            bool seen = false;
            for (const auto& e : out) seen = seen || same_direction(d, e);
            if (!seen) out.push_back(d);
        }
    }
    return out;
}

namespace {

// Moment source for one block: order L, direction index within set L.
using MomentSource = std::function<double(int, std::size_t)>;

struct BlockSolve {
    BlockMultipoles multipoles;
    std::vector<OrderDiagnostics> diagnostics;
};

BlockSolve solve_block(Spin s, double weight, int l_top, const std::vector<DirectionSet>& sets,
                       const MomentSource& mu) {
    BlockSolve out{BlockMultipoles::zeros(s, weight), {}};
    out.multipoles.at(0, 0) = 1.0 / std::sqrt(static_cast<double>(s.dim()));
    for (int L = 1; L <= l_top; ++L) {
        const DirectionSet& set = sets[static_cast<std::size_t>(L)];
        std::vector<double> values(set.size());
        for (std::size_t j = 0; j < set.size(); ++j) values[j] = mu(L, j);
        const OrderSolution sol = invert_order(L, set, values, out.multipoles);
        for (int q = -L; q <= L; ++q) out.multipoles.at(L, q) = sol.rho[static_cast<std::size_t>(q + L)];
        double worst = 0.0;
        for (double r : sol.residuals) worst = std::max(worst, std::abs(r));
        out.diagnostics.push_back({s, L, set.label, sol.condition_number, worst});
    }
    return out;
}

std::vector<DirectionSet> direction_sets(const ReconstructionOptions& options, int l_top) {
    std::vector<DirectionSet> sets(static_cast<std::size_t>(l_top + 1));
    for (int L = 1; L <= l_top; ++L) sets[static_cast<std::size_t>(L)] = options.directions_for(L);
    return sets;
}

// Exact mode accepts l_max = 0 (monopole only); measured data need directions.
void check_options(const ReconstructionOptions& options, int lowest = 1) {
    if (options.l_max < lowest) throw std::invalid_argument("reconstruct: l_max must be >= " + std::to_string(lowest));
}

}  // namespace

Reconstruction reconstruct(const PolarizationSector& sector, const ReconstructionOptions& options) {
    check_options(options, 0);
    Reconstruction out;
    int top_all = 0;
    for (const auto& [s, wb] : sector.blocks()) top_all = std::max(top_all, std::min(options.l_max, s.two_s));
    const auto sets = direction_sets(options, top_all);

    for (const auto& [s, wb] : sector.blocks()) {
        const int l_top = std::min(options.l_max, s.two_s);
        auto& moments = out.moments[s];
        const MomentSource mu = [&](int L, std::size_t j) {
            const SphericalDirection d = sets[static_cast<std::size_t>(L)].directions[j];
            const double v = moment_direct(wb.block, d, L);
            moments.push_back({d, L, v, 0.0, 0});
            return v;
        };
        BlockSolve solved = solve_block(s, wb.weight, l_top, sets, mu);
        out.table.add_block(std::move(solved.multipoles));
        out.diagnostics.insert(out.diagnostics.end(), solved.diagnostics.begin(), solved.diagnostics.end());
        out.order_reached[s] = l_top;
    }
    out.table.set_truncation(sector.truncation());
    return out;
}

Reconstruction reconstruct(const std::vector<CountRecord>& counts, const ReconstructionOptions& options) {
    check_options(options);
    if (counts.empty()) throw std::invalid_argument("reconstruct: no count records");

    std::map<Spin, std::int64_t> events;
    std::int64_t all_events = 0;
    for (const auto& rec : counts) {
        for (const auto& [m2, c] : rec.counts) {
            if (!rec.spin.admits(m2)) {
                throw std::invalid_argument("reconstruct: outcome m2=" + std::to_string(m2) + " impossible for S=" +
                                            to_string(rec.spin));
            }
            if (c < 0) throw std::invalid_argument("reconstruct: negative count");
        }
        events[rec.spin] += rec.total();
        all_events += rec.total();
    }
    if (all_events == 0) throw std::invalid_argument("reconstruct: no events recorded");

    int top_all = 0;
    for (const auto& [s, n] : events) top_all = std::max(top_all, std::min(options.l_max, s.two_s));
    const auto sets = direction_sets(options, top_all);

    Reconstruction out;
    for (const auto& [s, n_block] : events) {
        if (n_block == 0) continue;
        // pooled histogram per direction of every order
        auto histogram = [&](const SphericalDirection& d) {
            CountRecord merged{d, s, {}};
            for (const auto& rec : counts) {
                if (rec.spin != s || !same_direction(rec.direction, d)) continue;
                for (const auto& [m2, c] : rec.counts) merged.counts[m2] += c;
            }
            return merged;
        };
        std::vector<std::vector<CountRecord>> hist(sets.size());
        int l_top = 0;
        for (int L = 1; L <= std::min(options.l_max, s.two_s); ++L) {
            auto& row = hist[static_cast<std::size_t>(L)];
            bool covered = true;
            for (const auto& d : sets[static_cast<std::size_t>(L)].directions) {
                row.push_back(histogram(d));
                covered = covered && row.back().total() > 0;
            }
            if (!covered) break;
            l_top = L;
        }

        // Moments as one flat vector so the affine map can be differentiated.
        struct Slot { int order; std::size_t dir; };
        std::vector<Slot> slots;
        std::vector<double> base;
        auto& moments = out.moments[s];
        for (int L = 1; L <= l_top; ++L) {
            for (std::size_t j = 0; j < hist[static_cast<std::size_t>(L)].size(); ++j) {
                const MomentRecord m = estimate_moments(hist[static_cast<std::size_t>(L)][j], L);
                moments.push_back(m);
                slots.push_back({L, j});
                base.push_back(m.value);
            }
        }
        std::vector<std::size_t> offset_of_order(static_cast<std::size_t>(l_top + 1), 0);
        for (std::size_t k = 0, L = 1; L <= static_cast<std::size_t>(l_top); ++L) {
            offset_of_order[L] = k;
            k += hist[L].size();
        }
        auto run = [&](const std::vector<double>& values) {
            const MomentSource mu = [&](int L, std::size_t j) {
                return values[offset_of_order[static_cast<std::size_t>(L)] + j];
            };
            return solve_block(s, static_cast<double>(n_block) / static_cast<double>(all_events), l_top, sets, mu);
        };
        BlockSolve solved = run(base);

        // Jacobian by unit perturbation (the map is affine), then the
        // covariance of moments that share a histogram.
        const std::size_t nm = base.size();
        const std::size_t np = solved.multipoles.values.size();
        Eigen::MatrixXd jac(2 * np, nm);
        for (std::size_t j = 0; j < nm; ++j) {
            auto bumped = base;
            bumped[j] += 1.0;
            const BlockSolve b = run(bumped);
            for (std::size_t p = 0; p < np; ++p) {
                const Complex dv = b.multipoles.values[p] - solved.multipoles.values[p];
                jac(static_cast<Eigen::Index>(2 * p), static_cast<Eigen::Index>(j)) = dv.real();
                jac(static_cast<Eigen::Index>(2 * p + 1), static_cast<Eigen::Index>(j)) = dv.imag();
            }
        }
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nm), static_cast<Eigen::Index>(nm));
        for (std::size_t a = 0; a < nm; ++a) {
            for (std::size_t b = 0; b < nm; ++b) {
                const auto& ra = hist[static_cast<std::size_t>(slots[a].order)][slots[a].dir];
                const auto& rb = hist[static_cast<std::size_t>(slots[b].order)][slots[b].dir];
                if (!same_direction(ra.direction, rb.direction)) continue;
                const double n = static_cast<double>(ra.total());
                const double joint = estimate_moments(ra, slots[a].order + slots[b].order).value;
                cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = (joint - base[a] * base[b]) / n;
            }
        }
        const Eigen::VectorXd var = (jac * cov * jac.transpose()).diagonal();
        std::vector<Complex> err(np);
        for (std::size_t p = 0; p < np; ++p) {
            err[p] = Complex(std::sqrt(std::max(var(static_cast<Eigen::Index>(2 * p)), 0.0)),
                             std::sqrt(std::max(var(static_cast<Eigen::Index>(2 * p + 1)), 0.0)));
        }
        out.std_errors.emplace(s, std::move(err));
        out.table.add_block(std::move(solved.multipoles));
        out.diagnostics.insert(out.diagnostics.end(), solved.diagnostics.begin(), solved.diagnostics.end());
        out.order_reached[s] = l_top;
    }
    return out;
}

Reconstruction reconstruct_sampled(const PolarizationSector& sector, const ReconstructionOptions& options,
                                   std::int64_t shots, std::uint64_t seed) {
    check_options(options);
    const auto dirs = options.all_directions();
    const auto per_direction = kernels::omp::simulate_directions(sector, dirs, shots, seed);
    std::vector<CountRecord> flat;
    for (const auto& recs : per_direction) flat.insert(flat.end(), recs.begin(), recs.end());
    Reconstruction out = reconstruct(flat, options);
    out.seed = seed;
    out.table.set_truncation(sector.truncation());
    return out;
}

}  // namespace polmult
