#include "polmult/multipole.hpp"

#include <limits>
#include <mutex>
#include <shared_mutex>

#include <boost/math/special_functions/gamma.hpp>

#include "polmult/angular.hpp"
#include "polmult/stokes.hpp"

namespace polmult {

namespace {

constexpr int kDiagonalCacheLimit = 64;
constexpr double kTableHermitianTol = 1e-10;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Eigenvector of the symmetric tridiagonal (a, b) for the exactly known
// eigenvalue lambda, by twisted factorization: forward and backward pivots
// meet at the index where the eigenvector is largest, and the vector is
// grown outward from there with ratios that only ever decay. Stable for any
// size, unlike a recurrence across eigenvalues. Sign fixed by v(0) > 0.
Eigen::VectorXd tridiagonal_eigenvector(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double lambda) {
    const Eigen::Index len = a.size();
    Eigen::VectorXd out(len);
    if (len == 1) {
        out(0) = 1.0;
        return out;
    }
    const double tiny = std::numeric_limits<double>::epsilon() * (1.0 + a.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
    auto guard = [tiny](double d) { return std::abs(d) < tiny ? (d < 0 ? -tiny : tiny) : d; };
    Eigen::VectorXd fwd(len), bwd(len);
    fwd(0) = guard(a(0) - lambda);
    for (Eigen::Index i = 1; i < len; ++i) fwd(i) = guard(a(i) - lambda - b(i - 1) * b(i - 1) / fwd(i - 1));
    bwd(len - 1) = guard(a(len - 1) - lambda);
    for (Eigen::Index i = len - 2; i >= 0; --i) bwd(i) = guard(a(i) - lambda - b(i) * b(i) / bwd(i + 1));
    Eigen::Index r = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < len; ++i) {
        const double gamma = std::abs(fwd(i) + bwd(i) - (a(i) - lambda));
        if (gamma < best) {
            best = gamma;
            r = i;
        }
    }
    out(r) = 1.0;
    bool top_negative = false;
    for (Eigen::Index i = r - 1; i >= 0; --i) {
        out(i) = -b(i) * out(i + 1) / fwd(i);
        if (fwd(i) > 0) top_negative = !top_negative;  // track the sign even if out(i) underflows
    }
    for (Eigen::Index i = r + 1; i < len; ++i) out(i) = -b(i - 1) * out(i - 1) / bwd(i);
    out /= out.norm();
    if (top_negative) out = -out;
    return out;
}

// Row K - q, entry i: <S, S-i| T_Kq |S, S-i-q> = (-1)^(i+q) <S m1, S m2|K q>
// with m1 = S - i, m2 = q - m1. For fixed q the coupled vectors over i are
// the eigenvectors of J^2 on the M = q subspace of S x S, eigenvalue K(K+1),
// and the Condon-Shortley phase makes the m1 = S entry positive.
RealMatrix build_tensor_diagonals(Spin s, int q) {
    const int n = s.two_s;
    const int len = n + 1 - q;
    const double S = s.value();
    Eigen::VectorXd a(len), b(std::max(len - 1, 0));
    for (int i = 0; i < len; ++i) {
        const double m1 = S - i, m2 = q - m1;
        a(i) = 2.0 * S * (S + 1.0) + 2.0 * m1 * m2;
        if (i + 1 < len) b(i) = std::sqrt(static_cast<double>(n - i) * (i + 1) * (n - q - i) * (q + i + 1));
    }
    RealMatrix out(len, len);
    for (int k = q; k <= n; ++k) {
        const Eigen::VectorXd v = tridiagonal_eigenvector(a, b, static_cast<double>(k) * (k + 1));
        for (int i = 0; i < len; ++i) out(k - q, i) = ((i + q) % 2 ? -1.0 : 1.0) * v(i);
    }
    return out;
}

struct DiagonalCache {
    std::shared_mutex mutex;
    std::map<std::pair<int, int>, RealMatrix> table;
};

DiagonalCache& diagonal_cache() {
    static DiagonalCache cache;
    return cache;
}

thread_local std::map<std::pair<int, int>, RealMatrix> scratch_diagonals;

}  // namespace

const RealMatrix& tensor_diagonals(Spin s, int q) {
    if (q < 0 || q > s.two_s) throw std::invalid_argument("tensor_diagonals: need 0 <= q <= 2S");
    const auto key = std::make_pair(s.two_s, q);
    if (s.two_s > kDiagonalCacheLimit) {
        // large blocks: keep only the most recent spin per thread
        if (!scratch_diagonals.empty() && scratch_diagonals.begin()->first.first != s.two_s) scratch_diagonals.clear();
        auto it = scratch_diagonals.find(key);
        if (it == scratch_diagonals.end()) it = scratch_diagonals.emplace(key, build_tensor_diagonals(s, q)).first;
        return it->second;
    }
    auto& cache = diagonal_cache();
    {
        std::shared_lock lock(cache.mutex);
        auto it = cache.table.find(key);
        if (it != cache.table.end()) return it->second;
    }
    RealMatrix built = build_tensor_diagonals(s, q);
    std::unique_lock lock(cache.mutex);
    return cache.table.try_emplace(key, std::move(built)).first->second;
}

TensorOperator tensor_operator(Spin s, MultipoleIndex index) {
    if (index.k > s.two_s) throw std::invalid_argument("tensor_operator: K exceeds 2S");
    const int aq = std::abs(index.q);
    const RealMatrix& diag = tensor_diagonals(s, aq);
    Matrix t = Matrix::Zero(s.dim(), s.dim());
    const double sign = (index.q < 0 && aq % 2) ? -1.0 : 1.0;
    for (int i = 0; i + aq < s.dim(); ++i) {
        const double v = diag(index.k - aq, i);
        if (index.q >= 0) t(i, i + aq) = v;
        else t(i + aq, i) = sign * v;  // T_{K,-q} = (-1)^q T_Kq^dagger
    }
    return {s, index, t};
}

BlockMultipoles BlockMultipoles::zeros(Spin s, double weight) {
    return {s, weight, std::vector<Complex>(static_cast<std::size_t>(MultipoleIndex::count_up_to(s.two_s)))};
}

void MultipoleTable::add_block(BlockMultipoles b) {
    const Spin s = b.spin;
    if (!blocks_.try_emplace(s, std::move(b)).second) {
        throw std::invalid_argument("MultipoleTable: duplicate block S=" + to_string(s));
    }
}

const BlockMultipoles& MultipoleTable::block(Spin s) const {
    auto it = blocks_.find(s);
    if (it == blocks_.end()) throw std::out_of_range("MultipoleTable: no block S=" + to_string(s));
    return it->second;
}

BlockMultipoles decompose_block(const DensityBlock& block, double weight) {
    const Spin s = block.spin;
    const int n = s.two_s;
    BlockMultipoles out = BlockMultipoles::zeros(s, weight);
    for (int q = 0; q <= n; ++q) {
        const RealMatrix& diag = tensor_diagonals(s, q);
        const int len = n + 1 - q;
        Vector upper(len), lower(len);
        for (int i = 0; i < len; ++i) {
            upper(i) = block.matrix(i, i + q);
            lower(i) = block.matrix(i + q, i);
        }
        const double sign = (q % 2) ? -1.0 : 1.0;
        for (int k = q; k <= n; ++k) {
            Complex up = 0.0, lo = 0.0;
            for (int i = 0; i < len; ++i) {
                const double t = diag(k - q, i);
                up += upper(i) * t;
                lo += lower(i) * t;
            }
            // rho_Kq = Tr[rho T_Kq^dagger]
            out.at(k, q) = up;
            if (q > 0) out.at(k, -q) = sign * lo;
        }
    }
    return out;
}

MultipoleTable decompose(const PolarizationSector& sector) {
    MultipoleTable table;
    for (const auto& [s, wb] : sector.blocks()) table.add_block(decompose_block(wb.block, wb.weight));
    table.set_truncation(sector.truncation());
    return table;
}

DensityBlock recompose_block(const BlockMultipoles& b) {
    const Spin s = b.spin;
    const int n = s.two_s;
    if (b.values.size() != static_cast<std::size_t>(MultipoleIndex::count_up_to(n))) {
        throw std::invalid_argument("recompose: multipole vector has the wrong length");
    }
    for (int k = 0; k <= n; ++k) {
        for (int q = 0; q <= k; ++q) {
            const double sign = (q % 2) ? -1.0 : 1.0;
            if (std::abs(std::conj(b.at(k, q)) - sign * b.at(k, -q)) > kTableHermitianTol) {
                throw std::invalid_argument("recompose: table is not Hermitian-consistent at K=" + std::to_string(k) +
                                            " q=" + std::to_string(q));
            }
        }
    }
    Matrix rho = Matrix::Zero(s.dim(), s.dim());
    for (int q = 0; q <= n; ++q) {
        const RealMatrix& diag = tensor_diagonals(s, q);
        const double sign = (q % 2) ? -1.0 : 1.0;
        for (int k = q; k <= n; ++k) {
            const Complex up = b.at(k, q);
            const Complex lo = q > 0 ? sign * b.at(k, -q) : Complex(0.0);
            for (int i = 0; i + q <= n; ++i) {
                const double t = diag(k - q, i);
                rho(i, i + q) += up * t;
                if (q > 0) rho(i + q, i) += lo * t;
            }
        }
    }
    return {s, rho};
}

PolarizationSector recompose(const MultipoleTable& table) {
    PolarizationSector out;
    for (const auto& [s, b] : table.blocks()) out.add_block(b.weight, recompose_block(b));
    out.set_truncation(table.truncation());
    return out;
}

std::vector<double> w_spectrum(const BlockMultipoles& b) {
    std::vector<double> w(static_cast<std::size_t>(b.k_max() + 1), 0.0);
    for (int k = 0; k <= b.k_max(); ++k) {
        for (int q = -k; q <= k; ++q) w[static_cast<std::size_t>(k)] += std::norm(b.at(k, q));
    }
    return w;
}

WSpectrum w_spectrum(const MultipoleTable& table) {
    WSpectrum out;
    int k_top = 0;
    for (const auto& [s, b] : table.blocks()) k_top = std::max(k_top, s.two_s);
    out.aggregate.assign(static_cast<std::size_t>(k_top + 1), 0.0);
    for (const auto& [s, b] : table.blocks()) {
        auto w = w_spectrum(b);
        for (std::size_t k = 0; k < w.size(); ++k) out.aggregate[k] += b.weight * w[k];
        out.per_block.emplace(s, std::move(w));
    }
    return out;
}

double cumulative_a(const BlockMultipoles& b, int k) {
    if (k < 1) throw std::invalid_argument("cumulative_a: K must be >= 1");
    const int top = std::min(k, b.k_max());
    double a = 0.0;
    for (int l = 1; l <= top; ++l) {
        for (int q = -l; q <= l; ++q) a += std::norm(b.at(l, q));
    }
    return a;
}

std::map<Spin, double> cumulative_a(const MultipoleTable& table, int k) {
    std::map<Spin, double> out;
    for (const auto& [s, b] : table.blocks()) out.emplace(s, cumulative_a(b, k));
    return out;
}

double a_su2_max(Spin s, int k) {
    const int n = s.two_s;
    if (k < 1 || k > n) throw std::invalid_argument("a_su2_max: need 1 <= K <= 2S");
    // Gamma(N+1)^2 / (Gamma(N-K) Gamma(N+K+2)) = prod_{j=0}^{K} (N-K+j)/(N+1+j);
    // the j = 0 factor vanishes at K = N, the 1/Gamma(0) limit.
    double ratio = 1.0;
    for (int j = 0; j <= k; ++j) ratio *= static_cast<double>(n - k + j) / static_cast<double>(n + 1 + j);
    return static_cast<double>(n) / (n + 1.0) - ratio;
}

double degree_p(const MultipoleTable& table, int k) {
    if (k < 1) throw std::invalid_argument("degree_p: K must be >= 1");
    double p = 0.0;
    for (const auto& [s, b] : table.blocks()) {
        if (s.two_s < k) continue;
        const double ratio = cumulative_a(b, k) / a_su2_max(s, k);
        p += b.weight * std::sqrt(std::max(ratio, 0.0));
    }
    return p;
}

double degree_p1_closed_form(const PolarizationSector& sector) {
    double p = 0.0;
    for (const auto& [s, wb] : sector.blocks()) {
        if (s.two_s == 0) continue;
        p += wb.weight * stokes_mean(wb.block).norm() / s.value();
    }
    return p;
}

MeasureReport measure_report(const MultipoleTable& table, int k_max) {
    if (k_max < 1) throw std::invalid_argument("measure_report: k_max must be >= 1");
    MeasureReport rep;
    rep.k_max = k_max;
    rep.tail_bound = table.truncation().dropped_mass;
    rep.w_aggregate.assign(static_cast<std::size_t>(k_max + 1), 0.0);
    rep.degree.assign(static_cast<std::size_t>(k_max + 1), 0.0);
    rep.degree[0] = kNaN;
    for (const auto& [s, b] : table.blocks()) {
        const auto w = w_spectrum(b);
        const int top = std::min(k_max, s.two_s);
        double a = 0.0;
        for (int k = 0; k <= top; ++k) {
            MeasureRow row{s, k, b.weight, w[static_cast<std::size_t>(k)], kNaN, kNaN, 0.0};
            rep.w_aggregate[static_cast<std::size_t>(k)] += b.weight * row.w;
            if (k >= 1) {
                a += row.w;
                row.a = a;
                row.a_max = a_su2_max(s, k);
                row.p_contribution = b.weight * std::sqrt(std::max(a / row.a_max, 0.0));
                rep.degree[static_cast<std::size_t>(k)] += row.p_contribution;
            }
            rep.rows.push_back(row);
        }
    }
    return rep;
}

namespace closed_form {

double w_fock(Spin s, int m_2, int k) {
    const double c = clebsch_gordan_diagonal(s, m_2, k).to_double();
    return (2.0 * k + 1.0) / s.dim() * c * c;
}

double w_su2(Spin s, int k) {
    const double c2 = exact::to_double(clebsch_gordan_stretched(s, k).square());
    return (2.0 * k + 1.0) / s.dim() * c2;
}

double pk_fock(Spin s, int m_2, int k) {
    double num = 0.0, den = 0.0;
    for (int l = 1; l <= k; ++l) {
        num += w_fock(s, m_2, l);
        den += w_su2(s, l);
    }
    return std::sqrt(num / den);
}

double pk_quadrature(double nbar, int k) {
    if (k <= 0) return 1.0;
    if (nbar <= 0.0) return 0.0;
    // P(N >= K) for N ~ Poisson(nbar) is the regularized lower gamma P(K, nbar)
    return boost::math::gamma_p(static_cast<double>(k), nbar);
}

double pk_quadrature_erfc(double nbar, int k) {
    return 0.5 * std::erfc((k - nbar) / std::sqrt(2.0 * nbar));
}

double p2_quadrature(double nbar) {
    return 1.0 - (1.0 + nbar) * std::exp(-nbar);
}

double p2_fock(Spin s, int m_2) {
    if (s.two_s < 2) throw std::invalid_argument("p2_fock: needs S >= 1");
    const double S = s.value(), m = 0.5 * m_2;
    const double num = 45.0 * std::pow(m, 4) + 5.0 * S * S * (S + 1.0) * (S + 1.0) -
                       9.0 * m * m * (2.0 * S * (S + 1.0) + 1.0);
    const double den = 4.0 * S * S * (2.0 * S - 1.0) * (4.0 * S + 1.0);
    return num / den;
}

double p2_fock_minimum(Spin s) {
    const double S = s.value();
    return (9.0 + 18.0 * S + 8.0 * S * S) / (80.0 * S * S);
}

double p2_fock_argmin(Spin s) {
    const double S = s.value();
    return std::sqrt(1.0 + 2.0 * S + 2.0 * S * S) / std::sqrt(10.0);
}

}  // namespace closed_form

}  // namespace polmult
