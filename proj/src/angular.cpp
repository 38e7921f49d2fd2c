#include "polmult/angular.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

namespace polmult {

using exact::BigInt;
using exact::factorial;
using exact::Rational;
using exact::RootRational;

namespace {

void require_projection(Spin j, int m_2, const char* what) {
    if (std::abs(m_2) > j.two_s) {
        throw std::invalid_argument(std::string(what) + ": |m| exceeds j");
    }
    if ((j.two_s - m_2) % 2 != 0) {
        throw std::invalid_argument(std::string(what) + ": j - m is not an integer");
    }
}

struct RacahParts {
    Rational common;  // (2j+1) * triangle coefficient
    BigInt m_part;    // product of the six m-dependent factorials
    Rational sum;     // alternating Racah sum
};

// Racah's formula split into an m-independent radicand, the m-dependent
// factorial product and the alternating sum. Caller has validated inputs,
// m = m1 + m2 and the triangle rule.
RacahParts racah(int j1, int m1, int j2, int m2, int j, int m) {
    // all arguments doubled
    const int a = (j1 + j2 - j) / 2;
    const int b = (j1 - j2 + j) / 2;
    const int c = (-j1 + j2 + j) / 2;
    const int d = (j1 + j2 + j) / 2 + 1;

    RacahParts out;
    out.common = Rational(BigInt(j + 1) * factorial(a) * factorial(b) * factorial(c), factorial(d));
    out.m_part = factorial((j + m) / 2) * factorial((j - m) / 2) * factorial((j1 - m1) / 2) *
                 factorial((j1 + m1) / 2) * factorial((j2 - m2) / 2) * factorial((j2 + m2) / 2);

    const int k_min = std::max({0, (j2 - j - m1) / 2, (j1 - j + m2) / 2});
    const int k_max = std::min({a, (j1 - m1) / 2, (j2 + m2) / 2});
    Rational sum = 0;
    for (int k = k_min; k <= k_max; ++k) {
        BigInt den = factorial(k) * factorial(a - k) * factorial((j1 - m1) / 2 - k) *
                     factorial((j2 + m2) / 2 - k) * factorial((j - j2 + m1) / 2 + k) *
                     factorial((j - j1 - m2) / 2 + k);
        Rational term(1, den);
        if (k % 2) sum -= term;
        else sum += term;
    }
    out.sum = sum;
    return out;
}

bool couples(Spin j1, int m1_2, Spin j2, int m2_2, Spin j, int m_2) {
    if (m_2 != m1_2 + m2_2) return false;
    if (j.two_s > j1.two_s + j2.two_s) return false;
    if (j.two_s < std::abs(j1.two_s - j2.two_s)) return false;
    if ((j1.two_s + j2.two_s + j.two_s) % 2 != 0) return false;
    return true;
}

// Memo for the float projection. Keys pack six doubled numbers.
class ClebschMemo {
public:
    std::optional<double> find(std::uint64_t key) const {
        std::shared_lock lock(mutex_);
        auto it = table_.find(key);
        if (it == table_.end()) return std::nullopt;
        return it->second;
    }
    void store(std::uint64_t key, double value) {
        std::unique_lock lock(mutex_);
        table_.emplace(key, value);
    }

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::uint64_t, double> table_;
};

ClebschMemo& clebsch_memo() {
    static ClebschMemo memo;
    return memo;
}

std::uint64_t pack(int a, int b, int c, int d, int e, int f) {
    auto u = [](int v) { return static_cast<std::uint64_t>(v + 1024) & 0x7ff; };
    return u(a) | u(b) << 11 | u(c) << 22 | u(d) << 33 | u(e) << 44 | u(f) << 55;
}

// --- Wigner small-d ---------------------------------------------------------

struct SmallDTerm {
    int cos_power;
    int sin_power;
    double coefficient;  // includes the alternating sign
};

using SmallDTable = std::vector<std::vector<SmallDTerm>>;  // [row * dim + col]

// Standard d^j_{a b}(beta) = <j a| exp(-i beta J_y) |j b> as a sum of
// cos(beta/2)^p sin(beta/2)^q terms with exactly evaluated prefactors.
SmallDTable build_small_d_table(int j2) {
    const int dim = j2 + 1;
    SmallDTable table(static_cast<std::size_t>(dim * dim));
    for (int row = 0; row < dim; ++row) {
        const int a2 = j2 - 2 * row;
        for (int col = 0; col < dim; ++col) {
            const int b2 = j2 - 2 * col;
            const int jpa = (j2 + a2) / 2, jma = (j2 - a2) / 2;
            const int jpb = (j2 + b2) / 2, jmb = (j2 - b2) / 2;
            const int amb = (a2 - b2) / 2;
            BigInt numer = factorial(jpa) * factorial(jma) * factorial(jpb) * factorial(jmb);
            const int s_min = std::max(0, -amb);
            const int s_max = std::min(jpb, jma);
            auto& terms = table[static_cast<std::size_t>(row * dim + col)];
            for (int s = s_min; s <= s_max; ++s) {
                BigInt den = factorial(jpb - s) * factorial(s) * factorial(amb + s) * factorial(jma - s);
                double mag = exact::sqrt_to_double(Rational(numer, den * den));
                const bool negative = ((amb + s) % 2 + 2) % 2 == 1;
                terms.push_back({j2 - amb - 2 * s, amb + 2 * s, negative ? -mag : mag});
            }
        }
    }
    return table;
}

const SmallDTable& small_d_table(int j2) {
    static std::shared_mutex mutex;
    static std::map<int, SmallDTable> cache;
    {
        std::shared_lock lock(mutex);
        auto it = cache.find(j2);
        if (it != cache.end()) return it->second;
    }
    SmallDTable built = build_small_d_table(j2);
    std::unique_lock lock(mutex);
    return cache.try_emplace(j2, std::move(built)).first->second;
}

double standard_small_d_sum(int j2, int a2, int b2, double beta) {
    const auto& table = small_d_table(j2);
    const int dim = j2 + 1;
    const int row = (j2 - a2) / 2, col = (j2 - b2) / 2;
    const double c = std::cos(0.5 * beta), s = std::sin(0.5 * beta);
    double value = 0.0;
    for (const auto& t : table[static_cast<std::size_t>(row * dim + col)]) {
        value += t.coefficient * std::pow(c, t.cos_power) * std::pow(s, t.sin_power);
    }
    return value;
}

double jacobi_p(int n, double alpha, double beta, double x) {
    if (n == 0) return 1.0;
    double p0 = 1.0;
    double p1 = (alpha + 1.0) + 0.5 * (alpha + beta + 2.0) * (x - 1.0);
    for (int k = 2; k <= n; ++k) {
        const double ab = alpha + beta;
        const double c = 2.0 * k + ab;
        const double a1 = 2.0 * k * (k + ab) * (c - 2.0);
        const double a2 = (c - 1.0) * (c * (c - 2.0) * x + alpha * alpha - beta * beta);
        const double a3 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * c;
        const double p2 = (a2 * p1 - a3 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Standard d^j_{a b}(beta) through the Jacobi-polynomial representation.
double standard_small_d_jacobi(int j2, int a2, int b2, double beta) {
    // work with integers j, a, b doubled; k = min(j+b, j-b, j+a, j-a)
    const int jpb = (j2 + b2) / 2, jmb = (j2 - b2) / 2;
    const int jpa = (j2 + a2) / 2, jma = (j2 - a2) / 2;
    const int k = std::min({jpb, jmb, jpa, jma});
    int mu;       // Jacobi alpha
    int lambda;   // sign exponent
    if (k == jpb) {
        mu = (a2 - b2) / 2;
        lambda = (a2 - b2) / 2;
    } else if (k == jmb) {
        mu = (b2 - a2) / 2;
        lambda = 0;
    } else if (k == jpa) {
        mu = (b2 - a2) / 2;
        lambda = 0;
    } else {
        mu = (a2 - b2) / 2;
        lambda = (a2 - b2) / 2;
    }
    const int nu = j2 - 2 * k - mu;
    const double log_norm = 0.5 * (log_binomial(j2 - k, k + mu) - log_binomial(k + nu, nu));
    const double c = std::cos(0.5 * beta), s = std::sin(0.5 * beta);
    const double sign = (lambda % 2 == 0) ? 1.0 : -1.0;
    return sign * std::exp(log_norm) * std::pow(s, mu) * std::pow(c, nu) *
           jacobi_p(k, mu, nu, std::cos(beta));
}

}  // namespace

std::string to_string(Spin s) {
    return s.is_integer() ? std::to_string(s.two_s / 2) : std::to_string(s.two_s) + "/2";
}

SphericalDirection SphericalDirection::from_vector(const Eigen::Vector3d& v) {
    const double r = v.norm();
    if (r == 0.0) throw std::invalid_argument("direction vector must be nonzero");
    double theta = std::acos(std::clamp(v.z() / r, -1.0, 1.0));
    double phi = std::atan2(v.y(), v.x());
    if (phi < 0) phi += 2.0 * kPi;
    if (phi >= 2.0 * kPi) phi -= 2.0 * kPi;
    return {theta, phi};
}

RootRational clebsch_gordan_exact(Spin j1, int m1_2, Spin j2, int m2_2, Spin j, int m_2) {
    require_projection(j1, m1_2, "clebsch_gordan");
    require_projection(j2, m2_2, "clebsch_gordan");
    require_projection(j, m_2, "clebsch_gordan");
    if (!couples(j1, m1_2, j2, m2_2, j, m_2)) return {Rational(0), Rational(1)};
    RacahParts p = racah(j1.two_s, m1_2, j2.two_s, m2_2, j.two_s, m_2);
    return {p.sum, p.common * Rational(p.m_part)};
}

double clebsch_gordan(Spin j1, int m1_2, Spin j2, int m2_2, Spin j, int m_2) {
    const auto key = pack(j1.two_s, m1_2, j2.two_s, m2_2, j.two_s, m_2);
    if (auto hit = clebsch_memo().find(key)) return *hit;
    const double value = clebsch_gordan_exact(j1, m1_2, j2, m2_2, j, m_2).to_double();
    clebsch_memo().store(key, value);
    return value;
}

RootRational clebsch_gordan_diagonal(Spin s, int m_2, int k) {
    require_projection(s, m_2, "clebsch_gordan_diagonal");
    if (k < 0) throw std::invalid_argument("clebsch_gordan_diagonal: k must be non-negative");
    const int n = s.two_s;
    const Rational radicand(BigInt(n + 1) * factorial(std::max(n - k, 0)), factorial(n + k + 1));
    if (k > n) return {Rational(0), radicand};
    RacahParts p = racah(n, m_2, 2 * k, 0, n, m_2);
    // m_part is the perfect square [(S+m)! (S-m)! k!]^2 times nothing else
    BigInt root = factorial((n + m_2) / 2) * factorial((n - m_2) / 2) * factorial(k);
    // p.common = (2S+1) (k!)^2 (2S-k)! / (2S+k+1)!, i.e. radicand * (k!)^2
    return {p.sum * Rational(root) * Rational(factorial(k)), radicand};
}

RootRational clebsch_gordan_stretched(Spin s, int k) {
    const int n = s.two_s;
    if (k < 0 || k > n) throw std::invalid_argument("clebsch_gordan_stretched: need 0 <= k <= 2S");
    // sqrt(2S+1) (2S)! / sqrt((2S-K)! (2S+1+K)!)
    Rational radicand(BigInt(n + 1), factorial(n - k) * factorial(n + 1 + k));
    return {Rational(factorial(n)), radicand};
}

namespace detail {

double wigner_small_d_sum(Spin j, int m_2, int mp_2, double theta) {
    require_projection(j, m_2, "wigner_small_d");
    require_projection(j, mp_2, "wigner_small_d");
    // exp(+i theta S_2) is the standard rotation with beta = -theta
    return standard_small_d_sum(j.two_s, m_2, mp_2, -theta);
}

double wigner_small_d_jacobi(Spin j, int m_2, int mp_2, double theta) {
    require_projection(j, m_2, "wigner_small_d");
    require_projection(j, mp_2, "wigner_small_d");
    return standard_small_d_jacobi(j.two_s, m_2, mp_2, -theta);
}

}  // namespace detail

double wigner_small_d(Spin j, int m_2, int mp_2, double theta) {
    if (j.two_s <= detail::kSmallDSumLimit) return detail::wigner_small_d_sum(j, m_2, mp_2, theta);
    return detail::wigner_small_d_jacobi(j, m_2, mp_2, theta);
}

RealMatrix wigner_small_d_matrix(Spin j, double theta) {
    const int dim = j.dim();
    RealMatrix d(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) d(r, c) = wigner_small_d(j, j.m2_at(r), j.m2_at(c), theta);
    }
    return d;
}

Complex wigner_D(Spin j, int m_2, int mp_2, double theta, double phi) {
    return wigner_small_d(j, m_2, mp_2, theta) * std::polar(1.0, 0.5 * mp_2 * phi);
}

Matrix wigner_D_matrix(Spin j, double theta, double phi) {
    const int dim = j.dim();
    RealMatrix d = wigner_small_d_matrix(j, theta);
    Matrix out(dim, dim);
    for (int c = 0; c < dim; ++c) {
        const Complex phase = std::polar(1.0, 0.5 * j.m2_at(c) * phi);
        for (int r = 0; r < dim; ++r) out(r, c) = d(r, c) * phase;
    }
    return out;
}

std::vector<Complex> spherical_harmonics_upto(int k_max, double theta, double phi) {
    if (k_max < 0) throw std::invalid_argument("spherical_harmonics_upto: k_max must be >= 0");
    const double x = std::cos(theta);
    const double sx = std::sin(theta);
    // normalized associated Legendre functions, CS phase included
    std::vector<double> plm(static_cast<std::size_t>(MultipoleIndex::count_up_to(k_max)), 0.0);
    auto at = [&](int l, int m) -> double& { return plm[static_cast<std::size_t>(l * l + l + m)]; };

    double pmm = std::sqrt(1.0 / (4.0 * kPi));
    for (int m = 0; m <= k_max; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx;
        at(m, m) = pmm;
        if (m + 1 <= k_max) at(m + 1, m) = x * std::sqrt(2.0 * m + 3.0) * pmm;
        for (int l = m + 2; l <= k_max; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
            const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
            at(l, m) = a * (x * at(l - 1, m) - b * at(l - 2, m));
        }
    }
    std::vector<Complex> out(plm.size());
    for (int l = 0; l <= k_max; ++l) {
        out[static_cast<std::size_t>(MultipoleIndex::flat(l, 0))] = at(l, 0);
        for (int m = 1; m <= l; ++m) {
            const Complex y = at(l, m) * std::polar(1.0, m * phi);
            out[static_cast<std::size_t>(MultipoleIndex::flat(l, m))] = y;
            out[static_cast<std::size_t>(MultipoleIndex::flat(l, -m))] = ((m % 2) ? -1.0 : 1.0) * std::conj(y);
        }
    }
    return out;
}

Complex spherical_harmonic(int k, int q, double theta, double phi) {
    MultipoleIndex idx(k, q);
    return spherical_harmonics_upto(k, theta, phi)[static_cast<std::size_t>(idx.flat())];
}

double legendre_p(int l, double x) {
    if (l < 0) throw std::invalid_argument("legendre_p: l must be >= 0");
    if (l == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int n = 1; n < l; ++n) {
        const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

}  // namespace polmult
