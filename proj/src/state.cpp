#include "polmult/state.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace polmult {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kPositivityTol = -1e-10;
constexpr int kMaxPhotons = 400;

// sqrt(C(n, k)) u_h^(n-k) u_v^k for k = 0..n, i.e. the (H, V) spinor raised to
// the n-photon symmetric power, in descending-m order (index k has n_v = k).
Vector binomial_amplitudes(int n, Complex u_h, Complex u_v) {
    Vector amp = Vector::Zero(n + 1);
    const double ah = std::abs(u_h), av = std::abs(u_v);
    const double ph = std::arg(u_h), pv = std::arg(u_v);
    for (int k = 0; k <= n; ++k) {
        const int nh = n - k;
        if ((nh > 0 && ah == 0.0) || (k > 0 && av == 0.0)) continue;
        double log_mag = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(nh + 1.0) - std::lgamma(k + 1.0));
        if (nh > 0) log_mag += nh * std::log(ah);
        if (k > 0) log_mag += k * std::log(av);
        amp(k) = std::polar(std::exp(log_mag), nh * ph + k * pv);
    }
    return amp / amp.norm();
}

double relative_hermitian_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

DensityBlock DensityBlock::pure(Spin s, const Vector& amplitudes) {
    if (amplitudes.size() != s.dim()) throw std::invalid_argument("DensityBlock::pure: amplitude size mismatch");
    const double n = amplitudes.norm();
    if (n == 0.0) throw std::invalid_argument("DensityBlock::pure: zero vector");
    Vector v = amplitudes / n;
    return {s, v * v.adjoint()};
}

DensityBlock DensityBlock::maximally_mixed(Spin s) {
    return {s, Matrix::Identity(s.dim(), s.dim()) / static_cast<double>(s.dim())};
}

void DensityBlock::validate() const {
    if (matrix.rows() != spin.dim() || matrix.cols() != spin.dim()) {
        throw std::invalid_argument("DensityBlock: matrix dimension does not match spin " + to_string(spin));
    }
    if (relative_hermitian_defect(matrix) > kHermitianTol) {
        throw std::invalid_argument("DensityBlock: matrix is not Hermitian");
    }
    if (std::abs(matrix.trace() - Complex(1.0)) > kTraceTol) {
        throw std::invalid_argument("DensityBlock: trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kPositivityTol) {
        throw std::invalid_argument("DensityBlock: matrix has a negative eigenvalue");
    }
}

double DensityBlock::purity() const {
    return (matrix * matrix).trace().real();
}

void PolarizationSector::add_block(double weight, DensityBlock block) {
    if (!(weight > 0.0)) throw std::invalid_argument("PolarizationSector: block weight must be positive");
    const Spin s = block.spin;
    if (!blocks_.try_emplace(s, WeightedBlock{weight, std::move(block)}).second) {
        throw std::invalid_argument("PolarizationSector: duplicate block S=" + to_string(s));
    }
}

const WeightedBlock& PolarizationSector::block(Spin s) const {
    auto it = blocks_.find(s);
    if (it == blocks_.end()) throw std::out_of_range("PolarizationSector: no block S=" + to_string(s));
    return it->second;
}

double PolarizationSector::total_weight() const {
    double t = 0.0;
    for (const auto& [s, wb] : blocks_) t += wb.weight;
    return t;
}

Spin PolarizationSector::max_spin() const {
    if (blocks_.empty()) throw std::logic_error("PolarizationSector: empty sector");
    return blocks_.rbegin()->first;
}

void PolarizationSector::validate() const {
    if (blocks_.empty()) throw std::invalid_argument("PolarizationSector: no blocks");
    for (const auto& [s, wb] : blocks_) {
        if (!(wb.weight > 0.0)) throw std::invalid_argument("PolarizationSector: non-positive weight");
        wb.block.validate();
    }
    const double total = total_weight();
    if (total > 1.0 + 1e-12) throw std::invalid_argument("PolarizationSector: weights exceed 1");
    if (1.0 - total > truncation_.tail_tol + 1e-12) {
        throw std::invalid_argument("PolarizationSector: weight deficit exceeds the truncation tolerance");
    }
}

Vector su2_coherent_amplitudes(Spin s, double theta, double phi) {
    return binomial_amplitudes(s.two_s, std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), phi));
}

PolarizationSector fock_state(int n_h, int n_v) {
    if (n_h < 0 || n_v < 0) throw std::invalid_argument("fock_state: photon numbers must be >= 0");
    const Spin s(n_h + n_v);
    Vector amp = Vector::Zero(s.dim());
    amp(s.index_of(n_h - n_v)) = 1.0;
    PolarizationSector out;
    out.add_block(1.0, DensityBlock::pure(s, amp));
    return out;
}

PolarizationSector su2_coherent(Spin s, double theta, double phi) {
    PolarizationSector out;
    out.add_block(1.0, DensityBlock::pure(s, su2_coherent_amplitudes(s, theta, phi)));
    return out;
}

PolarizationSector quadrature_coherent(Complex alpha_h, Complex alpha_v, double tail_tol) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw std::invalid_argument("quadrature_coherent: tail_tol must be in (0, 1)");
    const double nbar = std::norm(alpha_h) + std::norm(alpha_v);
    PolarizationSector out;
    if (nbar == 0.0) {
        out.add_block(1.0, DensityBlock::pure(Spin(0), Vector::Ones(1)));
        out.set_truncation({tail_tol, 0.0});
        return out;
    }
    const double norm = std::sqrt(nbar);
    const Complex u_h = alpha_h / norm, u_v = alpha_v / norm;
    double kept = 0.0;
    for (int n = 0;; ++n) {
        if (n > kMaxPhotons) throw std::invalid_argument("quadrature_coherent: Poisson tail needs more than 400 photons");
        const double weight = std::exp(-nbar + n * std::log(nbar) - std::lgamma(n + 1.0));
        if (weight > 0.0) {
            out.add_block(weight, DensityBlock::pure(Spin(n), binomial_amplitudes(n, u_h, u_v)));
            kept += weight;
        }
        if (1.0 - kept < tail_tol && n >= nbar) break;
    }
    out.set_truncation({tail_tol, std::max(0.0, 1.0 - kept)});
    return out;
}

PolarizationSector noon_state(int n) {
    if (n < 1) throw std::invalid_argument("noon_state: n must be >= 1");
    const Spin s(n);
    Vector amp = Vector::Zero(s.dim());
    amp(0) = 1.0;
    amp(s.dim() - 1) = 1.0;
    PolarizationSector out;
    out.add_block(1.0, DensityBlock::pure(s, amp));
    return out;
}

PolarizationSector tmsv_state(double r, double tail_tol) {
    if (!(r >= 0.0)) throw std::invalid_argument("tmsv_state: r must be >= 0");
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw std::invalid_argument("tmsv_state: tail_tol must be in (0, 1)");
    const double lambda2 = std::pow(std::tanh(r), 2);
    PolarizationSector out;
    double tail = 1.0;  // probability of N or more pairs
    for (int n = 0;; ++n) {
        if (2 * n > kMaxPhotons) throw std::invalid_argument("tmsv_state: geometric tail needs more than 400 photons");
        const double weight = (1.0 - lambda2) * std::pow(lambda2, n);
        const Spin s(2 * n);
        Vector amp = Vector::Zero(s.dim());
        amp(s.index_of(0)) = 1.0;
        if (weight > 0.0) out.add_block(weight, DensityBlock::pure(s, amp));
        tail = std::pow(lambda2, n + 1);
        if (tail < tail_tol) break;
    }
    out.set_truncation({tail_tol, tail});
    return out;
}

PolarizationSector project_polarization_sector(const RawState& raw) {
    const auto dim = static_cast<Eigen::Index>(raw.basis.size());
    if (raw.matrix.rows() != dim || raw.matrix.cols() != dim) {
        throw std::invalid_argument("project_polarization_sector: matrix size does not match basis");
    }
    for (std::size_t i = 0; i < raw.basis.size(); ++i) {
        if (raw.basis[i].n_h < 0 || raw.basis[i].n_v < 0) {
            throw std::invalid_argument("project_polarization_sector: negative photon number in basis");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (raw.basis[i] == raw.basis[j]) throw std::invalid_argument("project_polarization_sector: duplicate basis label");
        }
    }
    const double scale = std::max(1.0, raw.matrix.cwiseAbs().maxCoeff());
    if (relative_hermitian_defect(raw.matrix) > 1e-10 * scale) {
        throw std::invalid_argument("project_polarization_sector: input is not Hermitian");
    }
    const double trace = raw.matrix.trace().real();
    if (!(trace > 0.0)) throw std::invalid_argument("project_polarization_sector: trace must be positive");

    std::map<int, std::vector<Eigen::Index>> by_photons;
    for (Eigen::Index i = 0; i < dim; ++i) by_photons[raw.basis[static_cast<std::size_t>(i)].photons()].push_back(i);

    PolarizationSector out;
    double dropped = 0.0;
    for (const auto& [n, rows] : by_photons) {
        const Spin s(n);
        Matrix block = Matrix::Zero(s.dim(), s.dim());
        for (auto a : rows) {
            const auto& la = raw.basis[static_cast<std::size_t>(a)];
            for (auto b : rows) {
                const auto& lb = raw.basis[static_cast<std::size_t>(b)];
                block(s.index_of(la.n_h - la.n_v), s.index_of(lb.n_h - lb.n_v)) = raw.matrix(a, b);
            }
        }
        const double w = block.trace().real() / trace;
        if (w <= 1e-14) {
            dropped += std::max(w, 0.0);
            continue;
        }
        block /= block.trace().real();
        block = 0.5 * (block + block.adjoint()).eval();
        out.add_block(w, DensityBlock{s, block});
    }
    out.set_truncation({dropped, dropped});
    return out;
}

RawState raw_pure_state(std::vector<FockLabel> basis, const Vector& amplitudes) {
    if (static_cast<Eigen::Index>(basis.size()) != amplitudes.size()) {
        throw std::invalid_argument("raw_pure_state: size mismatch");
    }
    Vector v = amplitudes / amplitudes.norm();
    return {std::move(basis), v * v.adjoint()};
}

std::string family_name(const StateSpec& s) {
    struct Visitor {
        std::string operator()(const spec::Fock&) const { return "fock"; }
        std::string operator()(const spec::Su2Coherent&) const { return "su2_coherent"; }
        std::string operator()(const spec::QuadratureCoherent&) const { return "quadrature_coherent"; }
        std::string operator()(const spec::Noon&) const { return "noon"; }
        std::string operator()(const spec::Tmsv&) const { return "tmsv"; }
        std::string operator()(const spec::Raw&) const { return "raw"; }
    };
    return std::visit(Visitor{}, s);
}

PolarizationSector build_state(const StateSpec& s) {
    struct Visitor {
        PolarizationSector operator()(const spec::Fock& f) const { return fock_state(f.n_h, f.n_v); }
        PolarizationSector operator()(const spec::Su2Coherent& c) const {
            return su2_coherent(Spin(c.two_s), c.theta, c.phi);
        }
        PolarizationSector operator()(const spec::QuadratureCoherent& q) const {
            return quadrature_coherent(q.alpha_h, q.alpha_v, q.tail_tol);
        }
        PolarizationSector operator()(const spec::Noon& n) const { return noon_state(n.n); }
        PolarizationSector operator()(const spec::Tmsv& t) const { return tmsv_state(t.r, t.tail_tol); }
        PolarizationSector operator()(const spec::Raw& r) const { return project_polarization_sector(r.state); }
    };
    return std::visit(Visitor{}, s);
}

}  // namespace polmult
