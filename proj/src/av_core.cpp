#include "thetamult/av_core.hpp"

#include <cmath>
#include <sstream>

#include "thetamult/text_util.hpp"

namespace thetamult {

PolarizationType::PolarizationType(std::vector<int> divisors) : d_(std::move(divisors)) {
    if (d_.empty()) throw Error("polarization type must have g >= 1");
    for (std::size_t i = 0; i < d_.size(); ++i) {
        if (d_[i] < 1) {
            throw Error("polarization divisor d_" + std::to_string(i + 1) + " = " +
                        std::to_string(d_[i]) + " must be >= 1");
        }
        if (i + 1 < d_.size() && d_[i + 1] % d_[i] != 0) {
            throw Error("divisibility chain broken: d_" + std::to_string(i + 1) + " = " +
                        std::to_string(d_[i]) + " does not divide d_" + std::to_string(i + 2) +
                        " = " + std::to_string(d_[i + 1]));
        }
    }
}

PolarizationType PolarizationType::parse(const std::string& text) {
    std::vector<int> d;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        std::istringstream sub(token);
        int v;
        while (sub >> v) d.push_back(v);
        if (!sub.eof()) throw Error("cannot parse polarization type '" + text + "'");
    }
    if (d.empty()) throw Error("cannot parse polarization type '" + text + "'");
    return PolarizationType(d);
}

int PolarizationType::odd_count() const {
    int s = 0;
    for (int di : d_)
        if (di % 2 == 1) ++s;
    return s;
}

long long PolarizationType::section_count() const {
    long long p = 1;
    for (int di : d_) p *= di;
    return p;
}

long long PolarizationType::section_count_level2() const {
    long long p = 1;
    for (int di : d_) p *= 2LL * di;
    return p;
}

std::string PolarizationType::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < d_.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(d_[i]);
    }
    return out;
}

PeriodMatrix::PeriodMatrix(CMatrix tau, RMatrix y, RMatrix y_inv, double lambda_min)
    : tau_(std::move(tau)), y_(std::move(y)), y_inv_(std::move(y_inv)), lambda_min_(lambda_min) {}

PeriodMatrix PeriodMatrix::validate(const CMatrix& tau, double symmetry_tol) {
    if (tau.rows() != tau.cols() || tau.rows() < 1)
        throw Error("period matrix must be square and non-empty");
    const auto g = tau.rows();
    for (Eigen::Index i = 0; i < g; ++i) {
        for (Eigen::Index j = i + 1; j < g; ++j) {
            const double off = std::abs(tau(i, j) - tau(j, i));
            if (off > symmetry_tol) {
                throw NotSymmetricError("tau(" + std::to_string(i) + "," + std::to_string(j) +
                                        ") differs from its transpose by " + format_real(off) +
                                        " (tol " + format_real(symmetry_tol) + ")");
            }
        }
    }
    // Work with the symmetrized matrix so later algebra sees an exactly
    // symmetric tau.
    CMatrix sym = 0.5 * (tau + tau.transpose());
    RMatrix y = sym.imag();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(y);
    if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed for Im(tau)");
    const double lambda_min = es.eigenvalues()(0);
    if (lambda_min <= 0.0) {
        throw NotPositiveError("Im(tau) is not positive definite: smallest eigenvalue " +
                               format_real(lambda_min));
    }
    Eigen::LLT<RMatrix> llt(y);
    if (llt.info() != Eigen::Success)
        throw NotPositiveError("Cholesky factorization of Im(tau) failed");
    RMatrix y_inv = llt.solve(RMatrix::Identity(g, g));
    return PeriodMatrix(std::move(sym), std::move(y), std::move(y_inv), lambda_min);
}

PeriodMatrix PeriodMatrix::scaled(double factor) const {
    return PeriodMatrix::validate(factor * tau_);
}

std::string PeriodMatrix::fingerprint() const {
    std::string text;
    for (Eigen::Index i = 0; i < tau_.rows(); ++i) {
        for (Eigen::Index j = 0; j < tau_.cols(); ++j) {
            text += format_real(tau_(i, j).real());
            text += ",";
            text += format_real(tau_(i, j).imag());
            text += ";";
        }
    }
    return hex16(fnv1a64(text));
}

namespace {

RMatrix build_frame(const PeriodMatrix& pm, const PolarizationType& type) {
    const int g = pm.genus();
    RMatrix frame(2 * g, 2 * g);
    frame.setZero();
    // columns 0..g-1: tau e_i, columns g..2g-1: d_i e_i, as (Re;Im) stacks
    for (int i = 0; i < g; ++i) {
        for (int r = 0; r < g; ++r) {
            frame(r, i) = pm.tau()(r, i).real();
            frame(g + r, i) = pm.tau()(r, i).imag();
        }
        frame(i, g + i) = static_cast<double>(type.divisor(i));
    }
    return frame;
}

} // namespace

SymplecticData::SymplecticData(const PeriodMatrix& pm, const PolarizationType& type)
    : pm_(pm), type_(type), h_(pm.imag_inverse()), frame_(build_frame(pm, type)) {
    if (pm.genus() != type.genus())
        throw Error("period matrix genus " + std::to_string(pm.genus()) +
                    " does not match polarization genus " + std::to_string(type.genus()));
    frame_inv_ = frame_.partialPivLu().solve(RMatrix::Identity(2 * pm.genus(), 2 * pm.genus()));
}

SymplecticData symplectic_data(const PeriodMatrix& pm, const PolarizationType& type) {
    return SymplecticData(pm, type);
}

Complex SymplecticData::hermitian(const CVector& z, const CVector& w) const {
    Complex acc(0.0, 0.0);
    const int g = pm_.genus();
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) acc += z(i) * h_(i, j) * std::conj(w(j));
    return acc;
}

double SymplecticData::symplectic(const CVector& z, const CVector& w) const {
    return hermitian(z, w).imag();
}

RMatrix SymplecticData::lattice_gram() const {
    const int g = pm_.genus();
    RMatrix gram(2 * g, 2 * g);
    for (int i = 0; i < 2 * g; ++i) {
        CVector vi(g);
        for (int r = 0; r < g; ++r) vi(r) = Complex(frame_(r, i), frame_(g + r, i));
        for (int j = 0; j < 2 * g; ++j) {
            CVector vj(g);
            for (int r = 0; r < g; ++r) vj(r) = Complex(frame_(r, j), frame_(g + r, j));
            gram(i, j) = symplectic(vi, vj);
        }
    }
    return gram;
}

RVector SymplecticData::lattice_coordinates(const CVector& v) const {
    const int g = pm_.genus();
    RVector real(2 * g);
    for (int r = 0; r < g; ++r) {
        real(r) = v(r).real();
        real(g + r) = v(r).imag();
    }
    return frame_inv_ * real;
}

bool SymplecticData::is_lattice_point(const CVector& v, double tol) const {
    RVector coords = lattice_coordinates(v);
    for (Eigen::Index i = 0; i < coords.size(); ++i) {
        if (std::abs(coords(i) - std::round(coords(i))) > tol) return false;
    }
    return true;
}

CVector SymplecticData::lattice_vector(const Eigen::VectorXi& m, const Eigen::VectorXi& n) const {
    const int g = pm_.genus();
    CVector v = CVector::Zero(g);
    for (int r = 0; r < g; ++r) {
        for (int i = 0; i < g; ++i) v(r) += pm_.tau()(r, i) * static_cast<double>(m(i));
        v(r) += static_cast<double>(type_.divisor(r) * n(r));
    }
    return v;
}

double check_cocycle_identity(const SymplecticData& sd, const CVector& v, const CVector& lam,
                              const CVector& z) {
    if (!sd.is_lattice_point(lam)) {
        throw LatticeMembershipError("lambda is not a lattice point within 1e-12");
    }
    constexpr double kPi = 3.14159265358979323846;
    const CVector iv = Complex(0.0, 1.0) * v;
    auto F = [&](const CVector& w) {
        return -kPi * (Complex(0.0, 1.0) * sd.symplectic(v, w) - sd.symplectic(iv, w));
    };
    const Complex lhs = kPi * sd.hermitian(v, lam);
    const Complex rhs =
        Complex(0.0, 2.0 * kPi) * sd.symplectic(v, lam) + F(z + lam) - F(z);
    return std::abs(lhs - rhs);
}

} // namespace thetamult
