#pragma once

// Validated input data for a polarized abelian variety and the classical
// hermitian-form identities attached to it.
//
// Coordinate model used throughout the library: the variety is C^g / Lambda
// with Lambda = tau Z^g + D Z^g, where tau is a symmetric g x g complex
// matrix with positive definite imaginary part and D = diag(d_1,...,d_g) is
// the elementary divisor matrix of the polarization.  In the real basis
// (tau e_1,...,tau e_g, d_1 e_1,...,d_g e_g) the alternating form E of the
// polarization is [[0,D],[-D,0]], and the hermitian form recovering it is
// H(z,w) = z^T (Im tau)^{-1} conj(w), so that E = Im H.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thetamult/errors.hpp"

namespace thetamult {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Elementary divisor vector (d_1,...,d_g) with d_i >= 1 and d_i | d_{i+1}.
class PolarizationType {
public:
    explicit PolarizationType(std::vector<int> divisors);

    // Parses "1,2" or "1 2".
    static PolarizationType parse(const std::string& text);

    int genus() const { return static_cast<int>(d_.size()); }
    int divisor(int i) const { return d_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& divisors() const { return d_; }

    // s = number of odd divisors.
    int odd_count() const;

    long long section_count() const;         // prod d_i = h^0 of the bundle
    long long section_count_level2() const;  // 2^g prod d_i = h^0 of its square

    bool operator==(const PolarizationType& o) const { return d_ == o.d_; }
    std::string to_string() const;

private:
    std::vector<int> d_;
};

// Symmetric complex matrix with positive definite imaginary part.  Immutable
// once validated; caches Im(tau), its inverse and its smallest eigenvalue.
class PeriodMatrix {
public:
    static constexpr double kDefaultSymmetryTol = 1e-12;
    static constexpr double kNearDegenerateThreshold = 1e-3;

    static PeriodMatrix validate(const CMatrix& tau,
                                 double symmetry_tol = kDefaultSymmetryTol);

    int genus() const { return static_cast<int>(tau_.rows()); }
    const CMatrix& tau() const { return tau_; }
    const RMatrix& imag_part() const { return y_; }
    const RMatrix& imag_inverse() const { return y_inv_; }
    double lambda_min() const { return lambda_min_; }

    // True when lambda_min(Im tau) < 1e-3; theta truncation radii blow up
    // there, so downstream kernels refuse such inputs.
    bool near_degenerate() const { return lambda_min_ < kNearDegenerateThreshold; }

    PeriodMatrix scaled(double factor) const;

    // Hash of the 17-digit decimal rendering of all entries.
    std::string fingerprint() const;

private:
    PeriodMatrix(CMatrix tau, RMatrix y, RMatrix y_inv, double lambda_min);

    CMatrix tau_;
    RMatrix y_;
    RMatrix y_inv_;
    double lambda_min_;
};

// Hermitian form H with Im H integral on the lattice, together with the
// real-bilinear form E = Im H and the lattice frame.
class SymplecticData {
public:
    SymplecticData(const PeriodMatrix& pm, const PolarizationType& type);

    const PeriodMatrix& period_matrix() const { return pm_; }
    const PolarizationType& type() const { return type_; }

    // g x g matrix M of the hermitian form, H(z,w) = z^T M conj(w).
    const RMatrix& hermitian_matrix() const { return h_; }

    Complex hermitian(const CVector& z, const CVector& w) const;
    double symplectic(const CVector& z, const CVector& w) const;  // E = Im H

    // E evaluated on all pairs of lattice basis vectors; equals
    // [[0,D],[-D,0]] for valid inputs.
    RMatrix lattice_gram() const;

    // Real coordinates (m;n) of v in the frame (tau e_i, d_i e_i).
    RVector lattice_coordinates(const CVector& v) const;
    bool is_lattice_point(const CVector& v, double tol = 1e-12) const;

    CVector lattice_vector(const Eigen::VectorXi& m, const Eigen::VectorXi& n) const;

private:
    PeriodMatrix pm_;
    PolarizationType type_;
    RMatrix h_;        // (Im tau)^{-1}
    RMatrix frame_;    // 2g x 2g real frame matrix, columns = basis vectors
    RMatrix frame_inv_;
};

SymplecticData symplectic_data(const PeriodMatrix& pm, const PolarizationType& type);

// Residual of pi H(v,lam) = 2 pi i E(v,lam) + F(z+lam) - F(z) with
// F(z) = -pi (i E(v,z) - E(iv,z)).  lam must lie on the lattice
// (LatticeMembershipError otherwise, tolerance 1e-12).
double check_cocycle_identity(const SymplecticData& sd, const CVector& v,
                              const CVector& lam, const CVector& z);

} // namespace thetamult
