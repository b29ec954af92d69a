#pragma once

// Riemann theta functions with rational characteristics,
//
//   theta[a;b](z,tau) = sum_{n in Z^g} exp(i pi (n+a)^T tau (n+a)
//                                          + 2 pi i (n+a)^T (z+b)),
//
// evaluated with a guaranteed absolute truncation bound.  The lattice sum is
// cut off on the ellipsoid (n+a-c)^T Y (n+a-c) <= R^2 centered at the
// stationary point c = -Y^{-1} Im(z+b), Y = Im tau.  Every omitted term has
// Gaussian size, and the tail admits the closed-form bound
//
//   tail(R) <= exp(pi y^T Y^{-1} y) (2 + sqrt(2/lambda_min))^g exp(-pi R^2/2)
//
// (split exp(-pi Q) <= exp(-pi R^2/2) exp(-pi Q/2) on the tail and compare
// each axis with a Gaussian integral).  R is chosen from this bound, so the
// reported abs_error_bound is sound, not heuristic.  Arguments are reduced
// into the fundamental cell by the exact quasi-periodicity law first, which
// keeps the summed series well scaled.

#include <complex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "thetamult/av_core.hpp"
#include "thetamult/theta_group.hpp"

namespace thetamult {

// Exact rational vector with a common denominator.
class RationalVector {
public:
    RationalVector() = default;
    RationalVector(std::vector<long long> numerators, long long denominator);

    static RationalVector zeros(int g);

    int size() const { return static_cast<int>(num_.size()); }
    long long numerator(int i) const { return num_[static_cast<std::size_t>(i)]; }
    long long denominator() const { return den_; }
    double value(int i) const { return static_cast<double>(num_[static_cast<std::size_t>(i)]) / static_cast<double>(den_); }
    RVector as_vector() const;

    bool is_zero() const;
    // Reduced form: gcd(numerators, den) = 1.
    RationalVector normalized() const;
    // Entries shifted into [0,1).
    RationalVector reduced_mod_one() const;

    std::string to_string() const;

private:
    std::vector<long long> num_;
    long long den_ = 1;
};

struct Characteristic {
    RationalVector a;
    RationalVector b;

    // a = (2D)^{-1} c for the index x with representative c; b = 0.
    static Characteristic from_index(const PolarizationType& D, const GroupElement& x);
    static Characteristic zero(int g);

    // 4 a^T b as an exact rational; integer-ness decides evenness laws.
    bool four_ab_is_even_integer() const;
    bool four_ab_is_odd_integer() const;

    std::string key() const;  // cache normal form (a mod 1, b exact)
};

struct ThetaValue {
    Complex value;
    double abs_error_bound;
};

// Guaranteed |result - exact sum| <= abs_error_bound, with the bound at most
// eps whenever eps is achievable in double precision at the given argument.
// NearDegenerateError when lambda_min(Im tau) < 1e-3 or the truncation box
// would exceed 1e8 lattice points.
ThetaValue theta(const Characteristic& ch, const CVector& z, const PeriodMatrix& tau, double eps);

ThetaValue theta_constant(const Characteristic& ch, const PeriodMatrix& tau, double eps);

// exp(-i pi m^T tau m - 2 pi i m^T z + 2 pi i (a^T n - b^T m)):
// theta[a;b](z + tau m + n) = factor * theta[a;b](z).
Complex quasiperiodicity_factor(const Characteristic& ch, const Eigen::VectorXi& m,
                                const Eigen::VectorXi& n, const CVector& z,
                                const PeriodMatrix& tau);

// Shared cache of theta constants keyed by (characteristic, tau fingerprint,
// eps).  Safe for concurrent readers with racy single-value inserts.
class ThetaConstantCache {
public:
    ThetaValue get_or_compute(const Characteristic& ch, const PeriodMatrix& tau, double eps);
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, ThetaValue> map_;
};

} // namespace thetamult
