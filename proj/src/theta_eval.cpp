#include "thetamult/theta_eval.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "thetamult/text_util.hpp"

namespace thetamult {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMaxLatticePoints = 1e8;

long long gcd_ll(long long a, long long b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace

RationalVector::RationalVector(std::vector<long long> numerators, long long denominator)
    : num_(std::move(numerators)), den_(denominator) {
    if (den_ == 0) throw Error("rational vector denominator must be nonzero");
    if (den_ < 0) {
        den_ = -den_;
        for (auto& n : num_) n = -n;
    }
}

RationalVector RationalVector::zeros(int g) {
    return RationalVector(std::vector<long long>(static_cast<std::size_t>(g), 0), 1);
}

RVector RationalVector::as_vector() const {
    RVector v(size());
    for (int i = 0; i < size(); ++i) v(i) = value(i);
    return v;
}

bool RationalVector::is_zero() const {
    return std::all_of(num_.begin(), num_.end(), [](long long n) { return n == 0; });
}

RationalVector RationalVector::normalized() const {
    long long g = den_;
    for (long long n : num_) g = gcd_ll(g, n);
    if (g <= 1) return *this;
    std::vector<long long> nums = num_;
    for (auto& n : nums) n /= g;
    return RationalVector(std::move(nums), den_ / g);
}

RationalVector RationalVector::reduced_mod_one() const {
    std::vector<long long> nums = num_;
    for (auto& n : nums) {
        n %= den_;
        if (n < 0) n += den_;
    }
    return RationalVector(std::move(nums), den_).normalized();
}

std::string RationalVector::to_string() const {
    std::string out = "(";
    for (int i = 0; i < size(); ++i) {
        if (i) out += ",";
        out += std::to_string(numerator(i));
    }
    out += ")/" + std::to_string(den_);
    return out;
}

Characteristic Characteristic::from_index(const PolarizationType& D, const GroupElement& x) {
    const int g = D.genus();
    if (static_cast<int>(x.c.size()) != g) throw Error("index length does not match genus");
    // Common denominator 2 d_g; the divisibility chain makes d_g the lcm.
    const long long den = 2LL * D.divisor(g - 1);
    std::vector<long long> nums(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) {
        nums[static_cast<std::size_t>(i)] =
            static_cast<long long>(x.c[static_cast<std::size_t>(i)]) *
            (den / (2LL * D.divisor(i)));
    }
    return Characteristic{RationalVector(std::move(nums), den).normalized(),
                          RationalVector::zeros(g)};
}

Characteristic Characteristic::zero(int g) {
    return Characteristic{RationalVector::zeros(g), RationalVector::zeros(g)};
}

bool Characteristic::four_ab_is_even_integer() const {
    // 4 a.b = 4 * sum(a_num_i * b_num_i) / (a_den * b_den)
    long long num = 0;
    for (int i = 0; i < a.size(); ++i) num += a.numerator(i) * b.numerator(i);
    num *= 4;
    const long long den = a.denominator() * b.denominator();
    if (num % den != 0) return false;
    return ((num / den) % 2) == 0;
}

bool Characteristic::four_ab_is_odd_integer() const {
    long long num = 0;
    for (int i = 0; i < a.size(); ++i) num += a.numerator(i) * b.numerator(i);
    num *= 4;
    const long long den = a.denominator() * b.denominator();
    if (num % den != 0) return false;
    return ((num / den) % 2) != 0;
}

std::string Characteristic::key() const {
    return a.reduced_mod_one().to_string() + "|" + b.normalized().to_string();
}

namespace {

// cis(2 pi k/den) with the angle reduced exactly in rational arithmetic.
Complex unit_phase(long long num, long long den) {
    long long r = num % den;
    if (r < 0) r += den;
    const double angle = 2.0 * kPi * static_cast<double>(r) / static_cast<double>(den);
    return Complex(std::cos(angle), std::sin(angle));
}

struct InnerSum {
    Complex value;
    double tail_bound;
    double abs_sum;
};

// Core truncated sum for theta[a;0](w, tau); w already argument-reduced.
InnerSum theta_inner(const RationalVector& a, const CVector& w, const PeriodMatrix& pm,
                     double eps_target) {
    const int g = pm.genus();
    const RMatrix& Y = pm.imag_part();
    const RMatrix& Yinv = pm.imag_inverse();
    const RMatrix X = pm.tau().real();
    const double lambda = pm.lambda_min();

    RVector y(g), wre(g);
    for (int i = 0; i < g; ++i) {
        y(i) = w(i).imag();
        wre(i) = w(i).real();
    }
    const RVector c0 = -(Yinv * y);
    const double log_prefactor = kPi * y.dot(Yinv * y);
    const double log_axis = static_cast<double>(g) * std::log(2.0 + std::sqrt(2.0 / lambda));

    const double eps_t = std::max(eps_target, 1e-300);
    double r2 = (2.0 / kPi) * (log_prefactor + log_axis + std::log(1.0 / eps_t)) + 1.0;
    r2 = std::max(r2, 1.0);
    const double radius = std::sqrt(r2);

    // Bounding box of the ellipsoid {(x - c0)^T Y (x - c0) <= R^2} around the
    // shifted center c0 - a.
    std::vector<long long> lo(static_cast<std::size_t>(g)), hi(static_cast<std::size_t>(g));
    double count = 1.0;
    for (int i = 0; i < g; ++i) {
        const double half = radius * std::sqrt(Yinv(i, i));
        const double center = c0(i) - a.value(i);
        lo[static_cast<std::size_t>(i)] = static_cast<long long>(std::ceil(center - half));
        hi[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(center + half));
        count *= static_cast<double>(hi[static_cast<std::size_t>(i)] -
                                     lo[static_cast<std::size_t>(i)] + 1);
    }
    if (count > kMaxLatticePoints) {
        throw NearDegenerateError("truncation needs about " + format_real(count) +
                                  " lattice points (radius " + format_real(radius) +
                                  ", lambda_min " + format_real(lambda) + ")");
    }

    // Fixed lexicographic order plus compensated summation keeps the result
    // deterministic and the rounding error independent of the term count.
    Complex sum(0.0, 0.0);
    Complex comp(0.0, 0.0);
    double abs_sum = 0.0;
    std::vector<long long> n(lo);
    RVector m(g), diff(g);
    while (true) {
        for (int i = 0; i < g; ++i) {
            m(i) = static_cast<double>(n[static_cast<std::size_t>(i)]) + a.value(i);
            diff(i) = m(i) - c0(i);
        }
        if (diff.dot(Y * diff) <= r2) {
            const double mag_exp = -kPi * m.dot(Y * m) - 2.0 * kPi * m.dot(y);
            const double phase = kPi * m.dot(X * m) + 2.0 * kPi * m.dot(wre);
            const double mag = std::exp(mag_exp);
            const Complex term(mag * std::cos(phase), mag * std::sin(phase));
            const Complex t = term - comp;
            const Complex s = sum + t;
            comp = (s - sum) - t;
            sum = s;
            abs_sum += mag;
        }
        int pos = g;
        bool done = false;
        while (pos > 0) {
            --pos;
            if (++n[static_cast<std::size_t>(pos)] <= hi[static_cast<std::size_t>(pos)]) break;
            n[static_cast<std::size_t>(pos)] = lo[static_cast<std::size_t>(pos)];
            if (pos == 0) done = true;
        }
        if (done) break;
    }

    const double tail =
        std::exp(log_prefactor + log_axis - kPi * r2 / 2.0);
    return InnerSum{sum, tail, abs_sum};
}

} // namespace

ThetaValue theta(const Characteristic& ch, const CVector& z, const PeriodMatrix& pm, double eps) {
    const int g = pm.genus();
    if (ch.a.size() != g || ch.b.size() != g || z.size() != g)
        throw Error("characteristic/argument dimensions do not match the period matrix");
    if (eps <= 0.0) throw Error("theta eps must be positive");
    if (pm.lambda_min() < PeriodMatrix::kNearDegenerateThreshold)
        throw NearDegenerateError("lambda_min(Im tau) = " + format_real(pm.lambda_min()) +
                                  " is below " +
                                  format_real(PeriodMatrix::kNearDegenerateThreshold));

    // theta[a;b](z) = theta[a;0](z + b) by definition.
    CVector w = z;
    for (int i = 0; i < g; ++i) w(i) += ch.b.value(i);

    // Reduce w = w0 + tau m + n and use the exact transformation law.
    RVector im(g);
    for (int i = 0; i < g; ++i) im(i) = w(i).imag();
    const RVector u = pm.imag_inverse() * im;
    Eigen::VectorXi mred(g), nred(g);
    for (int i = 0; i < g; ++i) mred(i) = static_cast<int>(std::lround(u(i)));
    CVector w0 = w;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) w0(i) -= pm.tau()(i, j) * static_cast<double>(mred(j));
    }
    for (int i = 0; i < g; ++i) {
        nred(i) = static_cast<int>(std::lround(w0(i).real()));
        w0(i) -= static_cast<double>(nred(i));
    }

    // factor = exp(-i pi m^T tau m - 2 pi i m^T w0 + 2 pi i a^T n)
    Complex expnt(0.0, 0.0);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j)
            expnt += Complex(0.0, -kPi) * pm.tau()(i, j) * static_cast<double>(mred(i)) *
                     static_cast<double>(mred(j));
        expnt += Complex(0.0, -2.0 * kPi) * static_cast<double>(mred(i)) * w0(i);
    }
    long long phase_num = 0;
    for (int i = 0; i < g; ++i) phase_num += ch.a.numerator(i) * nred(i);
    const Complex factor = std::exp(expnt) * unit_phase(phase_num, ch.a.denominator());
    const double factor_mag = std::abs(factor);

    const double eps_inner = eps / (2.0 * std::max(factor_mag, 1e-300));
    const InnerSum inner = theta_inner(ch.a, w0, pm, eps_inner);

    const Complex value = factor * inner.value;
    // tail + compensated-summation rounding + phase-factor rounding slack
    const double bound =
        factor_mag * (inner.tail_bound + 1e-15 * inner.abs_sum) + 1e-13 * std::abs(value);
    return ThetaValue{value, bound};
}

ThetaValue theta_constant(const Characteristic& ch, const PeriodMatrix& pm, double eps) {
    return theta(ch, CVector::Zero(pm.genus()), pm, eps);
}

Complex quasiperiodicity_factor(const Characteristic& ch, const Eigen::VectorXi& m,
                                const Eigen::VectorXi& n, const CVector& z,
                                const PeriodMatrix& pm) {
    const int g = pm.genus();
    Complex expnt(0.0, 0.0);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j)
            expnt += Complex(0.0, -kPi) * pm.tau()(i, j) * static_cast<double>(m(i)) *
                     static_cast<double>(m(j));
        expnt += Complex(0.0, -2.0 * kPi) * static_cast<double>(m(i)) * z(i);
    }
    // a^T n - b^T m in exact rational arithmetic
    const long long da = ch.a.denominator();
    const long long db = ch.b.denominator();
    long long num = 0;
    for (int i = 0; i < g; ++i) {
        num += ch.a.numerator(i) * n(i) * db;
        num -= ch.b.numerator(i) * m(i) * da;
    }
    return std::exp(expnt) * unit_phase(num, da * db);
}

ThetaValue ThetaConstantCache::get_or_compute(const Characteristic& ch, const PeriodMatrix& pm,
                                              double eps) {
    const std::string key = ch.key() + "|" + pm.fingerprint() + "|" + format_real(eps);
    {
        std::shared_lock lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
    }
    const ThetaValue v = theta_constant(ch, pm, eps);
    {
        std::unique_lock lock(mutex_);
        map_.emplace(key, v);
    }
    return v;
}

std::size_t ThetaConstantCache::size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
}

} // namespace thetamult
