#include "doctest.h"

#include <cmath>

#include "thetamult/av_core.hpp"
#include "thetamult/random_util.hpp"
#include "thetamult/sweep.hpp"

using namespace thetamult;

namespace {

PeriodMatrix pm_g1(Complex t) {
    CMatrix m(1, 1);
    m(0, 0) = t;
    return PeriodMatrix::validate(m);
}

} // namespace

TEST_CASE("polarization type validation") {
    CHECK(PolarizationType({1, 2}).odd_count() == 1);
    CHECK(PolarizationType({1, 2}).section_count() == 2);
    CHECK(PolarizationType({1, 2}).section_count_level2() == 8);
    CHECK(PolarizationType::parse("1,2,4").genus() == 3);
    CHECK_THROWS_AS(PolarizationType({2, 3}), Error);  // 2 does not divide 3
    CHECK_THROWS_AS(PolarizationType({0}), Error);
    CHECK_THROWS_AS(PolarizationType(std::vector<int>{}), Error);
}

TEST_CASE("period matrix validation") {
    CHECK(pm_g1(Complex(0, 1)).lambda_min() == doctest::Approx(1.0));

    CMatrix diag = CMatrix::Zero(2, 2);
    diag(0, 0) = Complex(0, 1);
    diag(1, 1) = Complex(0, 2);
    CHECK(PeriodMatrix::validate(diag).lambda_min() == doctest::Approx(1.0));

    CMatrix bad(2, 2);
    bad(0, 0) = Complex(0, 1);
    bad(0, 1) = Complex(1, 0);
    bad(1, 0) = Complex(0, 0);
    bad(1, 1) = Complex(0, 1);
    CHECK_THROWS_AS(PeriodMatrix::validate(bad), NotSymmetricError);

    CMatrix neg(1, 1);
    neg(0, 0) = Complex(0.5, -1.0);
    CHECK_THROWS_AS(PeriodMatrix::validate(neg), NotPositiveError);

    CHECK(pm_g1(Complex(0, 1e-4)).near_degenerate());
    CHECK_FALSE(pm_g1(Complex(0, 1)).near_degenerate());
}

TEST_CASE("fingerprints distinguish matrices and are stable") {
    const PeriodMatrix a = pm_g1(Complex(0, 1));
    const PeriodMatrix b = pm_g1(Complex(0, 2));
    CHECK(a.fingerprint() == pm_g1(Complex(0, 1)).fingerprint());
    CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("hermitian form from the lattice pairing") {
    // The lattice gram [[0,D],[-D,0]] pins H = (Im tau)^{-1} regardless of D.
    const SymplecticData s1(pm_g1(Complex(0, 1)), PolarizationType({1}));
    CHECK(s1.hermitian_matrix()(0, 0) == doctest::Approx(1.0));

    const SymplecticData s2(pm_g1(Complex(0, 1)), PolarizationType({2}));
    CHECK(s2.hermitian_matrix()(0, 0) == doctest::Approx(1.0));

    CMatrix diag = CMatrix::Zero(2, 2);
    diag(0, 0) = diag(1, 1) = Complex(0, 1);
    const SymplecticData s3(PeriodMatrix::validate(diag), PolarizationType({1, 1}));
    CHECK((s3.hermitian_matrix() - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("lattice gram matches the polarization for random fixtures") {
    UniformRng rng(41);
    const PolarizationType types[] = {PolarizationType({1}), PolarizationType({2}),
                                      PolarizationType({1, 2}), PolarizationType({2, 2}),
                                      PolarizationType({1, 1, 2})};
    for (const auto& type : types) {
        const int g = type.genus();
        const PeriodMatrix pm = random_siegel(g, rng.raw(), 1.0);
        const SymplecticData sd = symplectic_data(pm, type);
        RMatrix expected = RMatrix::Zero(2 * g, 2 * g);
        for (int i = 0; i < g; ++i) {
            expected(i, g + i) = type.divisor(i);
            expected(g + i, i) = -type.divisor(i);
        }
        CHECK((sd.lattice_gram() - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("hermitian form is recovered from its imaginary part") {
    UniformRng rng(42);
    const PeriodMatrix pm = random_siegel(2, 99, 1.0);
    const SymplecticData sd = symplectic_data(pm, PolarizationType({1, 2}));
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        CVector z(2), w(2);
        for (int i = 0; i < 2; ++i) {
            z(i) = Complex(rng.range(-3, 3), rng.range(-3, 3));
            w(i) = Complex(rng.range(-3, 3), rng.range(-3, 3));
        }
        const CVector iz = Complex(0, 1) * z;
        const Complex recon = Complex(0, 1) * sd.symplectic(z, w) + sd.symplectic(iz, w);
        worst = std::max(worst, std::abs(sd.hermitian(z, w) - recon));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("cocycle identity") {
    const SymplecticData sd(pm_g1(Complex(0, 1)), PolarizationType({1}));
    CVector v(1), lam(1), z(1);

    // v = 0: all terms vanish
    v(0) = Complex(0, 0);
    lam(0) = Complex(0, 1);
    z(0) = Complex(0.4, -0.2);
    CHECK(check_cocycle_identity(sd, v, lam, z) < 1e-14);

    // lambda = 0
    v(0) = Complex(1.5, -0.5);
    lam(0) = Complex(0, 0);
    CHECK(check_cocycle_identity(sd, v, lam, z) < 1e-14);

    // the worked example: v=1, lambda=i, z generic
    v(0) = Complex(1, 0);
    lam(0) = Complex(0, 1);
    z(0) = Complex(0.3, 0.7);
    CHECK(check_cocycle_identity(sd, v, lam, z) < 1e-10);

    // non-lattice lambda is rejected
    lam(0) = Complex(0.5, 0.3);
    CHECK_THROWS_AS(check_cocycle_identity(sd, v, lam, z), LatticeMembershipError);
}

TEST_CASE("cocycle identity on random samples per fixture") {
    const PolarizationType types[] = {PolarizationType({2}), PolarizationType({1, 2})};
    for (const auto& type : types) {
        const int g = type.genus();
        const PeriodMatrix pm = random_siegel(g, 7 + static_cast<std::uint64_t>(g), 1.0);
        const SymplecticData sd = symplectic_data(pm, type);
        UniformRng rng(13);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            CVector v(g), z(g);
            Eigen::VectorXi m(g), n(g);
            for (int i = 0; i < g; ++i) {
                v(i) = Complex(rng.range(-2, 2), rng.range(-2, 2));
                z(i) = Complex(rng.range(-2, 2), rng.range(-2, 2));
                m(i) = static_cast<int>(rng.raw() % 7) - 3;
                n(i) = static_cast<int>(rng.raw() % 7) - 3;
            }
            const Complex h = sd.hermitian(v, sd.lattice_vector(m, n));
            const double residual = check_cocycle_identity(sd, v, sd.lattice_vector(m, n), z);
            worst = std::max(worst, residual / (1.0 + std::abs(h) * 3.14159265358979323846));
        }
        CHECK(worst < 1e-10);
    }
}
