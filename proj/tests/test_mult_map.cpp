#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "thetamult/mult_map.hpp"
#include "thetamult/random_util.hpp"
#include "thetamult/sweep.hpp"

using namespace thetamult;

namespace {

PeriodMatrix pm_g1(Complex t) {
    CMatrix m(1, 1);
    m(0, 0) = t;
    return PeriodMatrix::validate(m);
}

PeriodMatrix pm_diag2(Complex a, Complex b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return PeriodMatrix::validate(m);
}

double rel_diff(const CMatrix& a, const CMatrix& b) {
    const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

} // namespace

TEST_CASE("principal polarization column") {
    const PeriodMatrix pm = pm_g1(Complex(0, 1));
    const PeriodMatrix pm2 = pm.scaled(2.0);
    const MultMatrix mm = mult_matrix_formula(PolarizationType({1}), pm, 1e-12);
    REQUIRE(mm.rows.size() == 2);
    REQUIRE(mm.cols.size() == 1);
    const Complex c0 = theta_constant(Characteristic::zero(1), pm2, 1e-12).value;
    const Complex c1 =
        theta_constant(Characteristic{RationalVector({1}, 2), RationalVector({0}, 1)}, pm2, 1e-12)
            .value;
    CHECK(std::abs(mm.entries(0, 0) - c0) < 1e-11);
    CHECK(std::abs(mm.entries(1, 0) - c1) < 1e-11);
}

TEST_CASE("column support for the type (2) square pair") {
    const PeriodMatrix pm = pm_g1(Complex(0.1, 1.2));
    const PeriodMatrix pm2 = pm.scaled(2.0);
    const MultMatrix mm = mult_matrix_formula(PolarizationType({2}), pm, 1e-12);
    REQUIRE(mm.rows.size() == 4);
    REQUIRE(mm.cols.size() == 3);
    const std::size_t col = mm.col_index(GroupElement{{0}}, GroupElement{{0}});
    const Complex c0 = theta_constant(Characteristic::zero(1), pm2, 1e-12).value;
    const Complex ch =
        theta_constant(Characteristic{RationalVector({1}, 2), RationalVector({0}, 1)}, pm2, 1e-12)
            .value;
    CHECK(std::abs(mm.entries(0, static_cast<Eigen::Index>(col)) - c0) < 1e-11);
    CHECK(std::abs(mm.entries(2, static_cast<Eigen::Index>(col)) - ch) < 1e-11);
    CHECK(std::abs(mm.entries(1, static_cast<Eigen::Index>(col))) < 1e-13);
    CHECK(std::abs(mm.entries(3, static_cast<Eigen::Index>(col))) < 1e-13);
}

TEST_CASE("diagonal pair columns live on the halved-sum coset") {
    for (const auto& type : {PolarizationType({2}), PolarizationType({1, 2}),
                             PolarizationType({2, 2})}) {
        const PeriodMatrix pm = random_siegel(type.genus(), 23, 0.8);
        const MultMatrix mm = mult_matrix_formula(type, pm, 1e-11);
        for (const auto& x : subgroup_2K1(type)) {
            const std::size_t col = mm.col_index(x, x);
            std::set<std::vector<int>> allowed;
            const GroupElement y = halve(type, add(type, x, x));
            for (const auto& z : subgroup_Z2(type)) allowed.insert(add(type, y, z).c);
            for (std::size_t r = 0; r < mm.rows.size(); ++r) {
                const double mag = std::abs(
                    mm.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)));
                if (!allowed.count(mm.rows[r].c)) CHECK(mag < 1e-13);
            }
        }
    }
}

TEST_CASE("formula route equals interpolation route") {
    // every divisor chain with product at most 8 and genus up to 3
    std::vector<PolarizationType> types;
    std::vector<int> stack;
    auto rec = [&](auto&& self) -> void {
        if (!stack.empty()) {
            long long prod = 1;
            for (int d : stack) prod *= d;
            if (prod <= 8) types.push_back(PolarizationType(stack));
        }
        if (stack.size() == 3) return;
        const int lo = stack.empty() ? 1 : stack.back();
        for (int d = lo; d <= 8; ++d) {
            if (!stack.empty() && d % stack.back() != 0) continue;
            stack.push_back(d);
            self(self);
            stack.pop_back();
        }
    };
    rec(rec);

    UniformRng rng(7);
    for (const auto& type : types) {
        for (int rep = 0; rep < 5; ++rep) {
            const PeriodMatrix pm = random_siegel(type.genus(), rng.raw(), 0.9);
            const MultMatrix formula = mult_matrix_formula(type, pm, 1e-11);
            const InterpolationResult interp =
                mult_matrix_interpolation(type, pm, 1e-11, 0, rng.raw());
            INFO("type ", type.to_string(), " rep ", rep);
            CHECK(interp.residual < 1e-6);
            CHECK(rel_diff(formula.entries, interp.matrix.entries) < 1e-8);
        }
    }
}

TEST_CASE("tensor product structure over diagonal period matrices") {
    const PeriodMatrix pm = pm_diag2(Complex(0.0, 1.0), Complex(0.2, 1.4));
    const PolarizationType type({2, 2});
    const MultMatrix mm = mult_matrix_formula(type, pm, 1e-12);
    const MultMatrix f0 = mult_matrix_formula(PolarizationType({2}), pm_g1(Complex(0.0, 1.0)), 1e-12);
    const MultMatrix f1 = mult_matrix_formula(PolarizationType({2}), pm_g1(Complex(0.2, 1.4)), 1e-12);
    // entry for pair (x,y) in row r factors coordinatewise
    double worst = 0.0;
    for (std::size_t col = 0; col < mm.cols.size(); ++col) {
        const auto& x1 = mm.cols[col].first.c;
        const auto& x2 = mm.cols[col].second.c;
        for (std::size_t r = 0; r < mm.rows.size(); ++r) {
            const auto& rr = mm.rows[r].c;
            Complex expect(1, 0);
            const MultMatrix* fs[2] = {&f0, &f1};
            for (int i = 0; i < 2; ++i) {
                // unordered coordinate pair: take the sorted representative
                const int lo = std::min(x1[static_cast<std::size_t>(i)], x2[static_cast<std::size_t>(i)]);
                const int hi = std::max(x1[static_cast<std::size_t>(i)], x2[static_cast<std::size_t>(i)]);
                const std::size_t c1 = fs[i]->col_index(GroupElement{{lo}}, GroupElement{{hi}});
                const std::size_t r1 = fs[i]->row_index(GroupElement{{rr[static_cast<std::size_t>(i)]}});
                expect *= fs[i]->entries(static_cast<Eigen::Index>(r1), static_cast<Eigen::Index>(c1));
            }
            worst = std::max(worst,
                             std::abs(mm.entries(static_cast<Eigen::Index>(r),
                                                 static_cast<Eigen::Index>(col)) -
                                      expect));
        }
    }
    CHECK(worst < 1e-9 * mm.entries.cwiseAbs().maxCoeff());
}

TEST_CASE("character blocks for small types") {
    const PeriodMatrix pm = pm_g1(Complex(0, 1));
    const PeriodMatrix pm2 = pm.scaled(2.0);
    const auto blocks = character_blocks(PolarizationType({2}), pm, 1e-12);
    REQUIRE(blocks.size() == 2);
    const Complex c0 = theta_constant(Characteristic::zero(1), pm2, 1e-12).value;
    const Complex ch =
        theta_constant(Characteristic{RationalVector({1}, 2), RationalVector({0}, 1)}, pm2, 1e-12)
            .value;
    REQUIRE(blocks[0].matrix.rows() == 1);
    REQUIRE(blocks[0].matrix.cols() == 1);
    CHECK(std::abs(blocks[0].matrix(0, 0) - (c0 + ch)) < 1e-11);
    CHECK(std::abs(blocks[1].matrix(0, 0) - (c0 - ch)) < 1e-11);
    CHECK(blocks[0].full_rank);
    CHECK(blocks[1].full_rank);

    // type (1,...,1): a single character, one row across W = Z_2
    CMatrix t2 = CMatrix::Zero(2, 2);
    t2(0, 0) = t2(1, 1) = Complex(0, 1);
    const auto blocks11 =
        character_blocks(PolarizationType({1, 1}), PeriodMatrix::validate(t2), 1e-12);
    REQUIRE(blocks11.size() == 1);
    CHECK(blocks11[0].matrix.rows() == 1);
    CHECK(blocks11[0].matrix.cols() == 4);

    // type (2,...,2): scalars, one per character
    const auto blocks22 =
        character_blocks(PolarizationType({2, 2}), PeriodMatrix::validate(t2), 1e-12);
    REQUIRE(blocks22.size() == 4);
    for (const auto& b : blocks22) {
        CHECK(b.matrix.rows() == 1);
        CHECK(b.matrix.cols() == 1);
    }
}

TEST_CASE("symmetrized source basis bookkeeping") {
    for (const auto& type : {PolarizationType({2}), PolarizationType({1, 2}),
                             PolarizationType({2, 2})}) {
        const auto basis = symmetrized_source_basis(type);
        const long long n = type.section_count();
        CHECK(static_cast<long long>(basis.size()) == n * (n + 1) / 2);

        // index map over unordered pairs, in the shared lexicographic order
        const auto two_k1 = subgroup_2K1(type);
        std::map<std::pair<std::vector<int>, std::vector<int>>, Eigen::Index> col_of;
        Eigen::Index next = 0;
        for (std::size_t i = 0; i < two_k1.size(); ++i)
            for (std::size_t j = i; j < two_k1.size(); ++j)
                col_of[{two_k1[i].c, two_k1[j].c}] = next++;

        // rebuilding the combination from a diagonally shifted pair rescales
        // the coefficient vector by rho(z)
        const auto chars = characters_of_Z2prime(type);
        const auto z2p = subgroup_Z2prime(type);
        for (const auto& elem : basis) {
            for (const auto& z : z2p) {
                const GroupElement s1 = add(type, elem.pair.first, z);
                const GroupElement s2 = add(type, elem.pair.second, z);
                CVector shifted = CVector::Zero(elem.coeffs.size());
                for (const auto& zp : z2p) {
                    GroupElement a1 = add(type, s1, zp);
                    GroupElement a2 = add(type, s2, zp);
                    if (a2 < a1) std::swap(a1, a2);
                    shifted(col_of.at({a1.c, a2.c})) +=
                        static_cast<double>(chars[static_cast<std::size_t>(elem.rho_index)].value(zp));
                }
                const double sign = chars[static_cast<std::size_t>(elem.rho_index)].value(z);
                CHECK((shifted - sign * elem.coeffs).norm() == 0.0);
            }
        }
    }
}

TEST_CASE("block structure of the assembled matrix") {
    UniformRng rng(31);
    for (const auto& type : {PolarizationType({1}), PolarizationType({2}),
                             PolarizationType({1, 2}), PolarizationType({2, 2})}) {
        const PeriodMatrix pm = random_siegel(type.genus(), rng.raw(), 0.9);
        const BlockStructureResult r = block_structure_check(type, pm, 1e-11);
        CHECK(r.off_block_residual <= 1e-9 * std::max(r.scale, 1e-300));
        CHECK(r.entry_mismatch <= 1e-8 * std::max(r.scale, 1e-300));
    }
}

TEST_CASE("injectivity verdicts") {
    // principal polarization: single nonvanishing even constant
    const InjectivityReport r1 =
        injectivity_report(PolarizationType({1}), pm_g1(Complex(0.3, 1.7)), 1e-11);
    CHECK(r1.injective);

    // generic abelian surface of type (2,2)
    const InjectivityReport r22 =
        injectivity_report(PolarizationType({2, 2}), random_siegel(2, 4207, 1.0), 1e-11);
    CHECK(r22.injective);
    CHECK(r22.direct_margin > 1e-4);

    // a short random sweep at genus one
    UniformRng rng(5);
    for (int k = 0; k < 10; ++k) {
        const InjectivityReport r =
            injectivity_report(PolarizationType({2}), random_siegel(1, rng.raw(), 1.0), 1e-11);
        CHECK(r.injective);
        CHECK(r.block_route_injective == r.direct_route_injective);
    }
}

TEST_CASE("type (2,2) degenerates on the product locus") {
    // On a product of elliptic curves the monomials theta_{(0,0)} theta_{(2,2)}
    // and theta_{(0,2)} theta_{(2,0)} are the same function, so the map has an
    // honest kernel there.  The per-character matrices with rows over
    // 2K_1/Z_2' cannot see it (the affected rows live on the shifted coset),
    // so the two verdict routes must disagree loudly.
    const PolarizationType type({2, 2});
    const PeriodMatrix diag = pm_diag2(Complex(0, 1), Complex(0.1, 1.3));
    CHECK_THROWS_AS(injectivity_report(type, diag, 1e-11), VerdictMismatchError);

    // the factorization of the block constants still holds there
    CHECK(factorization_residual(type, diag, 1e-11) < 1e-9);

    // kernel = theta_{(0,0)} . theta_{(2,2)} - theta_{(0,2)} . theta_{(2,0)}
    const MultMatrix mm = mult_matrix_formula(type, diag, 1e-11);
    const auto kernel = kernel_basis(mm, 1e-8);
    REQUIRE(kernel.size() == 1);
    CVector expected = CVector::Zero(static_cast<Eigen::Index>(mm.cols.size()));
    expected(static_cast<Eigen::Index>(
        mm.col_index(GroupElement{{0, 0}}, GroupElement{{2, 2}}))) = Complex(1, 0);
    expected(static_cast<Eigen::Index>(
        mm.col_index(GroupElement{{0, 2}}, GroupElement{{2, 0}}))) = Complex(-1, 0);
    expected.normalize();
    CHECK(std::abs(std::abs(expected.dot(kernel[0])) - 1.0) < 1e-10);

    // away from the product locus the coupling constant is nonzero
    const PeriodMatrix generic = random_siegel(2, 99, 1.0);
    const InjectivityReport r = injectivity_report(type, generic, 1e-11);
    CHECK(r.injective);
}

TEST_CASE("rescaling rows or columns never flips a verdict") {
    UniformRng rng(67);
    const PolarizationType type({1, 2});
    const PeriodMatrix pm = random_siegel(2, 11, 1.0);
    MultMatrix mm = mult_matrix_formula(type, pm, 1e-11);

    Eigen::JacobiSVD<CMatrix> before(mm.entries);
    const auto sv_before = before.singularValues();
    const bool injective_before =
        sv_before(sv_before.size() - 1) > 1e-8 * sv_before(0);

    for (int rep = 0; rep < 5; ++rep) {
        CMatrix scaled = mm.entries;
        for (Eigen::Index i = 0; i < scaled.rows(); ++i)
            scaled.row(i) *= Complex(rng.range(0.2, 3.0), rng.range(-1.0, 1.0));
        for (Eigen::Index j = 0; j < scaled.cols(); ++j)
            scaled.col(j) *= Complex(rng.range(0.2, 3.0), rng.range(-1.0, 1.0));
        Eigen::JacobiSVD<CMatrix> after(scaled);
        const auto sv = after.singularValues();
        const bool injective_after = sv(sv.size() - 1) > 1e-8 * sv(0);
        CHECK(injective_after == injective_before);
    }
}

TEST_CASE("swapped pair input produces the same column") {
    const PolarizationType type({2});
    const PeriodMatrix pm = pm_g1(Complex(0.15, 1.05));
    const MultMatrix mm = mult_matrix_formula(type, pm, 1e-12);
    CHECK(mm.col_index(GroupElement{{0}}, GroupElement{{2}}) ==
          mm.col_index(GroupElement{{2}}, GroupElement{{0}}));
}

TEST_CASE("kernel extraction") {
    const PolarizationType type({2});
    const PeriodMatrix pm = pm_g1(Complex(0, 1));

    // injective instance: no kernel
    CHECK_THROWS_AS(kernel_basis(type, pm, 1e-11), EmptyKernelError);

    // synthetic matrix with a planted kernel vector
    MultMatrix synthetic = mult_matrix_formula(type, pm, 1e-11);
    CVector planted(3);
    planted << Complex(1, 0), Complex(-2, 1), Complex(0.5, 0.5);
    planted.normalize();
    // project the columns onto the orthogonal complement of `planted`
    synthetic.entries = synthetic.entries -
                        (synthetic.entries * planted) * planted.adjoint();
    const auto kernel = kernel_basis(synthetic, 1e-8);
    REQUIRE(kernel.size() == 1);
    CHECK(std::abs(std::abs(planted.dot(kernel[0])) - 1.0) < 1e-8);
    CHECK((synthetic.entries * kernel[0]).norm() <=
          1e-8 * synthetic.entries.cwiseAbs().maxCoeff() * 10);
}

TEST_CASE("pullback invariance") {
    // no odd divisor: precondition rejected
    CHECK_THROWS_AS(pullback_invariance_check(PolarizationType({2, 2}),
                                              pm_diag2(Complex(0, 1), Complex(0, 1)), 1e-11),
                    Error);

    CHECK(pullback_invariance_check(PolarizationType({1}), pm_g1(Complex(0, 1)), 1e-11) < 1e-8);
    CHECK(pullback_invariance_check(PolarizationType({1, 2}),
                                    pm_diag2(Complex(0, 1), Complex(0, 1)), 1e-11) < 1e-8);
}

TEST_CASE("matrix dump is complete and deterministic") {
    const PolarizationType type({2});
    const PeriodMatrix pm = pm_g1(Complex(0, 1));
    const MultMatrix mm = mult_matrix_formula(type, pm, 1e-11);
    std::ostringstream a, b;
    write_matrix_dump(a, mm);
    write_matrix_dump(b, mm);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("rows 4") != std::string::npos);
    CHECK(a.str().find("cols 3") != std::string::npos);
    CHECK(a.str().find("provenance formula") != std::string::npos);
}
