#pragma once

// Assembly of the multiplication map mu : Sym^2 H^0(L) -> H^0(L^2) in the
// classical theta coordinates, its character-block decomposition, and the
// numerical injectivity criterion.
//
// Monomial bases: columns are unordered index pairs {x1,x2} of even elements
// (the product section theta_{x1} theta_{x2}); rows are the level-two basis
// indexed by all of K_1.  Two independent assembly routes are provided:
//
//  * formula route: the theta addition identity
//      theta[a](z,tau) theta[b](z,tau)
//        = sum_{nu in {0,1}^g} theta[(a+b+nu)/2](2z, 2tau)
//                              * theta[(a-b+nu)/2](0, 2tau),
//    so the column of (c1,c2) places the constant with index
//    (c1-c2)/2 + D nu in the row with index (c1+c2)/2 + D nu (mod 2D);
//
//  * interpolation route: least-squares fit of the product sections against
//    the level-two basis at random points of the fundamental domain.
//
// The two must agree entrywise; neither is trusted alone.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "thetamult/av_core.hpp"
#include "thetamult/sections.hpp"
#include "thetamult/theta_eval.hpp"
#include "thetamult/theta_group.hpp"

namespace thetamult {

enum class MatrixProvenance { Formula, Interpolation };

struct PairIndex {
    GroupElement first, second;  // first <= second lexicographically
};

struct MultMatrix {
    PolarizationType type = PolarizationType({1});
    std::vector<GroupElement> rows;  // K_1, lexicographic
    std::vector<PairIndex> cols;     // unordered pairs of 2K_1, lexicographic
    CMatrix entries;
    MatrixProvenance provenance = MatrixProvenance::Formula;

    std::size_t row_index(const GroupElement& x) const;
    std::size_t col_index(const GroupElement& x1, const GroupElement& x2) const;
};

MultMatrix mult_matrix_formula(const PolarizationType& type, const PeriodMatrix& pm, double eps,
                               ThetaConstantCache* cache = nullptr);

struct InterpolationResult {
    MultMatrix matrix;
    double residual = 0.0;   // ||A X - B||_F / ||B||_F
    double condition = 0.0;  // condition number of the sample matrix
    int attempts = 1;
};

// n_samples = 0 picks 2 h^0(L^2) + 8.  IllConditionedError after three
// resampling attempts, ResidualTooLargeError when the fit residual exceeds
// 1e-6 of scale.
InterpolationResult mult_matrix_interpolation(const PolarizationType& type, const PeriodMatrix& pm,
                                              double eps, int n_samples, std::uint64_t seed);

// Character block M_rho = (C_{t,w,rho}) with rows over 2K_1 / Z_2' modulo
// t ~ -t and columns over W, where
//   C_{t,w,rho} = sum_{z in Z_2'} rho(z) theta-constant(t + w + z).
struct BlockReport {
    CharacterRho rho;
    std::vector<GroupElement> row_reps;
    std::vector<GroupElement> col_reps;  // W
    CMatrix matrix;
    std::vector<double> singular_values;
    int rank = 0;
    double margin = 0.0;  // sigma_min / sigma_max over the full shape
    bool full_rank = false;
};

std::vector<BlockReport> character_blocks(const PolarizationType& type, const PeriodMatrix& pm,
                                          double eps, double rank_tol = 1e-8,
                                          ThetaConstantCache* cache = nullptr);

// Symmetrized source element theta_{(x1,x2),rho} =
//   sum_{z in Z_2'} rho(z) theta_{x1+z} . theta_{x2+z}
// expressed over the monomial pair columns.  One element per diagonal orbit
// and character, identically-zero combinations dropped; what survives is a
// basis of Sym^2 (count checked against h0 (h0+1)/2).
struct SymmetrizedBasisElement {
    PairIndex pair;       // lexicographically smallest orbit member
    int rho_index = 0;    // into characters_of_Z2prime order
    GroupElement sum;     // sigma = x1 + x2, the coset label of the block
    CVector coeffs;       // over MultMatrix columns
};

std::vector<SymmetrizedBasisElement> symmetrized_source_basis(const PolarizationType& type);

struct BlockStructureResult {
    double off_block_residual = 0.0;  // largest coupling between distinct blocks
    double scale = 0.0;               // largest transformed entry
    double entry_mismatch = 0.0;      // in-block entries vs the C_{t,w,rho} formula
};

// Rewrites the assembled matrix in the symmetrized source basis and the
// combination target basis and measures the coupling between distinct
// (coset, character) blocks.  BlockLeakError above 1e-8 * scale.
BlockStructureResult block_structure_check(const PolarizationType& type, const PeriodMatrix& pm,
                                           double eps, ThetaConstantCache* cache = nullptr);

struct InjectivityReport {
    bool injective = false;
    bool block_route_injective = false;
    bool direct_route_injective = false;
    double block_margin = 0.0;
    double direct_margin = 0.0;
    std::vector<BlockReport> blocks;
    std::vector<double> full_singular_values;
    std::size_t source_dim = 0;
    std::size_t target_dim = 0;
    double eps = 0.0;
    double rank_tol = 0.0;
};

// Two independent verdicts: every character block of maximal rank, and the
// smallest singular value of the full matrix above rank_tol * sigma_max.
// VerdictMismatchError when they disagree.
InjectivityReport injectivity_report(const PolarizationType& type, const PeriodMatrix& pm,
                                     double eps, double rank_tol = 1e-8,
                                     ThetaConstantCache* cache = nullptr);

// Orthonormal basis of the numerical kernel over the monomial pair columns.
// EmptyKernelError on an injective instance.
std::vector<CVector> kernel_basis(const MultMatrix& mm, double rank_tol = 1e-8);
std::vector<CVector> kernel_basis(const PolarizationType& type, const PeriodMatrix& pm, double eps,
                                  double rank_tol = 1e-8);

// For a type with at least one odd divisor: the refined type doubles the odd
// divisors, and the sections of the original bundle must span exactly the
// translation-invariant part of the refined basis on the same tau.  Returns
// the sine of the largest principal angle between the two evaluation spans;
// SpanMismatchError above 1e-8.
double pullback_invariance_check(const PolarizationType& type, const PeriodMatrix& pm, double eps,
                                 int n_samples = 0, std::uint64_t seed = 11);

void write_matrix_dump(std::ostream& out, const MultMatrix& mm);

} // namespace thetamult
