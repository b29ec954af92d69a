#pragma once

// Concrete bases of the section spaces.
//
//   level one: { theta[(2D)^{-1} c; 0](z, tau)   : c even mod 2D }, prod d_i
//   level two: { theta[(2D)^{-1} c; 0](2z, 2tau) : c mod 2D },  2^g prod d_i
//
// The argument scaling (2z, 2tau) is part of the basis entry; both families
// are eigenbases of translation by the respective theta groups.

#include <cstdint>
#include <vector>

#include "thetamult/av_core.hpp"
#include "thetamult/theta_eval.hpp"
#include "thetamult/theta_group.hpp"

namespace thetamult {

enum class BundleLevel { One, Two };

struct SectionEntry {
    GroupElement index;
    Characteristic ch;
    int argument_scale;  // 1 for the bundle itself, 2 for its square
};

class SectionBasis {
public:
    static SectionBasis level_one(const PolarizationType& type, const PeriodMatrix& pm);
    static SectionBasis level_two(const PolarizationType& type, const PeriodMatrix& pm);

    BundleLevel level() const { return level_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<SectionEntry>& entries() const { return entries_; }
    const PolarizationType& type() const { return type_; }
    const PeriodMatrix& period_matrix() const { return pm_; }
    const PeriodMatrix& scaled_period_matrix() const { return pm_scaled_; }

    Complex evaluate_entry(std::size_t i, const CVector& z, double eps) const;
    CVector evaluate_all(const CVector& z, double eps) const;

private:
    SectionBasis(BundleLevel level, PolarizationType type, PeriodMatrix pm, PeriodMatrix pm_scaled,
                 std::vector<SectionEntry> entries);

    BundleLevel level_;
    PolarizationType type_;
    PeriodMatrix pm_;
    PeriodMatrix pm_scaled_;
    std::vector<SectionEntry> entries_;
};

struct SectionVector {
    const SectionBasis* basis;
    CVector coeffs;
};

// sum_i coeff_i * theta_i(z), fixed summation order.
Complex evaluate(const SectionVector& v, const CVector& z, double eps);

struct IndependenceReport {
    std::vector<double> singular_values;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    int rank = 0;
    bool independent = false;
    int n_samples = 0;
};

// Evaluates all sections at n_samples pseudorandom points of the fundamental
// domain and inspects the singular values of the evaluation matrix.
// DegenerateSamplingError when the matrix is rank-deficient at
// tol * sigma_max.
IndependenceReport linear_independence_check(const SectionBasis& basis, int n_samples,
                                             std::uint64_t seed, double eps = 1e-10,
                                             double tol = 1e-8);

} // namespace thetamult
