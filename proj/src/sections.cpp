#include "thetamult/sections.hpp"

#include <Eigen/SVD>

#include "thetamult/random_util.hpp"
#include "thetamult/text_util.hpp"

namespace thetamult {

SectionBasis::SectionBasis(BundleLevel level, PolarizationType type, PeriodMatrix pm,
                           PeriodMatrix pm_scaled, std::vector<SectionEntry> entries)
    : level_(level),
      type_(std::move(type)),
      pm_(std::move(pm)),
      pm_scaled_(std::move(pm_scaled)),
      entries_(std::move(entries)) {}

SectionBasis SectionBasis::level_one(const PolarizationType& type, const PeriodMatrix& pm) {
    if (type.genus() != pm.genus()) throw Error("genus mismatch between type and period matrix");
    std::vector<SectionEntry> entries;
    for (const auto& x : subgroup_2K1(type)) {
        entries.push_back(SectionEntry{x, Characteristic::from_index(type, x), 1});
    }
    return SectionBasis(BundleLevel::One, type, pm, pm, std::move(entries));
}

SectionBasis SectionBasis::level_two(const PolarizationType& type, const PeriodMatrix& pm) {
    if (type.genus() != pm.genus()) throw Error("genus mismatch between type and period matrix");
    std::vector<SectionEntry> entries;
    for (const auto& x : enumerate_K1(type)) {
        entries.push_back(SectionEntry{x, Characteristic::from_index(type, x), 2});
    }
    return SectionBasis(BundleLevel::Two, type, pm, pm.scaled(2.0), std::move(entries));
}

Complex SectionBasis::evaluate_entry(std::size_t i, const CVector& z, double eps) const {
    const SectionEntry& e = entries_[i];
    if (e.argument_scale == 1) return theta(e.ch, z, pm_, eps).value;
    return theta(e.ch, 2.0 * z, pm_scaled_, eps).value;
}

CVector SectionBasis::evaluate_all(const CVector& z, double eps) const {
    CVector out(static_cast<Eigen::Index>(entries_.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = evaluate_entry(i, z, eps);
    return out;
}

Complex evaluate(const SectionVector& v, const CVector& z, double eps) {
    if (!v.basis) throw Error("section vector has no basis");
    if (v.coeffs.size() != static_cast<Eigen::Index>(v.basis->size()))
        throw Error("coefficient count " + std::to_string(v.coeffs.size()) +
                    " does not match basis size " + std::to_string(v.basis->size()));
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < v.coeffs.size(); ++i) {
        if (v.coeffs(i) == Complex(0.0, 0.0)) continue;
        acc += v.coeffs(i) * v.basis->evaluate_entry(static_cast<std::size_t>(i), z, eps);
    }
    return acc;
}

IndependenceReport linear_independence_check(const SectionBasis& basis, int n_samples,
                                             std::uint64_t seed, double eps, double tol) {
    const int needed = 2 * static_cast<int>(basis.size());
    if (n_samples < needed) n_samples = needed;

    const auto points =
        lattice_domain_samples(basis.period_matrix(), basis.type(), n_samples, seed);
    CMatrix m(n_samples, static_cast<Eigen::Index>(basis.size()));
    for (int s = 0; s < n_samples; ++s)
        m.row(s) = basis.evaluate_all(points[static_cast<std::size_t>(s)], eps).transpose();

    Eigen::JacobiSVD<CMatrix> svd(m);
    IndependenceReport report;
    report.n_samples = n_samples;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        report.singular_values.push_back(svd.singularValues()(i));
    report.sigma_max = report.singular_values.front();
    report.sigma_min = report.singular_values.back();
    report.rank = 0;
    for (double s : report.singular_values)
        if (s > tol * report.sigma_max) ++report.rank;
    report.independent = (report.rank == static_cast<int>(basis.size()));
    if (!report.independent) {
        throw DegenerateSamplingError("evaluation matrix rank " + std::to_string(report.rank) +
                                      " < " + std::to_string(basis.size()) +
                                      " at tolerance " + format_real(tol) + " * sigma_max");
    }
    return report;
}

} // namespace thetamult
