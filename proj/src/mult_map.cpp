#include "thetamult/mult_map.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <Eigen/SVD>

#include "thetamult/random_util.hpp"
#include "thetamult/text_util.hpp"

namespace thetamult {

namespace {

std::vector<PairIndex> unordered_pairs(const std::vector<GroupElement>& elems) {
    std::vector<PairIndex> pairs;
    pairs.reserve(elems.size() * (elems.size() + 1) / 2);
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (std::size_t j = i; j < elems.size(); ++j)
            pairs.push_back(PairIndex{elems[i], elems[j]});
    return pairs;
}

std::map<std::vector<int>, std::size_t> index_of(const std::vector<GroupElement>& elems) {
    std::map<std::vector<int>, std::size_t> m;
    for (std::size_t i = 0; i < elems.size(); ++i) m[elems[i].c] = i;
    return m;
}

GroupElement lexmin_mod_subgroup(const PolarizationType& D, const GroupElement& t,
                                 const std::vector<GroupElement>& sub) {
    GroupElement best = t;
    for (const auto& z : sub) {
        GroupElement cand = add(D, t, z);
        if (cand < best) best = cand;
    }
    return best;
}

} // namespace

std::size_t MultMatrix::row_index(const GroupElement& x) const {
    const auto it = std::lower_bound(rows.begin(), rows.end(), x);
    if (it == rows.end() || !(*it == x)) throw Error("row index not found: " + x.to_string());
    return static_cast<std::size_t>(it - rows.begin());
}

std::size_t MultMatrix::col_index(const GroupElement& x1, const GroupElement& x2) const {
    const GroupElement& lo = (x1 < x2 || x1 == x2) ? x1 : x2;
    const GroupElement& hi = (x1 < x2 || x1 == x2) ? x2 : x1;
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (cols[j].first == lo && cols[j].second == hi) return j;
    throw Error("column index not found: " + x1.to_string() + "*" + x2.to_string());
}

MultMatrix mult_matrix_formula(const PolarizationType& type, const PeriodMatrix& pm, double eps,
                               ThetaConstantCache* cache) {
    const int g = type.genus();
    MultMatrix mm;
    mm.type = type;
    mm.rows = enumerate_K1(type);
    mm.cols = unordered_pairs(subgroup_2K1(type));
    mm.provenance = MatrixProvenance::Formula;
    mm.entries = CMatrix::Zero(static_cast<Eigen::Index>(mm.rows.size()),
                               static_cast<Eigen::Index>(mm.cols.size()));

    const PeriodMatrix pm2 = pm.scaled(2.0);
    ThetaConstantCache local_cache;
    ThetaConstantCache& cc = cache ? *cache : local_cache;
    const auto row_of = index_of(mm.rows);

    for (std::size_t j = 0; j < mm.cols.size(); ++j) {
        const auto& c1 = mm.cols[j].first.c;
        const auto& c2 = mm.cols[j].second.c;
        // integer halves of the sum and difference of canonical representatives
        std::vector<long long> half_sum(c1.size()), half_diff(c1.size());
        for (std::size_t i = 0; i < c1.size(); ++i) {
            half_sum[i] = (static_cast<long long>(c1[i]) + c2[i]) / 2;
            half_diff[i] = (static_cast<long long>(c1[i]) - c2[i]) / 2;
        }
        for (long long mask = 0; mask < (1LL << g); ++mask) {
            std::vector<long long> row_raw(half_sum), const_raw(half_diff);
            for (int i = 0; i < g; ++i) {
                if (mask & (1LL << i)) {
                    row_raw[static_cast<std::size_t>(i)] += type.divisor(i);
                    const_raw[static_cast<std::size_t>(i)] += type.divisor(i);
                }
            }
            const GroupElement row = reduce_element(type, row_raw);
            const GroupElement cst = reduce_element(type, const_raw);
            const ThetaValue tv =
                cc.get_or_compute(Characteristic::from_index(type, cst), pm2, eps);
            mm.entries(static_cast<Eigen::Index>(row_of.at(row.c)),
                       static_cast<Eigen::Index>(j)) += tv.value;
        }
    }
    return mm;
}

InterpolationResult mult_matrix_interpolation(const PolarizationType& type, const PeriodMatrix& pm,
                                              double eps, int n_samples, std::uint64_t seed) {
    const SectionBasis level2 = SectionBasis::level_two(type, pm);
    const SectionBasis level1 = SectionBasis::level_one(type, pm);
    const int n_rows = static_cast<int>(level2.size());
    if (n_samples <= 0) n_samples = 2 * n_rows + 8;
    if (n_samples < 2 * n_rows)
        throw Error("interpolation needs at least " + std::to_string(2 * n_rows) + " samples");

    MultMatrix mm;
    mm.type = type;
    mm.rows = enumerate_K1(type);
    mm.cols = unordered_pairs(subgroup_2K1(type));
    mm.provenance = MatrixProvenance::Interpolation;

    constexpr double kMaxCondition = 1e8;
    InterpolationResult result;
    for (int attempt = 0; attempt < 3; ++attempt) {
        result.attempts = attempt + 1;
        const auto points = lattice_domain_samples(
            pm, type, n_samples, mix_seed(seed, static_cast<std::uint64_t>(attempt)),
            /*centered=*/true);

        CMatrix a(n_samples, n_rows);
        CMatrix level1_vals(n_samples, static_cast<Eigen::Index>(level1.size()));
        for (int s = 0; s < n_samples; ++s) {
            a.row(s) = level2.evaluate_all(points[static_cast<std::size_t>(s)], eps).transpose();
            level1_vals.row(s) =
                level1.evaluate_all(points[static_cast<std::size_t>(s)], eps).transpose();
        }
        CMatrix b(n_samples, static_cast<Eigen::Index>(mm.cols.size()));
        for (std::size_t j = 0; j < mm.cols.size(); ++j) {
            Eigen::Index j1 = 0, j2 = 0;
            for (std::size_t k = 0; k < level1.size(); ++k) {
                if (level1.entries()[k].index == mm.cols[j].first) j1 = static_cast<Eigen::Index>(k);
                if (level1.entries()[k].index == mm.cols[j].second) j2 = static_cast<Eigen::Index>(k);
            }
            b.col(static_cast<Eigen::Index>(j)) =
                level1_vals.col(j1).cwiseProduct(level1_vals.col(j2));
        }

        // column equilibration: same column space, same least-squares fit,
        // far better conditioned
        RVector col_scale(n_rows);
        for (Eigen::Index j = 0; j < n_rows; ++j)
            col_scale(j) = std::max(a.col(j).norm(), 1e-300);
        CMatrix a_eq = a;
        for (Eigen::Index j = 0; j < n_rows; ++j) a_eq.col(j) /= col_scale(j);

        Eigen::JacobiSVD<CMatrix> svd(a_eq, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        result.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
        if (result.condition > kMaxCondition) continue;  // resample with a fresh seed

        CMatrix x = svd.solve(b);
        for (Eigen::Index j = 0; j < n_rows; ++j) x.row(j) /= col_scale(j);
        const double scale = std::max(b.norm(), 1e-300);
        result.residual = (a * x - b).norm() / scale;
        if (result.residual > 1e-6) {
            throw ResidualTooLargeError("interpolation residual " + format_real(result.residual) +
                                        " exceeds 1e-6; bases and products are inconsistent");
        }
        mm.entries = std::move(x);
        result.matrix = std::move(mm);
        return result;
    }
    throw IllConditionedError("sample evaluation matrix condition " +
                              format_real(result.condition) + " above 1e8 after 3 attempts");
}

std::vector<BlockReport> character_blocks(const PolarizationType& type, const PeriodMatrix& pm,
                                          double eps, double rank_tol, ThetaConstantCache* cache) {
    const auto two_k1 = subgroup_2K1(type);
    const auto z2p = subgroup_Z2prime(type);
    const auto w_elems = complement_W(type);
    const auto chars = characters_of_Z2prime(type);
    const PeriodMatrix pm2 = pm.scaled(2.0);
    ThetaConstantCache local_cache;
    ThetaConstantCache& cc = cache ? *cache : local_cache;

    // representatives of 2K_1 / Z_2' modulo t ~ -t
    std::set<GroupElement> reps;
    for (const auto& t : two_k1) {
        const GroupElement r = lexmin_mod_subgroup(type, t, z2p);
        const GroupElement rn = lexmin_mod_subgroup(type, negate(type, t), z2p);
        reps.insert(std::min(r, rn));
    }
    const std::vector<GroupElement> rows(reps.begin(), reps.end());

    std::vector<BlockReport> out;
    out.reserve(chars.size());
    for (const auto& rho : chars) {
        BlockReport rep{rho, rows, w_elems, CMatrix(), {}, 0, 0.0, false};
        rep.matrix = CMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                   static_cast<Eigen::Index>(w_elems.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t w = 0; w < w_elems.size(); ++w) {
                Complex acc(0.0, 0.0);
                for (const auto& z : z2p) {
                    const GroupElement idx = add(type, add(type, rows[r], w_elems[w]), z);
                    const ThetaValue tv =
                        cc.get_or_compute(Characteristic::from_index(type, idx), pm2, eps);
                    acc += static_cast<double>(rho.value(z)) * tv.value;
                }
                rep.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(w)) = acc;
            }
        }
        Eigen::JacobiSVD<CMatrix> svd(rep.matrix);
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            rep.singular_values.push_back(svd.singularValues()(i));
        const double smax = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
        const double smin = rep.singular_values.empty() ? 0.0 : rep.singular_values.back();
        if (smax > 0.0) {
            for (double s : rep.singular_values)
                if (s > rank_tol * smax) ++rep.rank;
            rep.margin = smin / smax;
        }
        rep.full_rank =
            rep.rank == static_cast<int>(std::min(rows.size(), w_elems.size()));
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<SymmetrizedBasisElement> symmetrized_source_basis(const PolarizationType& type) {
    const auto two_k1 = subgroup_2K1(type);
    const auto z2p = subgroup_Z2prime(type);
    const auto chars = characters_of_Z2prime(type);
    const auto pairs = unordered_pairs(two_k1);

    std::map<std::pair<std::vector<int>, std::vector<int>>, std::size_t> col_of;
    for (std::size_t j = 0; j < pairs.size(); ++j)
        col_of[{pairs[j].first.c, pairs[j].second.c}] = j;

    auto orbit_rep = [&](const PairIndex& p) {
        PairIndex best = p;
        for (const auto& z : z2p) {
            GroupElement a1 = add(type, p.first, z);
            GroupElement a2 = add(type, p.second, z);
            if (a2 < a1) std::swap(a1, a2);
            if (std::make_pair(a1.c, a2.c) < std::make_pair(best.first.c, best.second.c))
                best = PairIndex{a1, a2};
        }
        return best;
    };

    std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
    std::vector<SymmetrizedBasisElement> out;
    for (const auto& p : pairs) {
        const PairIndex rep = orbit_rep(p);
        if (!seen.insert({rep.first.c, rep.second.c}).second) continue;
        const GroupElement sigma = add(type, rep.first, rep.second);
        for (std::size_t ri = 0; ri < chars.size(); ++ri) {
            // integer coefficients; exact zero detection
            std::vector<long long> coeffs(pairs.size(), 0);
            for (const auto& z : z2p) {
                GroupElement a1 = add(type, rep.first, z);
                GroupElement a2 = add(type, rep.second, z);
                if (a2 < a1) std::swap(a1, a2);
                coeffs[col_of.at({a1.c, a2.c})] += chars[ri].value(z);
            }
            if (std::all_of(coeffs.begin(), coeffs.end(), [](long long v) { return v == 0; }))
                continue;
            SymmetrizedBasisElement elem;
            elem.pair = rep;
            elem.rho_index = static_cast<int>(ri);
            elem.sum = sigma;
            elem.coeffs = CVector::Zero(static_cast<Eigen::Index>(pairs.size()));
            for (std::size_t j = 0; j < pairs.size(); ++j)
                elem.coeffs(static_cast<Eigen::Index>(j)) =
                    Complex(static_cast<double>(coeffs[j]), 0.0);
            out.push_back(std::move(elem));
        }
    }
    const long long n = type.section_count();
    if (static_cast<long long>(out.size()) != n * (n + 1) / 2)
        throw Error("symmetrized basis count " + std::to_string(out.size()) +
                    " does not match Sym^2 dimension " + std::to_string(n * (n + 1) / 2));
    return out;
}

BlockStructureResult block_structure_check(const PolarizationType& type, const PeriodMatrix& pm,
                                           double eps, ThetaConstantCache* cache) {
    ThetaConstantCache local_cache;
    ThetaConstantCache& cc = cache ? *cache : local_cache;
    const MultMatrix mm = mult_matrix_formula(type, pm, eps, &cc);
    const auto source = symmetrized_source_basis(type);
    const auto u_elems = transversal_U(type);
    const auto w_elems = complement_W(type);
    const auto z2p = subgroup_Z2prime(type);
    const auto chars = characters_of_Z2prime(type);
    const PeriodMatrix pm2 = pm.scaled(2.0);

    const auto n_rows = static_cast<Eigen::Index>(mm.rows.size());
    const auto row_of = index_of(mm.rows);

    // target change of basis: columns are the combinations
    //   sum_{z in Z_2'} rho(z) theta^{L^2}_{y + w + z}
    struct TargetKey { GroupElement y, w; int rho; };
    std::vector<TargetKey> keys;
    CMatrix t = CMatrix::Zero(n_rows, n_rows);
    Eigen::Index col = 0;
    for (const auto& y : u_elems) {
        for (const auto& w : w_elems) {
            for (std::size_t ri = 0; ri < chars.size(); ++ri) {
                for (const auto& z : z2p) {
                    const GroupElement idx = add(type, add(type, y, w), z);
                    t(static_cast<Eigen::Index>(row_of.at(idx.c)), col) +=
                        static_cast<double>(chars[ri].value(z));
                }
                keys.push_back(TargetKey{y, w, static_cast<int>(ri)});
                ++col;
            }
        }
    }
    if (col != n_rows) throw Error("target combination count does not match h^0(L^2)");

    CMatrix s(static_cast<Eigen::Index>(mm.cols.size()), static_cast<Eigen::Index>(source.size()));
    for (std::size_t j = 0; j < source.size(); ++j)
        s.col(static_cast<Eigen::Index>(j)) = source[j].coeffs;

    const CMatrix x = t.partialPivLu().solve(mm.entries * s);

    BlockStructureResult result;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            result.scale = std::max(result.scale, std::abs(x(i, j)));

    for (std::size_t j = 0; j < source.size(); ++j) {
        const GroupElement y1 = halve(type, source[j].sum);
        const GroupElement y2 = subtract(type, y1, source[j].pair.second);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const bool same_block = (keys[i].y == y1) && (keys[i].rho == source[j].rho_index);
            const double mag = std::abs(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            if (!same_block) {
                result.off_block_residual = std::max(result.off_block_residual, mag);
                continue;
            }
            // in-block entry must equal C_{(y2, w, rho)}
            Complex expected(0.0, 0.0);
            for (const auto& z : z2p) {
                const GroupElement idx = add(type, add(type, y2, keys[i].w), z);
                expected += static_cast<double>(chars[static_cast<std::size_t>(keys[i].rho)].value(z)) *
                            cc.get_or_compute(Characteristic::from_index(type, idx), pm2, eps).value;
            }
            result.entry_mismatch = std::max(
                result.entry_mismatch,
                std::abs(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expected));
        }
    }

    if (result.off_block_residual > 1e-8 * result.scale) {
        throw BlockLeakError("off-block coupling " + format_real(result.off_block_residual) +
                             " exceeds 1e-8 * scale (" + format_real(result.scale) + ")");
    }
    return result;
}

InjectivityReport injectivity_report(const PolarizationType& type, const PeriodMatrix& pm,
                                     double eps, double rank_tol, ThetaConstantCache* cache) {
    ThetaConstantCache local_cache;
    ThetaConstantCache& cc = cache ? *cache : local_cache;

    InjectivityReport report;
    report.eps = eps;
    report.rank_tol = rank_tol;
    report.blocks = character_blocks(type, pm, eps, rank_tol, &cc);
    report.block_route_injective = true;
    report.block_margin = 1.0;
    for (const auto& b : report.blocks) {
        report.block_route_injective = report.block_route_injective && b.full_rank;
        report.block_margin = std::min(report.block_margin, b.margin);
    }

    const MultMatrix mm = mult_matrix_formula(type, pm, eps, &cc);
    report.source_dim = mm.cols.size();
    report.target_dim = mm.rows.size();
    Eigen::JacobiSVD<CMatrix> svd(mm.entries);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        report.full_singular_values.push_back(svd.singularValues()(i));
    if (mm.cols.size() > mm.rows.size()) {
        report.direct_route_injective = false;
        report.direct_margin = 0.0;
    } else {
        const double smax = report.full_singular_values.front();
        const double smin = report.full_singular_values.back();  // sigma_{#cols}
        report.direct_margin = (smax > 0.0) ? smin / smax : 0.0;
        report.direct_route_injective = smin > rank_tol * smax;
    }

    if (report.block_route_injective != report.direct_route_injective) {
        throw VerdictMismatchError(
            "block route says " + std::string(report.block_route_injective ? "injective" : "deficient") +
            " but the direct singular-value route says " +
            std::string(report.direct_route_injective ? "injective" : "deficient") +
            " (block margin " + format_real(report.block_margin) + ", direct margin " +
            format_real(report.direct_margin) + ")");
    }
    report.injective = report.direct_route_injective;
    return report;
}

std::vector<CVector> kernel_basis(const MultMatrix& mm, double rank_tol) {
    Eigen::JacobiSVD<CMatrix> svd(mm.entries, Eigen::ComputeFullV);
    const Eigen::Index n_cols = mm.entries.cols();
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rank_tol * smax) ++rank;
    if (rank == n_cols) throw EmptyKernelError("multiplication map is injective at tolerance " +
                                               format_real(rank_tol));
    std::vector<CVector> out;
    for (Eigen::Index i = rank; i < n_cols; ++i) out.push_back(svd.matrixV().col(i));
    return out;
}

std::vector<CVector> kernel_basis(const PolarizationType& type, const PeriodMatrix& pm, double eps,
                                  double rank_tol) {
    return kernel_basis(mult_matrix_formula(type, pm, eps), rank_tol);
}

double pullback_invariance_check(const PolarizationType& type, const PeriodMatrix& pm, double eps,
                                 int n_samples, std::uint64_t seed) {
    if (type.odd_count() == 0)
        throw Error("pullback check requires at least one odd divisor; type " + type.to_string() +
                    " has none");

    std::vector<int> refined = type.divisors();
    for (auto& d : refined)
        if (d % 2 == 1) d *= 2;
    const PolarizationType refined_type(refined);

    const SectionBasis coarse = SectionBasis::level_one(type, pm);
    const SectionBasis fine = SectionBasis::level_one(refined_type, pm);

    // Translation by d_i e_i (odd i) scales a refined entry with index c by
    // (-1)^{c_i/2}; the invariant sections are those with c_i = 0 mod 4 on
    // all odd coordinates.
    std::vector<std::size_t> invariant;
    for (std::size_t k = 0; k < fine.size(); ++k) {
        const auto& c = fine.entries()[k].index.c;
        bool keep = true;
        for (int i = 0; i < type.genus(); ++i)
            if (type.divisor(i) % 2 == 1 && c[static_cast<std::size_t>(i)] % 4 != 0) keep = false;
        if (keep) invariant.push_back(k);
    }
    if (invariant.size() != coarse.size())
        throw Error("invariant section count " + std::to_string(invariant.size()) +
                    " does not match h^0 = " + std::to_string(coarse.size()));

    const int n = static_cast<int>(coarse.size());
    if (n_samples <= 0) n_samples = 2 * n + 8;

    for (int attempt = 0; attempt < 3; ++attempt) {
        const auto points = lattice_domain_samples(
            pm, type, n_samples, mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        CMatrix a1(n_samples, n), a2(n_samples, n);
        for (int s = 0; s < n_samples; ++s) {
            a1.row(s) = coarse.evaluate_all(points[static_cast<std::size_t>(s)], eps).transpose();
            for (int k = 0; k < n; ++k)
                a2(s, k) = fine.evaluate_entry(invariant[static_cast<std::size_t>(k)],
                                               points[static_cast<std::size_t>(s)], eps);
        }
        Eigen::JacobiSVD<CMatrix> svd1(a1, Eigen::ComputeThinU);
        Eigen::JacobiSVD<CMatrix> svd2(a2, Eigen::ComputeThinU);
        const auto& s1 = svd1.singularValues();
        const auto& s2 = svd2.singularValues();
        if (s1(s1.size() - 1) <= 1e-10 * s1(0) || s2(s2.size() - 1) <= 1e-10 * s2(0))
            continue;  // degenerate sample set, try again
        // sine of the largest principal angle, computed as the part of one
        // orthonormal frame outside the span of the other (stable near 0,
        // unlike sqrt(1 - cos^2))
        const CMatrix overlap = svd1.matrixU().adjoint() * svd2.matrixU();
        const CMatrix out2 = svd2.matrixU() - svd1.matrixU() * overlap;
        const CMatrix out1 = svd1.matrixU() - svd2.matrixU() * overlap.adjoint();
        Eigen::JacobiSVD<CMatrix> n2(out2);
        Eigen::JacobiSVD<CMatrix> n1(out1);
        const double residual = std::max(n1.singularValues()(0), n2.singularValues()(0));
        if (residual > 1e-8)
            throw SpanMismatchError("principal-angle residual " + format_real(residual) +
                                    " exceeds 1e-8 for type " + type.to_string());
        return residual;
    }
    throw DegenerateSamplingError("could not draw a full-rank sample set for the pullback check");
}

void write_matrix_dump(std::ostream& out, const MultMatrix& mm) {
    out << "# multiplication map matrix\n";
    out << "type " << mm.type.to_string() << "\n";
    out << "provenance "
        << (mm.provenance == MatrixProvenance::Formula ? "formula" : "interpolation") << "\n";
    out << "rows " << mm.rows.size() << "\n";
    for (std::size_t i = 0; i < mm.rows.size(); ++i) {
        const Characteristic ch = Characteristic::from_index(mm.type, mm.rows[i]);
        out << "row " << i << " index " << mm.rows[i].to_string() << " characteristic "
            << ch.a.to_string() << "\n";
    }
    out << "cols " << mm.cols.size() << "\n";
    for (std::size_t j = 0; j < mm.cols.size(); ++j) {
        out << "col " << j << " pair " << mm.cols[j].first.to_string() << "*"
            << mm.cols[j].second.to_string() << "\n";
    }
    out << "entries\n";
    for (std::size_t i = 0; i < mm.rows.size(); ++i) {
        for (std::size_t j = 0; j < mm.cols.size(); ++j) {
            const Complex v =
                mm.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            out << i << " " << j << " " << format_real(v.real(), v.imag()) << "\n";
        }
    }
}

} // namespace thetamult
