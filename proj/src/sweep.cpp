#include "thetamult/sweep.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "thetamult/random_util.hpp"
#include "thetamult/text_util.hpp"

namespace thetamult {

PeriodMatrix random_siegel(int g, std::uint64_t seed, double spread) {
    UniformRng rng(seed);
    RMatrix s = RMatrix::Zero(g, g);
    for (int i = 0; i < g; ++i)
        for (int j = i; j < g; ++j) s(i, j) = s(j, i) = rng.range(-spread, spread);
    RMatrix q(g, g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) q(i, j) = rng.range(-spread, spread);
    RMatrix p = q.transpose() * q + RMatrix::Identity(g, g);
    CMatrix tau(g, g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) tau(i, j) = Complex(s(i, j), p(i, j));
    return PeriodMatrix::validate(tau);
}

std::string tau_mode_name(TauMode mode) {
    switch (mode) {
        case TauMode::Random: return "random";
        case TauMode::File: return "file";
        case TauMode::DiagonalProduct: return "diagonal-product";
        case TauMode::PerturbedProduct: return "perturbed-product";
    }
    return "random";
}

TauMode parse_tau_mode(const std::string& name) {
    if (name == "random") return TauMode::Random;
    if (name == "file") return TauMode::File;
    if (name == "diagonal-product") return TauMode::DiagonalProduct;
    if (name == "perturbed-product") return TauMode::PerturbedProduct;
    throw Error("unknown tau mode '" + name + "'");
}

std::string SampleRecord::to_json() const {
    std::string out = "{";
    out += "\"index\":" + std::to_string(index);
    out += ",\"tau_fp\":\"" + json_escape(tau_fingerprint) + "\"";
    out += ",\"status\":\"" + json_escape(status) + "\"";
    out += ",\"error_kind\":\"" + json_escape(error_kind) + "\"";
    out += ",\"injective\":" + std::string(injective ? "true" : "false");
    out += ",\"block_margin\":" + format_real(block_margin);
    out += ",\"direct_margin\":" + format_real(direct_margin);
    out += ",\"block_shapes\":\"" + json_escape(block_shapes) + "\"";
    out += ",\"block_structure_residual\":" + format_real(block_structure_residual);
    out += ",\"factorization_residual\":" + format_real(factorization_residual);
    out += "}";
    return out;
}

std::string SweepReport::records_jsonl() const {
    std::string out;
    for (const auto& r : records) {
        out += r.to_json();
        out += "\n";
    }
    return out;
}

SweepAggregate SweepReport::recompute_aggregate() const {
    SweepAggregate agg;
    for (const auto& r : records) {
        if (r.status != "ok") {
            ++agg.error_count;
            continue;
        }
        if (r.injective) ++agg.injective_count;
        agg.worst_margin = std::min(agg.worst_margin, std::min(r.block_margin, r.direct_margin));
    }
    agg.fraction_injective =
        records.empty() ? 0.0 : static_cast<double>(agg.injective_count) / records.size();
    return agg;
}

std::string SweepReport::summary_json() const {
    std::string out = "{\n";
    out += "  \"schema\": \"" + schema_version + "\",\n";
    out += "  \"type\": \"" + config.type.to_string() + "\",\n";
    out += "  \"mode\": \"" + tau_mode_name(config.mode) + "\",\n";
    out += "  \"n_samples\": " + std::to_string(config.n_samples) + ",\n";
    out += "  \"seed\": " + std::to_string(config.seed) + ",\n";
    out += "  \"eps\": " + format_real(config.eps) + ",\n";
    out += "  \"rank_tol\": " + format_real(config.rank_tol) + ",\n";
    out += "  \"spread\": " + format_real(config.spread) + ",\n";
    out += "  \"delta\": " + format_real(config.delta) + ",\n";
    out += "  \"injective_count\": " + std::to_string(aggregate.injective_count) + ",\n";
    out += "  \"error_count\": " + std::to_string(aggregate.error_count) + ",\n";
    out += "  \"fraction_injective\": " + format_real(aggregate.fraction_injective) + ",\n";
    out += "  \"worst_margin\": " + format_real(aggregate.worst_margin) + "\n";
    out += "}\n";
    return out;
}

namespace {

std::string classify_error(const Error& e) {
    if (dynamic_cast<const VerdictMismatchError*>(&e)) return "VerdictMismatch";
    if (dynamic_cast<const BlockLeakError*>(&e)) return "BlockLeak";
    if (dynamic_cast<const NearDegenerateError*>(&e)) return "NearDegenerate";
    if (dynamic_cast<const NotPositiveError*>(&e)) return "NotPositive";
    if (dynamic_cast<const IllConditionedError*>(&e)) return "IllConditioned";
    if (dynamic_cast<const ResidualTooLargeError*>(&e)) return "ResidualTooLarge";
    return "Error";
}

PeriodMatrix diagonal_product_tau(int g, std::uint64_t seed, double spread) {
    CMatrix tau = CMatrix::Zero(g, g);
    for (int i = 0; i < g; ++i) {
        const PeriodMatrix one =
            random_siegel(1, mix_seed(seed, static_cast<std::uint64_t>(i) + 101), spread);
        tau(i, i) = one.tau()(0, 0);
    }
    return PeriodMatrix::validate(tau);
}

PeriodMatrix make_sample_tau(const SweepConfig& cfg, int index, const PeriodMatrix* file_tau) {
    const int g = cfg.type.genus();
    const std::uint64_t s = mix_seed(cfg.seed, static_cast<std::uint64_t>(index));
    switch (cfg.mode) {
        case TauMode::Random: return random_siegel(g, s, cfg.spread);
        case TauMode::File:
            if (!file_tau) throw Error("file mode needs --tau");
            return *file_tau;
        case TauMode::DiagonalProduct: return diagonal_product_tau(g, s, cfg.spread);
        case TauMode::PerturbedProduct: {
            const PeriodMatrix diag = diagonal_product_tau(g, s, cfg.spread);
            UniformRng rng(mix_seed(s, 0x70657274));
            CMatrix tau = diag.tau();
            for (int i = 0; i < g; ++i) {
                for (int j = i; j < g; ++j) {
                    const Complex noise(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
                    tau(i, j) += cfg.delta * noise;
                    if (j != i) tau(j, i) = tau(i, j);
                }
            }
            return PeriodMatrix::validate(tau);
        }
    }
    throw Error("unreachable tau mode");
}

SampleRecord run_one_sample(const SweepConfig& cfg, int index, const PeriodMatrix* file_tau,
                            ThetaConstantCache& cache) {
    SampleRecord rec;
    rec.index = index;
    try {
        const PeriodMatrix tau = make_sample_tau(cfg, index, file_tau);
        rec.tau_fingerprint = tau.fingerprint();

        // each measurement is recorded on its own; a mismatch in one never
        // hides the others
        try {
            const InjectivityReport rep =
                injectivity_report(cfg.type, tau, cfg.eps, cfg.rank_tol, &cache);
            rec.injective = rep.injective;
            rec.block_margin = rep.block_margin;
            rec.direct_margin = rep.direct_margin;
            for (std::size_t b = 0; b < rep.blocks.size(); ++b) {
                if (b) rec.block_shapes += ";";
                rec.block_shapes += std::to_string(rep.blocks[b].matrix.rows()) + "x" +
                                    std::to_string(rep.blocks[b].matrix.cols());
            }
        } catch (const Error& e) {
            rec.status = "error";
            rec.error_kind = classify_error(e);
        }

        const BlockStructureResult bs = block_structure_check(cfg.type, tau, cfg.eps, &cache);
        rec.block_structure_residual =
            (bs.scale > 0.0) ? bs.off_block_residual / bs.scale : 0.0;
        if (cfg.mode == TauMode::DiagonalProduct || cfg.mode == TauMode::PerturbedProduct) {
            bool diagonal = true;
            for (int i = 0; i < tau.tau().rows() && diagonal; ++i)
                for (int j = 0; j < tau.tau().cols(); ++j)
                    if (i != j && std::abs(tau.tau()(i, j)) > 1e-12) diagonal = false;
            if (diagonal) rec.factorization_residual = factorization_residual(cfg.type, tau, cfg.eps);
        }
    } catch (const Error& e) {
        rec.status = "error";
        if (rec.error_kind.empty()) rec.error_kind = classify_error(e);
    }
    return rec;
}

} // namespace

SweepReport run_sweep(const SweepConfig& cfg) {
    for (int d : cfg.type.divisors())
        if (d > 2)
            throw Error("sweep covers types with divisors in {1,2}; got " + cfg.type.to_string());
    if (cfg.n_samples < 1) throw Error("sweep needs n_samples >= 1");
    if (cfg.delta < 0.0) throw Error("perturbation delta must be nonnegative");
    if (cfg.eps <= 0.0 || cfg.rank_tol <= 0.0) throw Error("eps and rank_tol must be positive");

    SweepReport report;
    report.config = cfg;
    report.records.resize(static_cast<std::size_t>(cfg.n_samples));

    PeriodMatrix file_tau = PeriodMatrix::validate(CMatrix::Identity(1, 1) * Complex(0, 1));
    const PeriodMatrix* file_tau_ptr = nullptr;
    if (cfg.mode == TauMode::File) {
        file_tau = read_tau_file(cfg.tau_file);
        file_tau_ptr = &file_tau;
    }

    ThetaConstantCache cache;
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (int i = 0; i < cfg.n_samples; ++i)
            report.records[static_cast<std::size_t>(i)] =
                run_one_sample(cfg, i, file_tau_ptr, cache);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&]() {
                while (true) {
                    const int i = next.fetch_add(1);
                    if (i >= cfg.n_samples) break;
                    report.records[static_cast<std::size_t>(i)] =
                        run_one_sample(cfg, i, file_tau_ptr, cache);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    report.aggregate = report.recompute_aggregate();
    return report;
}

void write_report(const SweepReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "records.jsonl", std::ios::binary);
        if (!f) throw Error("cannot write records in " + out_dir);
        f << report.records_jsonl();
    }
    {
        std::ofstream f(fs::path(out_dir) / "summary.json", std::ios::binary);
        if (!f) throw Error("cannot write summary in " + out_dir);
        f << report.summary_json();
    }
}

double factorization_residual(const PolarizationType& type, const PeriodMatrix& pm, double eps) {
    const int g = pm.genus();
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            if (i != j && std::abs(pm.tau()(i, j)) > 1e-12)
                throw Error("factorization check needs a diagonal tau");

    // one-variable constants per coordinate
    std::vector<PeriodMatrix> factors;
    std::vector<PolarizationType> factor_types;
    factors.reserve(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) {
        CMatrix one(1, 1);
        one(0, 0) = pm.tau()(i, i);
        factors.push_back(PeriodMatrix::validate(one));
        factor_types.push_back(PolarizationType({type.divisor(i)}));
    }

    const auto blocks = character_blocks(type, pm, eps);
    const auto z2p = subgroup_Z2prime(type);
    double worst = 0.0;
    for (const auto& block : blocks) {
        for (std::size_t r = 0; r < block.row_reps.size(); ++r) {
            for (std::size_t w = 0; w < block.col_reps.size(); ++w) {
                Complex expected(1.0, 0.0);
                for (int i = 0; i < g; ++i) {
                    const int d = type.divisor(i);
                    const int base = block.row_reps[r].c[static_cast<std::size_t>(i)] +
                                     block.col_reps[w].c[static_cast<std::size_t>(i)];
                    Complex factor_sum(0.0, 0.0);
                    // coordinate slice of Z_2' is {0, d} for even d, {0} for odd
                    const std::vector<int> zs = (d % 2 == 0) ? std::vector<int>{0, d}
                                                             : std::vector<int>{0};
                    for (int zi : zs) {
                        GroupElement ge;
                        ge.c = {(base + zi) % (2 * d)};
                        GroupElement full;
                        full.c.assign(static_cast<std::size_t>(g), 0);
                        full.c[static_cast<std::size_t>(i)] = zi;
                        const double sign = static_cast<double>(block.rho.value(full));
                        factor_sum +=
                            sign * theta_constant(Characteristic::from_index(factor_types[static_cast<std::size_t>(i)], ge),
                                                  factors[static_cast<std::size_t>(i)].scaled(2.0), eps)
                                       .value;
                    }
                    expected *= factor_sum;
                }
                const Complex actual =
                    block.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(w));
                const double scale = std::max(std::abs(actual), std::abs(expected));
                if (scale > 1e-14)
                    worst = std::max(worst, std::abs(actual - expected) / scale);
                else
                    worst = std::max(worst, std::abs(actual - expected));
            }
        }
    }
    return worst;
}

PeriodMatrix read_tau_file(const std::string& path, PolarizationType* type_out) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open tau file '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw Error("cannot parse tau file '" + path + "': " + e.what());
    }
    const int g = j.at("g").get<int>();
    const auto re = j.at("tau_re").get<std::vector<std::vector<double>>>();
    const auto im = j.at("tau_im").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(re.size()) != g || static_cast<int>(im.size()) != g)
        throw Error("tau file '" + path + "': matrix size does not match g");
    CMatrix tau(g, g);
    for (int i = 0; i < g; ++i) {
        if (static_cast<int>(re[static_cast<std::size_t>(i)].size()) != g ||
            static_cast<int>(im[static_cast<std::size_t>(i)].size()) != g)
            throw Error("tau file '" + path + "': ragged matrix");
        for (int k = 0; k < g; ++k)
            tau(i, k) = Complex(re[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)],
                                im[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
    }
    if (type_out && j.contains("d")) {
        *type_out = PolarizationType(j.at("d").get<std::vector<int>>());
    }
    return PeriodMatrix::validate(tau);
}

void write_tau_file(const std::string& path, const PeriodMatrix& pm, const PolarizationType& type) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write tau file '" + path + "'");
    const int g = pm.genus();
    f << "{\n  \"g\": " << g << ",\n  \"d\": [";
    for (int i = 0; i < g; ++i) f << (i ? ", " : "") << type.divisor(i);
    f << "],\n  \"tau_re\": [";
    for (int i = 0; i < g; ++i) {
        f << (i ? ", [" : "[");
        for (int k = 0; k < g; ++k) f << (k ? ", " : "") << format_real(pm.tau()(i, k).real());
        f << "]";
    }
    f << "],\n  \"tau_im\": [";
    for (int i = 0; i < g; ++i) {
        f << (i ? ", [" : "[");
        for (int k = 0; k < g; ++k) f << (k ? ", " : "") << format_real(pm.tau()(i, k).imag());
        f << "]";
    }
    f << "]\n}\n";
}

namespace {

struct Fixture {
    PolarizationType type;
    PeriodMatrix pm;
    std::string name;
};

std::vector<Fixture> verify_fixtures(const VerifyOptions& opts) {
    std::vector<Fixture> out;
    CMatrix t1(1, 1);
    t1(0, 0) = Complex(0.0, 1.0);
    const PeriodMatrix pm_i = PeriodMatrix::validate(t1);
    t1(0, 0) = Complex(0.3, 1.1);
    const PeriodMatrix pm_gen = PeriodMatrix::validate(t1);
    out.push_back({PolarizationType({1}), pm_i, "g1-i-type1"});
    out.push_back({PolarizationType({2}), pm_i, "g1-i-type2"});
    out.push_back({PolarizationType({2}), pm_gen, "g1-generic-type2"});
    if (opts.genus_max >= 2) {
        CMatrix t2 = CMatrix::Zero(2, 2);
        t2(0, 0) = t2(1, 1) = Complex(0.0, 1.0);
        const PeriodMatrix pm_diag = PeriodMatrix::validate(t2);
        const PeriodMatrix pm_rand = random_siegel(2, mix_seed(opts.seed, 2), 1.0);
        out.push_back({PolarizationType({1, 2}), pm_diag, "g2-diag-type12"});
        out.push_back({PolarizationType({2, 2}), pm_rand, "g2-random-type22"});
    }
    if (opts.genus_max >= 3) {
        const PeriodMatrix pm3 = random_siegel(3, mix_seed(opts.seed, 3), 0.8);
        out.push_back({PolarizationType({1, 1, 2}), pm3, "g3-random-type112"});
    }
    return out;
}

} // namespace

VerifyReport verify_identities(const VerifyOptions& opts) {
    VerifyReport report;
    const auto fixtures = verify_fixtures(opts);

    // hermitian-form reconstruction and cocycle identity
    for (const auto& fx : fixtures) {
        const SymplecticData sd = symplectic_data(fx.pm, fx.type);
        const int g = fx.pm.genus();
        double worst = 0.0;

        RMatrix expected = RMatrix::Zero(2 * g, 2 * g);
        for (int i = 0; i < g; ++i) {
            expected(i, g + i) = static_cast<double>(fx.type.divisor(i));
            expected(g + i, i) = -static_cast<double>(fx.type.divisor(i));
        }
        worst = std::max(worst, (sd.lattice_gram() - expected).cwiseAbs().maxCoeff());

        UniformRng rng(mix_seed(opts.seed, fnv1a64(fx.name)));
        for (int k = 0; k < 100; ++k) {
            CVector z(g), w(g), v(g);
            for (int i = 0; i < g; ++i) {
                z(i) = Complex(rng.range(-2, 2), rng.range(-2, 2));
                w(i) = Complex(rng.range(-2, 2), rng.range(-2, 2));
                v(i) = Complex(rng.range(-2, 2), rng.range(-2, 2));
            }
            const CVector zi = Complex(0, 1) * z;
            const Complex recon =
                Complex(0, 1) * sd.symplectic(z, w) + Complex(sd.symplectic(zi, w), 0.0);
            worst = std::max(worst, std::abs(sd.hermitian(z, w) - recon));

            Eigen::VectorXi m(g), n(g);
            for (int i = 0; i < g; ++i) {
                m(i) = static_cast<int>(rng.raw() % 5) - 2;
                n(i) = static_cast<int>(rng.raw() % 5) - 2;
            }
            worst = std::max(worst, check_cocycle_identity(sd, v, sd.lattice_vector(m, n), z));
        }
        report.items.push_back({"hermitian-cocycle " + fx.name, worst < 1e-10, worst, 1e-10, ""});
    }

    // quasi-periodicity of the theta kernel
    {
        double worst = 0.0;
        int done = 0;
        UniformRng rng(mix_seed(opts.seed, 0x71700));
        while (done < 100) {
            const auto& fx = fixtures[static_cast<std::size_t>(done) % fixtures.size()];
            const int g = fx.pm.genus();
            const auto k1 = enumerate_K1(fx.type);
            Characteristic ch =
                Characteristic::from_index(fx.type, k1[rng.raw() % k1.size()]);
            if (done % 3 == 2) {
                // exercise nonzero b with half-integer entries
                std::vector<long long> bn(static_cast<std::size_t>(g));
                for (int i = 0; i < g; ++i) bn[static_cast<std::size_t>(i)] = static_cast<long long>(rng.raw() % 2);
                ch.b = RationalVector(std::move(bn), 2);
            }
            CVector z(g);
            for (int i = 0; i < g; ++i) z(i) = Complex(rng.range(-1, 1), rng.range(-1, 1));
            Eigen::VectorXi m(g), n(g);
            for (int i = 0; i < g; ++i) {
                m(i) = static_cast<int>(rng.raw() % 5) - 2;
                n(i) = static_cast<int>(rng.raw() % 5) - 2;
            }
            CVector shifted = z;
            for (int i = 0; i < g; ++i) {
                for (int j = 0; j < g; ++j)
                    shifted(i) += fx.pm.tau()(i, j) * static_cast<double>(m(j));
                shifted(i) += static_cast<double>(n(i));
            }
            const Complex lhs = theta(ch, shifted, fx.pm, opts.eps).value;
            const Complex factor = quasiperiodicity_factor(ch, m, n, z, fx.pm);
            const Complex rhs = factor * theta(ch, z, fx.pm, opts.eps).value;
            const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
            ++done;
        }
        report.items.push_back({"quasi-periodicity", worst < 1e-9, worst, 1e-9, "100 samples"});
    }

    // assembly equivalence: formula route vs interpolation route
    for (const auto& fx : fixtures) {
        MultMatrix formula = mult_matrix_formula(fx.type, fx.pm, opts.eps);
        if (opts.sabotage) formula.entries(0, 0) *= 1.0 + 1e-3;
        double rel = 0.0;
        std::string detail;
        bool pass = false;
        try {
            const InterpolationResult interp = mult_matrix_interpolation(
                fx.type, fx.pm, opts.eps, 0, mix_seed(opts.seed, fnv1a64(fx.name) ^ 0xabcd));
            const double scale = std::max(formula.entries.cwiseAbs().maxCoeff(),
                                          interp.matrix.entries.cwiseAbs().maxCoeff());
            rel = (formula.entries - interp.matrix.entries).cwiseAbs().maxCoeff() /
                  std::max(scale, 1e-300);
            pass = rel < 1e-8;
        } catch (const Error& e) {
            detail = e.what();
        }
        report.items.push_back({"assembly-equivalence " + fx.name, pass, rel, 1e-8, detail});
    }

    // block structure
    for (const auto& fx : fixtures) {
        bool pass = false;
        double rel = 0.0;
        std::string detail;
        try {
            const BlockStructureResult r = block_structure_check(fx.type, fx.pm, opts.eps);
            rel = (r.scale > 0.0) ? r.off_block_residual / r.scale : 0.0;
            pass = true;
        } catch (const Error& e) {
            detail = e.what();
        }
        report.items.push_back({"block-structure " + fx.name, pass, rel, 1e-8, detail});
    }

    // pullback invariance for odd-divisor fixtures
    for (const auto& fx : fixtures) {
        if (fx.type.odd_count() == 0) continue;
        bool pass = false;
        double residual = 0.0;
        std::string detail;
        try {
            residual = pullback_invariance_check(fx.type, fx.pm, opts.eps, 0,
                                                 mix_seed(opts.seed, fnv1a64(fx.name) ^ 0x99));
            pass = true;
        } catch (const Error& e) {
            detail = e.what();
        }
        report.items.push_back({"pullback-invariance " + fx.name, pass, residual, 1e-8, detail});
    }

    report.all_pass = true;
    for (const auto& item : report.items) report.all_pass = report.all_pass && item.pass;
    return report;
}

} // namespace thetamult
