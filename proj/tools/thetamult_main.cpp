// Command-line front end: single-instance checks, seeded moduli sweeps,
// identity verification, and debug dumps of the group tables and matrices.
//
// Exit codes: 0 all pass / injective, 1 usage error, 2 deficiency found,
// 3 numerical error state (verdict mismatch, block leak, ...).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "thetamult/mult_map.hpp"
#include "thetamult/sweep.hpp"
#include "thetamult/text_util.hpp"

using namespace thetamult;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDeficient = 2;
constexpr int kExitNumericalError = 3;

PeriodMatrix resolve_tau(const std::string& tau_file, int genus, std::uint64_t seed,
                         double spread) {
    if (!tau_file.empty()) return read_tau_file(tau_file);
    return random_siegel(genus, seed, spread);
}

std::string default_out_dir() {
    const char* env = std::getenv("THETAMULT_OUT");
    return env ? std::string(env) : std::string("reports");
}

int cmd_check(const std::string& type_text, const std::string& tau_file, std::uint64_t seed,
              double spread, double eps, double rank_tol, const std::string& dump_path) {
    const PolarizationType type = PolarizationType::parse(type_text);
    const PeriodMatrix tau = resolve_tau(tau_file, type.genus(), seed, spread);
    std::cout << "type " << type.to_string() << ", tau " << tau.fingerprint() << ", lambda_min "
              << format_real(tau.lambda_min()) << "\n";
    try {
        const InjectivityReport rep = injectivity_report(type, tau, eps, rank_tol);
        std::cout << (rep.injective ? "verdict: injective" : "verdict: deficient") << "\n";
        std::cout << "  direct margin " << format_real(rep.direct_margin) << " (source dim "
                  << rep.source_dim << ", target dim " << rep.target_dim << ")\n";
        std::cout << "  block margin  " << format_real(rep.block_margin) << ", shapes";
        for (const auto& b : rep.blocks)
            std::cout << " " << b.matrix.rows() << "x" << b.matrix.cols();
        std::cout << "\n";
        const BlockStructureResult bs = block_structure_check(type, tau, eps);
        std::cout << "  block-structure residual " << format_real(bs.off_block_residual)
                  << " (scale " << format_real(bs.scale) << ")\n";
        if (!dump_path.empty()) {
            std::ofstream f(dump_path, std::ios::binary);
            write_matrix_dump(f, mult_matrix_formula(type, tau, eps));
            std::cout << "matrix written to " << dump_path << "\n";
        }
        return rep.injective ? kExitOk : kExitDeficient;
    } catch (const VerdictMismatchError& e) {
        std::cout << "verdict: mismatch between routes\n  " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const BlockLeakError& e) {
        std::cout << "verdict: block leak\n  " << e.what() << "\n";
        return kExitNumericalError;
    }
}

int cmd_sweep(SweepConfig cfg) {
    const SweepReport rep = run_sweep(cfg);
    write_report(rep, cfg.out_dir);
    std::cout << "sweep type " << cfg.type.to_string() << " mode " << tau_mode_name(cfg.mode)
              << ": " << rep.aggregate.injective_count << "/" << cfg.n_samples << " injective, "
              << rep.aggregate.error_count << " errors, worst margin "
              << format_real(rep.aggregate.worst_margin) << "\n";
    std::cout << "report written to " << cfg.out_dir << "\n";
    for (const auto& r : rep.records) {
        if (r.status != "ok")
            return r.error_kind == "NotPositive" ? kExitDeficient : kExitNumericalError;
    }
    return rep.aggregate.injective_count == cfg.n_samples ? kExitOk : kExitDeficient;
}

int cmd_verify(bool sabotage, int genus_max, std::uint64_t seed) {
    VerifyOptions opts;
    opts.sabotage = sabotage;
    opts.genus_max = genus_max;
    opts.seed = seed;
    const VerifyReport rep = verify_identities(opts);
    for (const auto& item : rep.items) {
        std::cout << (item.pass ? "[PASS] " : "[FAIL] ") << item.name << "  residual "
                  << format_real(item.residual) << " (tol " << format_real(item.tolerance) << ")";
        if (!item.detail.empty()) std::cout << "  " << item.detail;
        std::cout << "\n";
    }
    std::cout << (rep.all_pass ? "all identities verified" : "verification FAILED") << "\n";
    return rep.all_pass ? kExitOk : kExitNumericalError;
}

void print_elements(const std::string& label, const std::vector<GroupElement>& elems) {
    std::cout << label << " (" << elems.size() << "):";
    for (const auto& e : elems) std::cout << " " << e.to_string();
    std::cout << "\n";
}

int cmd_dump_groups(const std::string& type_text) {
    const PolarizationType type = PolarizationType::parse(type_text);
    std::cout << "type " << type.to_string() << ", genus " << type.genus() << ", odd divisors "
              << type.odd_count() << "\n";
    print_elements("K1", enumerate_K1(type));
    print_elements("2K1", subgroup_2K1(type));
    print_elements("Z2", subgroup_Z2(type));
    print_elements("Z2'", subgroup_Z2prime(type));
    print_elements("W", complement_W(type));
    print_elements("U", transversal_U(type));
    const auto chars = characters_of_Z2prime(type);
    std::cout << "characters (" << chars.size() << "):";
    for (const auto& c : chars) std::cout << " " << c.to_string();
    std::cout << "\n";
    const PsiPairing psi = psi_pairing(type);
    std::cout << "pairing table (" << psi.table.size() << " classes, "
              << (psi.bijective ? "bijective" : "NOT bijective") << "):\n";
    for (const auto& e : psi.table) {
        std::cout << "  y " << e.y.to_string() << "  t " << e.t.to_string() << "  <- "
                  << e.x1.to_string() << " x " << e.x2.to_string() << "\n";
    }
    return kExitOk;
}

int cmd_dump_matrix(const std::string& type_text, const std::string& tau_file, std::uint64_t seed,
                    double spread, double eps, const std::string& provenance,
                    const std::string& out_path) {
    const PolarizationType type = PolarizationType::parse(type_text);
    const PeriodMatrix tau = resolve_tau(tau_file, type.genus(), seed, spread);
    MultMatrix mm;
    if (provenance == "interpolation")
        mm = mult_matrix_interpolation(type, tau, eps, 0, seed ^ 0x5a5a).matrix;
    else
        mm = mult_matrix_formula(type, tau, eps);
    if (out_path.empty() || out_path == "-") {
        write_matrix_dump(std::cout, mm);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw Error("cannot open '" + out_path + "' for writing");
        write_matrix_dump(f, mm);
        std::cout << "matrix written to " << out_path << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"section spaces and multiplication maps of polarized abelian varieties"};
    app.require_subcommand(1);

    std::string type_text = "1";
    std::string tau_file;
    std::string out;
    std::string mode_text = "random";
    std::string provenance = "formula";
    std::uint64_t seed = 1;
    double spread = 1.0;
    double eps = 1e-10;
    double rank_tol = 1e-8;
    double delta = 0.0;
    int samples = 1;
    int jobs = 1;
    int genus_max = 3;
    bool sabotage = false;

    auto* check = app.add_subcommand("check", "decide injectivity for one period matrix");
    check->add_option("--type", type_text, "polarization type, e.g. 1,2")->required();
    check->add_option("--tau", tau_file, "period matrix file (overrides --seed)");
    check->add_option("--seed", seed, "seed for a random period matrix");
    check->add_option("--spread", spread, "spread of the random period matrix");
    check->add_option("--eps", eps, "theta truncation target");
    check->add_option("--rank-tol", rank_tol, "relative rank tolerance");
    check->add_option("--dump-matrix", out, "also write the matrix to this file");

    auto* sweep = app.add_subcommand("sweep", "injectivity experiment over sampled moduli");
    sweep->add_option("--type", type_text, "polarization type with divisors in {1,2}")->required();
    sweep->add_option("--samples", samples, "number of sampled period matrices");
    sweep->add_option("--seed", seed, "base seed");
    sweep->add_option("--mode", mode_text,
                      "random | file | diagonal-product | perturbed-product");
    sweep->add_option("--delta", delta, "perturbation size for perturbed-product");
    sweep->add_option("--tau", tau_file, "period matrix file for file mode");
    sweep->add_option("--spread", spread, "spread of sampled matrices");
    sweep->add_option("--eps", eps, "theta truncation target");
    sweep->add_option("--rank-tol", rank_tol, "relative rank tolerance");
    sweep->add_option("--jobs", jobs, "worker threads");
    sweep->add_option("--out", out, "report directory (default $THETAMULT_OUT or ./reports)");

    auto* verify = app.add_subcommand("verify", "run the identity verification suites");
    verify->add_option("--genus-max", genus_max, "largest genus fixture to include");
    verify->add_option("--seed", seed, "fixture seed");
    verify->add_flag("--sabotage", sabotage,
                     "perturb one matrix entry; the equivalence suite must fail");

    auto* groups = app.add_subcommand("dump-groups", "print the finite group tables");
    groups->add_option("--type", type_text, "polarization type")->required();

    auto* dumpm = app.add_subcommand("dump-matrix", "write the assembled matrix");
    dumpm->add_option("--type", type_text, "polarization type")->required();
    dumpm->add_option("--tau", tau_file, "period matrix file (overrides --seed)");
    dumpm->add_option("--seed", seed, "seed for a random period matrix");
    dumpm->add_option("--spread", spread, "spread of the random period matrix");
    dumpm->add_option("--eps", eps, "theta truncation target");
    dumpm->add_option("--provenance", provenance, "formula | interpolation");
    dumpm->add_option("--out", out, "output file, '-' for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (check->parsed())
            return cmd_check(type_text, tau_file, seed, spread, eps, rank_tol, out);
        if (sweep->parsed()) {
            SweepConfig cfg;
            cfg.type = PolarizationType::parse(type_text);
            cfg.n_samples = samples;
            cfg.seed = seed;
            cfg.eps = eps;
            cfg.rank_tol = rank_tol;
            cfg.mode = parse_tau_mode(mode_text);
            cfg.delta = delta;
            cfg.spread = spread;
            cfg.tau_file = tau_file;
            cfg.jobs = jobs;
            cfg.out_dir = out.empty() ? default_out_dir() : out;
            return cmd_sweep(cfg);
        }
        if (verify->parsed()) return cmd_verify(sabotage, genus_max, seed);
        if (groups->parsed()) return cmd_dump_groups(type_text);
        if (dumpm->parsed())
            return cmd_dump_matrix(type_text, tau_file, seed, spread, eps, provenance, out);
    } catch (const VerdictMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const BlockLeakError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
