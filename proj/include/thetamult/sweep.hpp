#pragma once

// Seeded moduli sweeps, the genericity experiment for small polarization
// types, identity verification fixtures, and report persistence.
//
// Reports are line-delimited records plus a summary document, all numbers at
// 17 significant digits; identical configurations (including the seed)
// produce byte-identical report files at any worker count.  Wall-clock
// timings therefore go to the log stream, never into report files.

#include <cstdint>
#include <string>
#include <vector>

#include "thetamult/av_core.hpp"
#include "thetamult/mult_map.hpp"

namespace thetamult {

// tau = S + i (Q^T Q + I) with S symmetric and S, Q entries uniform in
// [-spread, spread]; deterministic for a fixed seed, lambda_min(Im tau) >= 1.
PeriodMatrix random_siegel(int g, std::uint64_t seed, double spread);

enum class TauMode { Random, File, DiagonalProduct, PerturbedProduct };

std::string tau_mode_name(TauMode mode);
TauMode parse_tau_mode(const std::string& name);

struct SweepConfig {
    PolarizationType type = PolarizationType({1});
    int n_samples = 1;
    std::uint64_t seed = 1;
    double eps = 1e-10;
    double rank_tol = 1e-8;
    TauMode mode = TauMode::Random;
    double delta = 0.0;   // perturbation size for PerturbedProduct
    double spread = 1.0;
    std::string tau_file;
    int jobs = 1;
    std::string out_dir;
};

struct SampleRecord {
    int index = 0;
    std::string tau_fingerprint;
    std::string status = "ok";      // "ok" or "error"
    std::string error_kind;
    bool injective = false;
    double block_margin = 0.0;
    double direct_margin = 0.0;
    std::string block_shapes;       // "1x2;1x2"
    double block_structure_residual = 0.0;  // off-block coupling relative to scale
    double factorization_residual = -1.0;  // -1 when not applicable

    std::string to_json() const;    // one line, fixed key order
};

struct SweepAggregate {
    int injective_count = 0;
    int error_count = 0;
    double fraction_injective = 0.0;
    double worst_margin = 1.0;
};

struct SweepReport {
    std::string schema_version = "1";
    SweepConfig config;
    std::vector<SampleRecord> records;
    SweepAggregate aggregate;

    std::string records_jsonl() const;
    std::string summary_json() const;
    SweepAggregate recompute_aggregate() const;
};

// Runs the injectivity experiment for a type with all divisors in {1,2}
// (the range where general injectivity is expected).  Per-sample failures
// are recorded, never abort the sweep.
SweepReport run_sweep(const SweepConfig& cfg);

// Writes records.jsonl and summary.json into out_dir (created if missing).
void write_report(const SweepReport& report, const std::string& out_dir);

// For a numerically diagonal tau: every block entry C_{t,w,rho} must equal
// the product of the per-coordinate one-variable constants.  Returns the
// largest relative mismatch.
double factorization_residual(const PolarizationType& type, const PeriodMatrix& pm, double eps);

struct VerifyOptions {
    bool sabotage = false;  // perturb one formula entry; the equivalence item must fail
    int genus_max = 3;
    std::uint64_t seed = 7;
    double eps = 1e-10;
};

struct VerifyItem {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyItem> items;
    bool all_pass = false;
};

// Runs the cocycle, quasi-periodicity, assembly-equivalence, block-structure
// and pullback-invariance suites over the built-in fixtures.
VerifyReport verify_identities(const VerifyOptions& opts = {});

// Structured text file with fields g, d, tau_re, tau_im.
PeriodMatrix read_tau_file(const std::string& path, PolarizationType* type_out = nullptr);
void write_tau_file(const std::string& path, const PeriodMatrix& pm, const PolarizationType& type);

} // namespace thetamult
