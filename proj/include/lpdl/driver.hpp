#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lpdl/action.hpp"
#include "lpdl/matrix_io.hpp"
#include "lpdl/pnorm.hpp"

namespace lpdl {

/**
 * One experiment: a group acting on M_n, the exponent list, the size and seed
 * of the random test sets, tolerance overrides, and where reports go.  The
 * JSON config file mirrors the fields:
 *
 *   { "group": "Z4", "n": 2, "action": "phased:(0 1)@0,1/4",
 *     "p": [1.5, 2, 3], "tests": 20, "seed": 7,
 *     "identity_tol": 1e-10, "verdict_margin": 1e-3, "out": "" }
 *
 * The seed fixes every random draw (suites split streams off it by name), so
 * reruns reproduce verdicts and witness elements exactly.
 */
struct ExperimentConfig {
    std::string group = "Z2";
    int n = 1;
    std::string action = "trivial";
    std::vector<double> p_values = {1.5, 2.0, 3.0};
    int tests = 20;
    std::uint64_t seed = 7;
    double identity_tol = 1e-10;   // ceiling for exact-identity residuals
    double verdict_margin = 1e-3;  // relative margin for certified norm verdicts
    std::string out;               // report base path; empty writes no files

    /// Throws std::invalid_argument with a remediation hint on bad values.
    void validate() const;
    /// The action parsed against the group, with hint-decorated errors.
    GroupAction parsed_action() const;
    /// "Z4/n=2/phased:(0 1)@0,1/4" — used to tag suites in sweep reports.
    std::string tag() const;
};

/// Missing fields keep their defaults; unknown fields are rejected by name.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& c);

/// One row of a certified norm table: an element, its source-norm bounds and
/// image-norm bounds, and the verdict that row supports (may be empty).
struct NormTableRow {
    std::string element;
    double p = 2.0;
    NormEstimate src;
    NormEstimate img;
    std::string verdict;
};

struct SuiteResult {
    std::string suite;
    bool passed = true;
    double max_residual = 0.0;  // worst exact-identity defect observed
    std::vector<NormTableRow> norm_table;
    std::vector<std::string> checks;  // one line per check, "ok: ..." / "FAIL: ..."
    Json failure;  // replay payload for the first failure; null when passed
    double wall_ms = 0.0;
};

/// The suites `verify` runs, in report order: dual-covariance, algebra-law,
/// expectation, chain-status, isometry, contraction-witness, equivariance,
/// core, pnorm-self.
const std::vector<std::string>& suite_names();

/// Runs one suite against one configuration.  Deterministic given the seed.
/// Unknown names throw std::invalid_argument listing the available suites.
SuiteResult run_suite(const ExperimentConfig& config, const std::string& suite);

/// Every suite, in parallel up to the LPDL_THREADS cap; results keep
/// suite_names() order and an exception inside a suite becomes a failed
/// result rather than tearing the run down.
std::vector<SuiteResult> run_all(const ExperimentConfig& config);

/// Parallelism cap: LPDL_THREADS when set (clamped to [1, jobs]), otherwise
/// min(hardware threads, jobs).
int thread_cap(int jobs);

/**
 * Report writers.  JSON reruns of the same config and seed are byte-identical
 * except the generated_at stamp and the wall_ms timings; field order is fixed.
 * CSV emits one row per norm-table row (suites without a table contribute a
 * single summary row).  Markdown lists failing suites before passing ones.
 */
Json report_to_json(const std::vector<SuiteResult>& results, const Json& config_block);
std::string report_to_csv(const std::vector<SuiteResult>& results);
std::string report_to_markdown(const std::vector<SuiteResult>& results);

/// Writes base_path + ".json" / ".csv" / ".md" for format "json"|"csv"|"md".
/// Unknown formats throw std::invalid_argument; unwritable paths propagate
/// std::runtime_error from the file layer.
void emit_report(const std::vector<SuiteResult>& results, const Json& config_block,
                 const std::string& format, const std::string& base_path);

/// Re-runs the suite recorded in a failure payload (as stored in
/// SuiteResult::failure) and logs the stored context plus the fresh outcome.
/// Returns true when the suite passes now.
bool replay_case(const Json& case_json, std::ostream& log);

}  // namespace lpdl
