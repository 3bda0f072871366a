#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lpdl/labeled_operator.hpp"

namespace lpdl {

/// Holder exponent in the open interval (1, inf); q() is the conjugate index.
struct PExponent {
    double p;
    explicit PExponent(double value);
    double q() const { return p / (p - 1.0); }
};

double vector_pnorm(const CVector& x, double p);

/**
 * Norming functional of y under the bilinear pairing <u,v> = sum u_i v_i:
 * <dualize(y,p), y> = ||y||_p and ||dualize(y,p)||_q = 1. Zero stays zero.
 */
CVector dualize(const CVector& y, double p);

/**
 * Certified two-sided estimate of the operator norm on l^p.
 *
 * Invariants: lower is achieved by the stored witness, lower <= upper up to
 * 1e-9 slack, and `methods` records where each side came from
 * ("power-iteration", "riesz-thorin", "grid-refine", "exact-diagonal",
 * "exact-p2", "truncated-amplification").
 */
struct NormEstimate {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    CVector witness;
    std::vector<std::string> methods;
    bool truncated = false;
};

struct PowerOptions {
    int restarts = 20;
    int max_iter = 2000;
    double tol = 1e-12;
    std::uint64_t seed = 1;
    /// Warm starts (e.g. witnesses transported through an isometry).
    std::vector<CVector> extra_starts;
};

/**
 * Boyd/Higham dual-pairing power method: alternate y = A x, x' = dual_q(A^T
 * dual_p(y)). Each iterate yields the certified lower bound ||A x||_p with
 * ||x||_p = 1; the best ratio and its witness are returned. Deterministic for
 * a fixed seed.
 */
NormEstimate pnorm_lower_power(const CMatrix& a, double p, const PowerOptions& opts = {});

/// Riesz-Thorin interpolation bound ||A||_1^{1/p} ||A||_inf^{1-1/p}.
double pnorm_upper_riesz_thorin(const CMatrix& a, double p);

struct GridOptions {
    double gap_target = 1e-5;  // stop once upper - incumbent <= this
    long max_nodes = 400000;   // node-expansion budget
    std::uint64_t seed = 1;    // seed of the incumbent-initializing power run
};

/**
 * Certified upper bound by branch-and-bound over the unit p-sphere (global
 * phase fixed by making the first coordinate real >= 0). Each box B gets the
 * bound ||A c||_p + RT * delta(B) with c the box center and RT the
 * Riesz-Thorin bound acting as a Lipschitz constant; boxes that provably miss
 * the sphere are culled by interval modulus bounds. Only total dimension <= 4
 * is supported. The result is clamped by the Riesz-Thorin bound.
 */
double pnorm_upper_grid(const CMatrix& a, double p, const GridOptions& opts = {});

/// Budget-parameterized form: result is monotone non-increasing in depth.
double pnorm_upper_grid_depth(const CMatrix& a, double p, long depth);

struct EstimateOptions {
    PowerOptions power;
    bool use_grid = false;  // grid kicks in only when dimension <= 4
    GridOptions grid;
};

/**
 * Combined estimate: power lower bound; upper bound is the minimum of
 * Riesz-Thorin, the grid bound (when enabled and dimension <= 4), the exact
 * value for diagonal matrices (max modulus of the diagonal), and for p = 2
 * the largest singular value with a 1e-10 relative guard band. p = 2 follows
 * the same code path as every other exponent and only gains the extra tag.
 */
NormEstimate pnorm_estimate(const CMatrix& a, double p, const EstimateOptions& opts = {});
NormEstimate pnorm_estimate(const LabeledOperator& a, const EstimateOptions& opts = {});

struct PcbEstimate {
    NormEstimate overall;          // max over amplification levels k = 1..K
    std::vector<double> per_k;     // lower estimate of ||id_{M_k} (x) phi|| per k
    int max_amplification = 0;
    bool truncated = true;
};

/**
 * Truncated p-complete-boundedness estimate of the linear map phi given by
 * its action on a basis of its domain: amplify by matrix units up to K,
 * sample, and report max_k of certified lower bounds lower||phi_k(X)|| /
 * upper||X||. An upper bound is available only when the domain basis has
 * pairwise disjoint supports; otherwise upper stays infinite and the result
 * is flagged as truncated.
 */
PcbEstimate pcb_norm_estimate(const std::vector<CMatrix>& domain_basis,
                              const std::vector<CMatrix>& images, double p, int max_amplification,
                              std::uint64_t seed = 1, int samples = 24);

enum class IsometryVerdict { isometric, strictly_contractive, inconclusive };

struct VerdictRow {
    NormEstimate src;
    NormEstimate img;
};

struct VerdictReport {
    IsometryVerdict verdict = IsometryVerdict::inconclusive;
    double margin = 0.0;
    int witness_index = -1;  // row certifying strict contraction, if any
    std::vector<VerdictRow> rows;
};

/**
 * Classify a linear map from certified norm estimates of (x, phi(x)) pairs.
 * Margins are relative to the source norm, which makes the verdict invariant
 * under rescaling test elements. "isometric" needs two-sided agreement on
 * every row; "strictly-contractive" needs one row with
 * upper||phi(x)|| < lower||x|| * (1 - margin). Empty input is inconclusive.
 */
VerdictReport isometry_verdict_pairs(const std::vector<std::pair<CMatrix, CMatrix>>& pairs,
                                     double p, double margin = 1e-3,
                                     const EstimateOptions& opts = {});

VerdictReport isometry_verdict(const std::function<LabeledOperator(const LabeledOperator&)>& map,
                               const std::vector<LabeledOperator>& test_set, double margin = 1e-3,
                               const EstimateOptions& opts = {});

}  // namespace lpdl
