#include "lpdl/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lpdl/core_algebra.hpp"
#include "lpdl/duality.hpp"
#include "lpdl/rng.hpp"

namespace lpdl {

namespace {

// Norm-level agreement needed before a map counts as isometric on an element,
// and the ceiling for exact equivariance identities.  Entrywise identities use
// the configurable identity_tol instead.
constexpr double kNormAgreeTol = 1e-8;
constexpr double kEquivarianceTol = 1e-9;
// Homomorphism residual ceilings per chain map (phi1..phi4, composite).
constexpr double kHomTol[5] = {1e-10, 1e-10, 1e-10, 1e-10, 1e-9};

bool is_p2(double p) { return std::abs(p - 2.0) < 1e-12; }

double spectral_norm(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

NormEstimate exact_estimate(double value, const char* method) {
    NormEstimate e;
    e.lower = value;
    e.upper = value;
    e.methods = {method};
    return e;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

CcElement random_cc(const GroupAction& act, Rng& rng) {
    CcElement f(act);
    for (auto& a : f.coefficients)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.cgaussian();
    return f;
}

DoubleCcElement random_double(const GroupAction& act, Rng& rng) {
    DoubleCcElement f(act);
    for (auto& a : f.values)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.cgaussian();
    return f;
}

/// Accumulates check lines and the first failure's replay payload.
struct Checker {
    const ExperimentConfig& config;
    SuiteResult& result;

    bool expect(bool ok, const std::string& what, double residual, double tol,
                const std::function<Json()>& element = {}) {
        result.max_residual = std::max(result.max_residual, residual);
        result.checks.push_back((ok ? "ok: " : "FAIL: ") + what + " (residual " +
                                fmt_short(residual) + ", tol " + fmt_short(tol) + ")");
        if (!ok) {
            if (result.passed) {
                Json payload;
                payload["suite"] = result.suite;
                payload["config"] = config_to_json(config);
                payload["check"] = what;
                payload["residual"] = residual;
                payload["tolerance"] = tol;
                if (element) payload["element"] = element();
                result.failure = std::move(payload);
            }
            result.passed = false;
        }
        return ok;
    }
};

std::string element_id(std::size_t k, std::size_t random_count) {
    return k < random_count ? "F[" + std::to_string(k) + "]" : "witness";
}

std::string verdict_name(IsometryVerdict v) {
    switch (v) {
        case IsometryVerdict::isometric: return "isometric";
        case IsometryVerdict::strictly_contractive: return "strictly-contractive";
        default: return "inconclusive";
    }
}

// --- suites --------------------------------------------------------------------

/// Exact covariance of the dual action: conjugation by V_gamma fixes pi(a),
/// multiplies lambda(s) by conj(gamma(s)), and matches the coefficient-level
/// dual action on whole elements.
void suite_dual_covariance(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();
    const FiniteAbelianGroup& g = alpha.group();
    const int n = alpha.degree();

    Rng rng = Rng::stream(config.seed, "dual-covariance");
    std::vector<CcElement> elems;
    for (int k = 0; k < config.tests; ++k) elems.push_back(random_cc(alpha, rng));

    for (double p : config.p_values) {
        double lam_res = 0.0, pi_res = 0.0, elem_res = 0.0;
        for (const auto& gamma : g.dual_of().elements()) {
            const LabeledOperator v = v_gamma(g, gamma, p, n);
            const LabeledOperator v_inv = v_gamma(g, g.neg(gamma), p, n);
            for (const auto& s : g.elements()) {
                const LabeledOperator lam = lambda_rep(g, s, p, n);
                const CMatrix lhs = compose(compose(v, lam), v_inv).mat;
                const CMatrix rhs = std::conj(g.pairing(gamma, s)) * lam.mat;
                lam_res = std::max(lam_res, (lhs - rhs).cwiseAbs().maxCoeff());
            }
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    CMatrix a = CMatrix::Zero(n, n);
                    a(i, j) = 1.0;
                    const LabeledOperator pi = pi_rep(a, alpha, p);
                    const CMatrix lhs = compose(compose(v, pi), v_inv).mat;
                    pi_res = std::max(pi_res, (lhs - pi.mat).cwiseAbs().maxCoeff());
                }
            }
            for (const auto& f : elems) {
                const CMatrix lhs = integrated_form(dual_action(gamma, f), p).ambient.mat;
                const CMatrix rhs =
                    dual_action_matrix(gamma, integrated_form(f, p).ambient, g).mat;
                elem_res = std::max(elem_res, (lhs - rhs).cwiseAbs().maxCoeff());
            }
        }
        const std::string at_p = " at p=" + fmt_short(p);
        ck.expect(lam_res <= config.identity_tol,
                  "V conjugation scales every lambda(s) by conj(gamma(s))" + at_p, lam_res,
                  config.identity_tol);
        ck.expect(pi_res <= config.identity_tol,
                  "V conjugation fixes pi(a) on the matrix-unit basis" + at_p, pi_res,
                  config.identity_tol);
        ck.expect(elem_res <= config.identity_tol,
                  "coefficient dual action matches V-conjugation on random elements" + at_p,
                  elem_res, config.identity_tol,
                  [&] { return cc_element_to_json(elems.front()); });
    }
}

/// The integrated form turns twisted convolution into the matrix product, for
/// the crossed product and for the double crossed product.
void suite_algebra_law(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();

    Rng rng = Rng::stream(config.seed, "algebra-law");
    std::vector<std::pair<CcElement, CcElement>> pairs;
    std::vector<std::pair<DoubleCcElement, DoubleCcElement>> double_pairs;
    for (int k = 0; k < config.tests; ++k)
        pairs.emplace_back(random_cc(alpha, rng), random_cc(alpha, rng));
    for (int k = 0; k < config.tests; ++k)
        double_pairs.emplace_back(random_double(alpha, rng), random_double(alpha, rng));

    for (double p : config.p_values) {
        double res = 0.0;
        const std::pair<CcElement, CcElement>* offender = &pairs.front();
        for (const auto& fg : pairs) {
            const CMatrix lhs = integrated_form(twisted_convolve(fg.first, fg.second), p)
                                    .ambient.mat;
            const CMatrix rhs = compose(integrated_form(fg.first, p).ambient,
                                        integrated_form(fg.second, p).ambient)
                                    .mat;
            const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
            const double d = (lhs - rhs).cwiseAbs().maxCoeff() / scale;
            if (d > res) {
                res = d;
                offender = &fg;
            }
        }
        ck.expect(res <= config.identity_tol,
                  "integrated form is multiplicative on " + std::to_string(config.tests) +
                      " random pairs at p=" + fmt_short(p),
                  res, config.identity_tol, [&] {
                      Json j;
                      j["f"] = cc_element_to_json(offender->first);
                      j["g"] = cc_element_to_json(offender->second);
                      return j;
                  });

        double dres = 0.0;
        for (const auto& fg : double_pairs) {
            const CMatrix lhs = double_rep(double_convolve(fg.first, fg.second), p).mat;
            const CMatrix rhs =
                compose(double_rep(fg.first, p), double_rep(fg.second, p)).mat;
            const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
            dres = std::max(dres, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
        }
        ck.expect(dres <= config.identity_tol,
                  "double integrated form is multiplicative at p=" + fmt_short(p), dres,
                  config.identity_tol);
    }
}

/// E_t reads every coefficient back from the integrated form exactly, and its
/// certified norm never exceeds the certified norm of the whole element.
void suite_expectation(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();
    const FiniteAbelianGroup& g = alpha.group();

    Rng rng = Rng::stream(config.seed, "expectation");
    std::vector<CcElement> elems;
    for (int k = 0; k < config.tests; ++k) elems.push_back(random_cc(alpha, rng));

    for (double p : config.p_values) {
        double round_trip = 0.0, expansion = -1.0;
        const CcElement* offender = &elems.front();
        for (const auto& f : elems) {
            const CrossedProductRep rep = integrated_form(f, p);
            const double scale = std::max(1.0, f.max_abs());
            const NormEstimate whole = pnorm_estimate(rep.ambient);
            for (const auto& t : g.elements()) {
                const CMatrix back = expectation(rep.ambient, g, t);
                const double d = (back - f.at(t)).cwiseAbs().maxCoeff() / scale;
                if (d > round_trip) {
                    round_trip = d;
                    offender = &f;
                }
                const NormEstimate coeff = pnorm_estimate(f.at(t), p);
                expansion = std::max(
                    expansion, (coeff.lower - whole.upper) / std::max(1.0, whole.upper));
            }
        }
        ck.expect(round_trip <= config.identity_tol,
                  "expectation recovers all coefficients at p=" + fmt_short(p), round_trip,
                  config.identity_tol, [&] { return cc_element_to_json(*offender); });
        ck.expect(expansion <= 1e-9,
                  "certified ||E_t(f)|| never exceeds certified ||f|| at p=" + fmt_short(p),
                  std::max(0.0, expansion), 1e-9);
    }
}

/// Full chain health from chain_report: homomorphism residuals, stage
/// isometries, contractivity of the lossy legs, bijectivity, equivariance and
/// the composite verdict of the p = 2 dichotomy.
void suite_chain_status(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();
    const int m = alpha.group().order();

    for (double p : config.p_values) {
        const ChainReport report = chain_report(alpha, p, config.tests, config.seed);
        const std::string at_p = " at p=" + fmt_short(p);

        for (std::size_t k = 0; k < report.maps.size(); ++k) {
            const MapRecord& rec = report.maps[k];
            ck.expect(rec.hom_residual <= kHomTol[k],
                      rec.map_name + " is a homomorphism on consecutive test pairs" + at_p,
                      rec.hom_residual, kHomTol[k]);
        }

        for (std::size_t k : {std::size_t{0}, std::size_t{2}, std::size_t{3}}) {
            const MapRecord& rec = report.maps[k];
            double worst = 0.0;
            for (std::size_t i = 0; i < rec.source_norms.size(); ++i) {
                const NormEstimate& s = rec.source_norms[i];
                const NormEstimate& t = rec.image_norms[i];
                const double scale = std::max(1.0, s.lower);
                worst = std::max(worst, std::abs(s.lower - t.lower) / scale);
                worst = std::max(worst, (t.lower - s.upper) / scale);
                worst = std::max(worst, (s.lower - t.upper) / scale);
            }
            ck.expect(worst <= kNormAgreeTol,
                      rec.map_name + " preserves certified norms on every element" + at_p,
                      worst, kNormAgreeTol);
        }

        for (std::size_t k : {std::size_t{1}, std::size_t{4}}) {
            const MapRecord& rec = report.maps[k];
            double worst = -1.0;
            for (std::size_t i = 0; i < rec.source_norms.size(); ++i) {
                const double scale = std::max(1.0, rec.source_norms[i].upper);
                worst = std::max(
                    worst, (rec.image_norms[i].lower - rec.source_norms[i].upper) / scale);
            }
            ck.expect(worst <= 1e-9,
                      rec.map_name + " is contractive (no certified expansion)" + at_p,
                      std::max(0.0, worst), 1e-9);
        }

        ck.expect(report.linearized_rank == report.full_rank,
                  "linearized composite has full rank " + std::to_string(report.full_rank) +
                      at_p,
                  std::abs(report.linearized_rank - report.full_rank), 0.0);
        ck.expect(report.equivariance_residual <= kEquivarianceTol,
                  "equivariance identities hold on the chain test set" + at_p,
                  report.equivariance_residual, kEquivarianceTol);

        const IsometryVerdict expected = (is_p2(p) || m == 1)
                                             ? IsometryVerdict::isometric
                                             : IsometryVerdict::strictly_contractive;
        ck.expect(report.verdicts.verdict == expected,
                  "composite verdict is " + verdict_name(expected) + at_p,
                  report.verdicts.verdict == expected ? 0.0 : 1.0, 0.0);

        for (std::size_t i = 0; i < report.verdicts.rows.size(); ++i) {
            const auto& row = report.verdicts.rows[i];
            std::string verdict;
            if (report.verdicts.verdict == IsometryVerdict::isometric)
                verdict = "isometric";
            else if (report.verdicts.verdict == IsometryVerdict::strictly_contractive &&
                     static_cast<int>(i) == report.verdicts.witness_index)
                verdict = "strictly-contractive";
            ck.result.norm_table.push_back({element_id(i, report.verdicts.rows.size() -
                                                              (m > 1 ? 1 : 0)),
                                            p, row.src, row.img, verdict});
        }
    }
}

/// The p = 2 half of the dichotomy: the composite preserves exact spectral
/// norms; at other exponents it never certifiably expands.
void suite_isometry(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();

    Rng rng = Rng::stream(config.seed, "isometry");
    std::vector<DoubleCcElement> elems;
    for (int k = 0; k < config.tests; ++k) elems.push_back(random_double(alpha, rng));

    for (double p : config.p_values) {
        const std::string at_p = " at p=" + fmt_short(p);
        if (is_p2(p)) {
            double worst = 0.0;
            std::size_t worst_k = 0;
            for (std::size_t k = 0; k < elems.size(); ++k) {
                const double src = spectral_norm(double_rep(elems[k], p).mat);
                const double img = spectral_norm(phi_total(elems[k], p).mat);
                const double d = std::abs(src - img) / std::max(1.0, src);
                if (d > worst) {
                    worst = d;
                    worst_k = k;
                }
                ck.result.norm_table.push_back({element_id(k, elems.size()), p,
                                                exact_estimate(src, "svd-exact"),
                                                exact_estimate(img, "svd-exact"),
                                                "isometric"});
            }
            ck.expect(worst <= kNormAgreeTol,
                      "composite preserves the exact spectral norm of " +
                          std::to_string(config.tests) + " random elements" + at_p,
                      worst, kNormAgreeTol,
                      [&] { return double_element_to_json(elems[worst_k]); });
        } else {
            double worst = -1.0;
            std::size_t worst_k = 0;
            for (std::size_t k = 0; k < elems.size(); ++k) {
                const NormEstimate src = pnorm_estimate(double_rep(elems[k], p));
                const NormEstimate img = pnorm_estimate(phi_total(elems[k], p));
                const double d = (img.lower - src.upper) / std::max(1.0, src.upper);
                if (d > worst) {
                    worst = d;
                    worst_k = k;
                }
                ck.result.norm_table.push_back(
                    {element_id(k, elems.size()), p, src, img, ""});
            }
            ck.expect(worst <= 1e-9,
                      "composite never certifiably expands a test element" + at_p,
                      std::max(0.0, worst), 1e-9,
                      [&] { return double_element_to_json(elems[worst_k]); });
        }
    }
}

/// Certified strict contraction of the composite on the chirp witness for
/// p != 2, its exact isometry at p = 2, and the primitive Gelfand gap of the
/// convolution by (1, i) on two points.
void suite_contraction_witness(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();
    const int m = alpha.group().order();
    const DoubleCcElement witness = contraction_witness(alpha);

    EstimateOptions opts;
    opts.use_grid = true;

    for (double p : config.p_values) {
        const std::string at_p = " at p=" + fmt_short(p);
        const LabeledOperator src_op = double_rep(witness, p);
        const LabeledOperator img_op = phi_total(witness, p);

        if (is_p2(p) || m == 1) {
            const double src = spectral_norm(src_op.mat);
            const double img = spectral_norm(img_op.mat);
            const NormEstimate se = is_p2(p) ? exact_estimate(src, "svd-exact")
                                             : pnorm_estimate(src_op, opts);
            const NormEstimate ie = is_p2(p) ? exact_estimate(img, "svd-exact")
                                             : pnorm_estimate(img_op, opts);
            const double d = std::abs(se.lower - ie.lower) / std::max(1.0, se.lower);
            ck.result.norm_table.push_back({"witness", p, se, ie, "isometric"});
            ck.expect(d <= kNormAgreeTol,
                      "composite maps the witness isometrically" + at_p, d, kNormAgreeTol,
                      [&] { return double_element_to_json(witness); });
        } else {
            const NormEstimate se = pnorm_estimate(src_op, opts);
            const NormEstimate ie = pnorm_estimate(img_op, opts);
            const double gap = (se.lower - ie.upper) / std::max(se.lower, 1e-300);
            ck.result.norm_table.push_back({"witness", p, se, ie, "strictly-contractive"});
            ck.expect(ie.upper < se.lower * (1.0 - config.verdict_margin),
                      "certified strict contraction of the composite on the witness" + at_p,
                      gap, config.verdict_margin,
                      [&] { return double_element_to_json(witness); });
        }

        if (!is_p2(p)) {
            CMatrix conv(2, 2);
            conv << Cplx(1, 0), Cplx(0, 1), Cplx(0, 1), Cplx(1, 0);
            CMatrix hat = CMatrix::Zero(2, 2);
            hat(0, 0) = Cplx(1, 1);
            hat(1, 1) = Cplx(1, -1);
            const NormEstimate ce = pnorm_estimate(conv, p, opts);
            const NormEstimate he = pnorm_estimate(hat, p, opts);
            ck.result.norm_table.push_back({"conv(1,i)", p, ce, he, "strictly-contractive"});
            const double excess = ce.lower - std::sqrt(2.0);
            ck.expect(excess > config.verdict_margin,
                      "primitive Gelfand gap ||conv(1,i)||_p > sqrt(2) + margin" + at_p,
                      excess, config.verdict_margin);
        }
    }
}

/// The composite intertwines the double dual action with Ad rho (x) alpha,
/// including both intermediate claims, entrywise on random elements.
void suite_equivariance(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();

    Rng rng = Rng::stream(config.seed, "equivariance");
    std::vector<DoubleCcElement> elems;
    for (int k = 0; k < config.tests; ++k) elems.push_back(random_double(alpha, rng));

    for (double p : config.p_values) {
        const EquivarianceReport rep = equivariance_check(alpha, p, elems);
        const std::string at_p = " at p=" + fmt_short(p);
        ck.expect(rep.claim1 <= kEquivarianceTol,
                  "double dual action pushes to the right-translation action through the "
                  "kernel stages" + at_p,
                  rep.claim1, kEquivarianceTol);
        ck.expect(rep.claim2 <= kEquivarianceTol,
                  "collapse stage intertwines the right-translation actions" + at_p,
                  rep.claim2, kEquivarianceTol);
        ck.expect(rep.composite <= kEquivarianceTol,
                  "composite intertwines the double dual action with Ad rho (x) alpha" + at_p,
                  rep.composite, kEquivarianceTol);
    }
}

std::vector<LabeledOperator> matrix_unit_basis(const std::vector<IndexFactor>& legs, double p) {
    const int d = factor_dim(legs);
    std::vector<LabeledOperator> basis;
    basis.reserve(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            CMatrix e = CMatrix::Zero(d, d);
            e(i, j) = 1.0;
            basis.emplace_back(std::move(e), legs, legs, p);
        }
    }
    return basis;
}

/// C*-core dimensions across the chain: full matrix algebra, the group
/// multiplier algebra, the crossed product and the endpoint tensor algebra,
/// against the p = 2 dichotomy.
void suite_core(const ExperimentConfig& config, Checker& ck) {
    const GroupAction alpha = config.parsed_action();
    const FiniteAbelianGroup& g = alpha.group();
    const int m = g.order();
    const int n = alpha.degree();

    for (double p : config.p_values) {
        const bool p2 = is_p2(p);
        const std::string at_p = " at p=" + fmt_short(p);

        const auto check_dim = [&](const char* name, const std::vector<LabeledOperator>& basis,
                                   int expected) {
            const int dim = static_cast<int>(core_compute(basis).size());
            ck.expect(dim == expected,
                      std::string("core of ") + name + " has dimension " +
                          std::to_string(expected) + at_p,
                      std::abs(dim - expected), 0.0);
        };

        check_dim("B(l^p_n)", matrix_unit_basis({{"n", n}}, p), p2 ? n * n : n);

        std::vector<LabeledOperator> translations;
        for (const auto& s : g.elements()) translations.push_back(lambda_rep(g, s, p, 1));
        check_dim("PM_p(G)", translations, p2 ? m : 1);

        check_dim("the crossed product", crossed_product_basis(alpha, p),
                  p2 ? m * n * n : n);

        check_dim("B(l^p(G)) (x) M_n", matrix_unit_basis({{"G", m}, {"n", n}}, p),
                  p2 ? m * m * n * n : m * n);
    }
}

/// Self-consistency of the norm engine on random small matrices: bound
/// ordering, the exact p = 2 cross-check, and p-q duality of the lower bounds.
void suite_pnorm_self(const ExperimentConfig& config, Checker& ck) {
    Rng rng = Rng::stream(config.seed, "pnorm-self");

    struct Sample {
        CMatrix a;
    };
    std::vector<Sample> samples;
    for (int k = 0; k < config.tests; ++k) {
        const int d = 1 + static_cast<int>(rng.uniform_index(4));
        CMatrix a(d, d);
        for (Eigen::Index c = 0; c < d; ++c)
            for (Eigen::Index r = 0; r < d; ++r) a(r, c) = rng.cgaussian();
        samples.push_back({std::move(a)});
    }

    for (double p : config.p_values) {
        const double q = p / (p - 1.0);
        const std::string at_p = " at p=" + fmt_short(p);
        double sandwich = -1.0, p2_defect = 0.0, duality = 0.0;
        std::size_t worst_k = 0;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const CMatrix& a = samples[k].a;
            const double lower = pnorm_lower_power(a, p).lower;
            const double grid = pnorm_upper_grid(a, p);
            const double rt = pnorm_upper_riesz_thorin(a, p);
            const double violation =
                std::max(lower - grid, grid - rt - 1e-9) / std::max(1.0, rt);
            if (violation > sandwich) {
                sandwich = violation;
                worst_k = k;
            }
            if (is_p2(p))
                p2_defect = std::max(
                    p2_defect,
                    std::abs(lower - spectral_norm(a)) / std::max(1.0, spectral_norm(a)));
            const double lower_t = pnorm_lower_power(a.transpose(), q).lower;
            duality = std::max(duality, std::abs(lower - lower_t) / std::max(1.0, lower));
        }
        const auto payload = [&] {
            const auto d = samples[worst_k].a.rows();
            return operator_to_json(LabeledOperator(
                samples[worst_k].a, {{"i", static_cast<int>(d)}},
                {{"j", static_cast<int>(d)}}, p));
        };
        ck.expect(sandwich <= 0.0,
                  "power lower <= grid upper <= Riesz-Thorin upper + 1e-9 on " +
                      std::to_string(config.tests) + " random matrices" + at_p,
                  std::max(0.0, sandwich), 0.0, payload);
        if (is_p2(p))
            ck.expect(p2_defect <= kNormAgreeTol,
                      "power lower bound matches the largest singular value" + at_p,
                      p2_defect, kNormAgreeTol, payload);
        ck.expect(duality <= 1e-6,
                  "||A||_p and ||A^T||_q lower bounds agree" + at_p, duality, 1e-6, payload);
    }
}

using SuiteFn = void (*)(const ExperimentConfig&, Checker&);

const std::vector<std::pair<std::string, SuiteFn>>& suite_table() {
    static const std::vector<std::pair<std::string, SuiteFn>> table = {
        {"dual-covariance", suite_dual_covariance},
        {"algebra-law", suite_algebra_law},
        {"expectation", suite_expectation},
        {"chain-status", suite_chain_status},
        {"isometry", suite_isometry},
        {"contraction-witness", suite_contraction_witness},
        {"equivariance", suite_equivariance},
        {"core", suite_core},
        {"pnorm-self", suite_pnorm_self},
    };
    return table;
}

std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

// --- configuration ---------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (n < 1) throw std::invalid_argument("n must be >= 1 (degree of the coefficient algebra)");
    if (tests < 1) throw std::invalid_argument("tests must be >= 1");
    if (p_values.empty())
        throw std::invalid_argument("the exponent list p must not be empty (e.g. [1.5, 2, 3])");
    for (double p : p_values)
        if (!(p > 1.0) || !std::isfinite(p))
            throw std::invalid_argument("exponent " + fmt_short(p) +
                                        " lies outside (1, inf); use finite p > 1");
    if (!(identity_tol > 0.0))
        throw std::invalid_argument("identity_tol must be positive");
    if (!(verdict_margin > 0.0) || verdict_margin >= 1.0)
        throw std::invalid_argument("verdict_margin must lie in (0, 1)");
    parsed_action();
}

GroupAction ExperimentConfig::parsed_action() const {
    try {
        const FiniteAbelianGroup g = FiniteAbelianGroup::parse(group);
        return GroupAction::parse(g, n, action);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(
            std::string(e.what()) +
            " (hint: group literals look like Z2, Z4, Z2xZ2; action literals like trivial, "
            "perm:(0 1), phased:(0 1)@0,1/4 with one segment per group factor)");
    }
}

std::string ExperimentConfig::tag() const {
    return group + "/n=" + std::to_string(n) + "/" + action;
}

namespace {

template <typename T>
T field_as(const Json& j, const char* name, const T& fallback) {
    if (!j.contains(name)) return fallback;
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(std::string("config field '") + name +
                                    "' has the wrong type");
    }
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const char* known[] = {"group",       "n",    "action", "p",  "tests",
                                  "seed", "identity_tol", "verdict_margin", "out"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (const char* k : known) found = found || it.key() == k;
        if (!found)
            throw std::invalid_argument(
                "unknown config field '" + it.key() +
                "' (known: group, n, action, p, tests, seed, identity_tol, verdict_margin, "
                "out)");
    }
    ExperimentConfig c;
    c.group = field_as(j, "group", c.group);
    c.n = field_as(j, "n", c.n);
    c.action = field_as(j, "action", c.action);
    if (j.contains("p")) {
        const Json& pj = j.at("p");
        c.p_values.clear();
        if (pj.is_array())
            for (const auto& v : pj) c.p_values.push_back(v.get<double>());
        else if (pj.is_number())
            c.p_values.push_back(pj.get<double>());
        else
            throw std::invalid_argument("config field 'p' must be a number or number list");
    }
    c.tests = field_as(j, "tests", c.tests);
    c.seed = field_as(j, "seed", c.seed);
    c.identity_tol = field_as(j, "identity_tol", c.identity_tol);
    c.verdict_margin = field_as(j, "verdict_margin", c.verdict_margin);
    c.out = field_as(j, "out", c.out);
    c.validate();
    return c;
}

Json config_to_json(const ExperimentConfig& c) {
    Json j;
    j["group"] = c.group;
    j["n"] = c.n;
    j["action"] = c.action;
    j["p"] = c.p_values;
    j["tests"] = c.tests;
    j["seed"] = c.seed;
    j["identity_tol"] = c.identity_tol;
    j["verdict_margin"] = c.verdict_margin;
    j["out"] = c.out;
    return j;
}

// --- running -----------------------------------------------------------------------

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& entry : suite_table()) out.push_back(entry.first);
        return out;
    }();
    return names;
}

SuiteResult run_suite(const ExperimentConfig& config, const std::string& suite) {
    SuiteFn fn = nullptr;
    for (const auto& entry : suite_table())
        if (entry.first == suite) fn = entry.second;
    if (!fn) {
        std::string names;
        for (const auto& entry : suite_table()) {
            if (!names.empty()) names += ", ";
            names += entry.first;
        }
        throw std::invalid_argument("unknown suite '" + suite + "' (available: " + names +
                                    "; `verify` with no --suite runs them all)");
    }
    config.validate();

    SuiteResult result;
    result.suite = suite;
    Checker ck{config, result};
    const auto t0 = std::chrono::steady_clock::now();
    fn(config, ck);
    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return result;
}

int thread_cap(int jobs) {
    if (jobs < 1) return 1;
    int cap = jobs;
    if (const char* env = std::getenv("LPDL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        cap = (end != env && *end == '\0' && v >= 1) ? static_cast<int>(v) : 1;
    } else {
        const unsigned hw = std::thread::hardware_concurrency();
        if (hw > 0) cap = static_cast<int>(hw);
    }
    return std::min(cap, jobs);
}

std::vector<SuiteResult> run_all(const ExperimentConfig& config) {
    const auto& names = suite_names();
    std::vector<SuiteResult> out(names.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < names.size();) {
            try {
                out[k] = run_suite(config, names[k]);
            } catch (const std::exception& e) {
                SuiteResult r;
                r.suite = names[k];
                r.passed = false;
                r.checks.push_back(std::string("FAIL: exception: ") + e.what());
                Json payload;
                payload["suite"] = names[k];
                payload["config"] = config_to_json(config);
                payload["check"] = std::string("exception: ") + e.what();
                r.failure = std::move(payload);
                out[k] = std::move(r);
            }
        }
    };
    const int workers = thread_cap(static_cast<int>(names.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return out;
}

// --- reports ------------------------------------------------------------------------

Json report_to_json(const std::vector<SuiteResult>& results, const Json& config_block) {
    Json j;
    j["generated_at"] = now_utc();
    j["config"] = config_block;
    bool all = true;
    for (const auto& r : results) all = all && r.passed;
    j["passed"] = all;
    Json suites = Json::array();
    for (const auto& r : results) {
        Json s;
        s["suite"] = r.suite;
        s["passed"] = r.passed;
        s["max_residual"] = r.max_residual;
        s["wall_ms"] = r.wall_ms;
        s["checks"] = r.checks;
        Json rows = Json::array();
        for (const auto& row : r.norm_table) {
            Json rj;
            rj["element"] = row.element;
            rj["p"] = row.p;
            rj["src_lower"] = row.src.lower;
            rj["src_upper"] = row.src.upper;
            rj["img_lower"] = row.img.lower;
            rj["img_upper"] = row.img.upper;
            rj["verdict"] = row.verdict;
            rows.push_back(std::move(rj));
        }
        s["norm_table"] = std::move(rows);
        s["failure"] = r.failure;
        suites.push_back(std::move(s));
    }
    j["suites"] = std::move(suites);
    return j;
}

std::string report_to_csv(const std::vector<SuiteResult>& results) {
    std::string out =
        "suite,passed,max_residual,wall_ms,element,p,src_lower,src_upper,img_lower,"
        "img_upper,verdict\n";
    for (const auto& r : results) {
        const std::string head = csv_escape(r.suite) + "," + (r.passed ? "true" : "false") +
                                 "," + fmt(r.max_residual) + "," + fmt(r.wall_ms) + ",";
        if (r.norm_table.empty()) {
            out += head + ",,,,,,\n";
            continue;
        }
        for (const auto& row : r.norm_table) {
            out += head + csv_escape(row.element) + "," + fmt(row.p) + "," +
                   fmt(row.src.lower) + "," + fmt(row.src.upper) + "," + fmt(row.img.lower) +
                   "," + fmt(row.img.upper) + "," + csv_escape(row.verdict) + "\n";
        }
    }
    return out;
}

std::string report_to_markdown(const std::vector<SuiteResult>& results) {
    std::size_t failed = 0;
    for (const auto& r : results)
        if (!r.passed) ++failed;

    std::ostringstream md;
    md << "# Verification report\n\n";
    if (failed == 0)
        md << "**PASSED** - all " << results.size() << " suites green\n";
    else
        md << "**FAILED** - " << failed << " of " << results.size() << " suites failed\n";

    std::vector<const SuiteResult*> ordered;
    for (const auto& r : results)
        if (!r.passed) ordered.push_back(&r);
    for (const auto& r : results)
        if (r.passed) ordered.push_back(&r);

    if (failed > 0) {
        md << "\n## Failures\n";
        for (const auto* r : ordered) {
            if (r->passed) break;
            md << "\n### " << r->suite << "\n\n";
            for (const auto& line : r->checks) md << "- " << line << "\n";
        }
    }

    md << "\n## Summary\n\n| suite | result | max residual | checks | wall ms |\n"
       << "|---|---|---|---|---|\n";
    for (const auto* r : ordered) {
        std::size_t bad = 0;
        for (const auto& line : r->checks)
            if (line.rfind("FAIL", 0) == 0) ++bad;
        md << "| " << r->suite << " | " << (r->passed ? "pass" : "FAIL") << " | "
           << fmt_short(r->max_residual) << " | " << (r->checks.size() - bad) << "/"
           << r->checks.size() << " | " << fmt_short(r->wall_ms) << " |\n";
    }

    bool any_rows = false;
    for (const auto& r : results) any_rows = any_rows || !r.norm_table.empty();
    if (any_rows) {
        md << "\n## Certified norms\n\n"
           << "| suite | element | p | source | image | verdict |\n|---|---|---|---|---|---|\n";
        for (const auto* r : ordered) {
            for (const auto& row : r->norm_table) {
                md << "| " << r->suite << " | " << row.element << " | " << fmt_short(row.p)
                   << " | [" << fmt_short(row.src.lower) << ", " << fmt_short(row.src.upper)
                   << "] | [" << fmt_short(row.img.lower) << ", " << fmt_short(row.img.upper)
                   << "] | " << row.verdict << " |\n";
            }
        }
    }
    return md.str();
}

void emit_report(const std::vector<SuiteResult>& results, const Json& config_block,
                 const std::string& format, const std::string& base_path) {
    if (format == "json")
        write_json_file(base_path + ".json", report_to_json(results, config_block));
    else if (format == "csv")
        write_text_file(base_path + ".csv", report_to_csv(results));
    else if (format == "md")
        write_text_file(base_path + ".md", report_to_markdown(results));
    else
        throw std::invalid_argument("unknown report format '" + format +
                                    "' (expected json, csv or md)");
}

bool replay_case(const Json& case_json, std::ostream& log) {
    if (!case_json.is_object() || !case_json.contains("suite") ||
        !case_json.contains("config"))
        throw std::invalid_argument(
            "replay case needs 'suite' and 'config' fields (as written into the 'failure' "
            "block of a report)");
    const std::string suite = case_json.at("suite").get<std::string>();
    const ExperimentConfig config = config_from_json(case_json.at("config"));
    log << "replaying suite '" << suite << "' on " << config.tag() << " (seed "
        << config.seed << ")\n";
    if (case_json.contains("check"))
        log << "stored failure: " << case_json.at("check").get<std::string>() << "\n";
    if (case_json.contains("residual") && case_json.contains("tolerance"))
        log << "stored residual " << fmt_short(case_json.at("residual").get<double>())
            << " against tolerance " << fmt_short(case_json.at("tolerance").get<double>())
            << "\n";
    const SuiteResult fresh = run_suite(config, suite);
    for (const auto& line : fresh.checks) log << "  " << line << "\n";
    log << "replay: " << (fresh.passed ? "PASS" : "FAIL") << " (max residual "
        << fmt_short(fresh.max_residual) << ")\n";
    return fresh.passed;
}

}  // namespace lpdl
