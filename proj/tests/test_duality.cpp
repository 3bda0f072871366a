#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "lpdl/core_algebra.hpp"
#include "lpdl/duality.hpp"
#include "lpdl/rng.hpp"

using namespace lpdl;

namespace {

GroupAction z2_trivial() { return GroupAction(FiniteAbelianGroup::parse("Z2"), 1); }

GroupAction z4_phased() {
    return GroupAction::parse(FiniteAbelianGroup::parse("Z4"), 2, "phased:(0 1)@0,1/4");
}

GroupAction z3_phased() {
    return GroupAction::parse(FiniteAbelianGroup::parse("Z3"), 2, "phased:()@0,1/3");
}

GroupAction z2z2_phased() {
    return GroupAction::parse(FiniteAbelianGroup::parse("Z2xZ2"), 2, "phased:(0 1);()@0,1/2");
}

DoubleCcElement random_double(Rng& rng, const GroupAction& act) {
    DoubleCcElement f(act);
    for (CMatrix& v : f.values)
        for (Eigen::Index c = 0; c < v.cols(); ++c)
            for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, c) = rng.cgaussian();
    return f;
}

double max_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Independent spatial realization of Phi_1: conjugation by the phased leg
/// swap W(delta_gamma (x) delta_s (x) xi) = conj(gamma(s)) delta_s (x) delta_gamma (x) xi.
CMatrix phi1_conjugator(const GroupAction& act) {
    const auto& g = act.group();
    const int m = g.order();
    const int n = act.degree();
    CMatrix w = CMatrix::Zero(m * m * n, m * m * n);
    for (int gi = 0; gi < m; ++gi)
        for (int si = 0; si < m; ++si) {
            const Cplx ph = std::conj(g.pairing(g.element_at(gi), g.element_at(si)));
            for (int i = 0; i < n; ++i) w((si * m + gi) * n + i, (gi * m + si) * n + i) = ph;
        }
    return w;
}

}  // namespace

TEST_CASE("double coefficient elements and their unit") {
    const GroupAction act = z4_phased();
    const auto& g = act.group();
    Rng rng = Rng::stream(41, "double-basics");

    SUBCASE("point mass addressing is gamma-major") {
        CMatrix a(2, 2);
        a << 1.0, 2.0, 3.0, 4.0;
        const auto f = DoubleCcElement::point_mass(act, {3}, {1}, a);
        CHECK(max_diff(f.at({3}, {1}), a) == 0.0);
        CHECK(max_diff(f.values[3 * 4 + 1], a) == 0.0);
        CHECK(f.at({0}, {0}).cwiseAbs().maxCoeff() == 0.0);
        CHECK(f.max_abs() == 4.0);
    }

    SUBCASE("arithmetic checks algebra membership") {
        const auto f = random_double(rng, act);
        const auto h = random_double(rng, z3_phased());
        CHECK_THROWS_AS(f + h, std::invalid_argument);
        const auto sum = f + f;
        CHECK(max_diff(sum.at({1}, {2}), 2.0 * f.at({1}, {2})) == 0.0);
    }

    SUBCASE("unit represents as the identity and is a convolution unit") {
        const auto u = DoubleCcElement::unit(act);
        CHECK(max_diff(u.at(g.identity(), g.identity()), 4.0 * CMatrix::Identity(2, 2)) == 0.0);
        const LabeledOperator rep = double_rep(u, 3.0);
        CHECK(max_diff(rep.mat, CMatrix::Identity(rep.mat.rows(), rep.mat.cols())) == 0.0);
        CHECK(rep.row_space == std::vector<IndexFactor>{{"Gd", 4}, {"G", 4}, {"n", 2}});

        const auto f = random_double(rng, act);
        CHECK((double_convolve(u, f) - f).max_abs() <= 1e-14);
        CHECK((double_convolve(f, u) - f).max_abs() <= 1e-14);
    }
}

TEST_CASE("dual action: phase on coefficients, V-conjugation on matrices") {
    for (const GroupAction& act : {z2_trivial(), z4_phased(), z2z2_phased()}) {
        const auto& g = act.group();
        const int n = act.degree();
        const double p = 1.5;

        // Covariance identities for every character and group element.
        for (const auto& gamma : g.dual_of().elements()) {
            const LabeledOperator v = v_gamma(g, gamma, p, n);
            const LabeledOperator vinv = v_gamma(g, g.neg(gamma), p, n);
            CHECK(max_diff(compose(v, vinv).mat, CMatrix::Identity(v.mat.rows(), v.mat.cols())) ==
                  0.0);
            for (const auto& s : g.elements()) {
                const LabeledOperator lam = lambda_rep(g, s, p, n);
                const CMatrix lhs = compose(compose(v, lam), vinv).mat;
                CHECK(max_diff(lhs, std::conj(g.pairing(gamma, s)) * lam.mat) <= 1e-12);
            }
            Rng rng = Rng::stream(7, "dual-cov");
            for (int rep = 0; rep < 3; ++rep) {
                CMatrix a(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) a(i, j) = rng.cgaussian();
                const LabeledOperator pia = pi_rep(a, act, p);
                CHECK(max_diff(compose(compose(v, pia), vinv).mat, pia.mat) <= 1e-12);
            }
        }

        // Coefficient route equals the spatial route on integrated forms.
        Rng rng = Rng::stream(11, "dual-routes");
        CcElement f(act);
        for (CMatrix& a : f.coefficients) {
            a.resize(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = rng.cgaussian();
        }
        for (const auto& gamma : g.dual_of().elements()) {
            const LabeledOperator lhs = integrated_form(dual_action(gamma, f), p).ambient;
            const LabeledOperator rhs =
                dual_action_matrix(gamma, integrated_form(f, p).ambient, g);
            CHECK(max_diff(lhs.mat, rhs.mat) <= 1e-12);
            // The packaged GroupAction uses the same implementers.
            const GroupAction hat = dual_hat_action(act);
            CHECK(max_diff(hat.implementer(gamma),
                           kron(v_gamma(g, gamma, p, 1).mat, CMatrix::Identity(n, n))) == 0.0);
        }
    }
}

TEST_CASE("beta action twists by the character and the base action") {
    const GroupAction act = z4_phased();
    const auto& g = act.group();
    const FiniteAbelianGroup dual = g.dual_of();
    const GroupAction inner_trivial(dual, act.degree());

    SUBCASE("point masses: delta_tau (x) a -> tau(t) delta_tau (x) alpha_t(a)") {
        CMatrix a(2, 2);
        a << Cplx(1, 1), Cplx(0, 2), Cplx(3, 0), Cplx(-1, 4);
        const auto f = CcElement::point_mass(inner_trivial, {3}, a);
        const auto out = beta_action({1}, f, act);
        CHECK(max_diff(out.at({3}), dual.pairing({3}, {1}) * act.apply({1}, a)) <= 1e-15);
        CHECK(out.at({0}).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("matches conjugation by the packaged implementer") {
        Rng rng = Rng::stream(5, "beta");
        const GroupAction hat = beta_hat_action(act);
        for (const auto& t : g.elements()) {
            CcElement f(inner_trivial);
            for (CMatrix& a : f.coefficients) {
                a.resize(2, 2);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) a(i, j) = rng.cgaussian();
            }
            const CMatrix lhs = integrated_form(beta_action(t, f, act), 3.0, 0.25).ambient.mat;
            const CMatrix rhs =
                hat.apply(t, integrated_form(f, 3.0, 0.25).ambient.mat);
            CHECK(max_diff(lhs, rhs) <= 1e-12);
        }
    }

    SUBCASE("rejects elements of the wrong algebra") {
        CcElement wrong(act);  // nontrivial inner action
        CHECK_THROWS_AS(beta_action({1}, wrong, act), std::invalid_argument);
    }
}

TEST_CASE("double integrated form is a weighted algebra homomorphism") {
    Rng rng = Rng::stream(23, "double-rep");
    for (const GroupAction& act : {z2_trivial(), z3_phased(), z4_phased()}) {
        const auto& g = act.group();
        const int m = g.order();
        for (double p : {1.5, 2.0, 3.0}) {
            const auto f = random_double(rng, act);
            const auto h = random_double(rng, act);
            const CMatrix lhs = double_rep(double_convolve(f, h), p).mat;
            const CMatrix rhs = (double_rep(f, p).mat * double_rep(h, p).mat).eval();
            CHECK(max_diff(lhs, rhs) <= 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
        }

        // Outer expectation against the dual group recovers each inner slice.
        const auto f = random_double(rng, act);
        const LabeledOperator rep = double_rep(f, 3.0);
        for (const auto& gamma : g.dual_of().elements()) {
            CcElement slice(act);
            for (const auto& s : g.elements()) slice.at(s) = f.at(gamma, s);
            const CMatrix want = integrated_form(slice, 3.0).ambient.mat;
            const CMatrix got = expectation(rep, g.dual_of(), gamma, 1.0 / m);
            CHECK(max_diff(got, want) <= 1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
        }

        // Double dual action is implemented by the double element phases.
        const auto fr = double_dual_action({1}, f);
        for (const auto& gamma : g.dual_of().elements())
            for (const auto& s : g.elements())
                CHECK(max_diff(fr.at(gamma, s),
                               std::conj(g.pairing(gamma, {1})) * f.at(gamma, s)) == 0.0);
    }
}

TEST_CASE("phi1 swaps the legs against a compensating phase") {
    const GroupAction act = z4_phased();
    const auto& g = act.group();
    Rng rng = Rng::stream(31, "phi1");
    const auto x = random_double(rng, act);

    SUBCASE("coefficient formula") {
        const BiKernel y = phi1(x);
        CHECK(y.space == StageSpace::gelfand_side);
        for (const auto& t : g.elements())
            for (const auto& tau : g.dual_of().elements())
                CHECK(max_diff(y.at(t, tau), g.pairing(tau, t) * x.at(tau, t)) == 0.0);
    }

    SUBCASE("spatial route: exact phased permutation, hence isometric") {
        const CMatrix w = phi1_conjugator(act);
        for (double p : {1.5, 2.0, 3.0}) {
            const CMatrix lhs = stage_rep(phi1(x), p).mat;
            const CMatrix rhs = w * double_rep(x, p).mat * w.adjoint();
            CHECK(max_diff(lhs, rhs) <= 1e-12 * std::max(1.0, lhs.cwiseAbs().maxCoeff()));
        }
    }

    SUBCASE("certified norms agree on both sides") {
        for (double p : {1.5, 3.0}) {
            const NormEstimate src = pnorm_estimate(double_rep(x, p));
            const NormEstimate img = pnorm_estimate(stage_rep(phi1(x), p));
            CHECK(std::abs(src.lower - img.lower) <= 1e-8 * std::max(1.0, src.lower));
        }
    }

    SUBCASE("homomorphism in coefficient form") {
        const auto x2 = random_double(rng, act);
        const BiKernel lhs = phi1(double_convolve(x, x2));
        const BiKernel rhs = stage_convolve(phi1(x), phi1(x2));
        CHECK((lhs - rhs).max_abs() <= 1e-12 * std::max(1.0, lhs.max_abs()));
    }
}

TEST_CASE("gelfand transform of dual convolution operators") {
    const FiniteAbelianGroup z2 = FiniteAbelianGroup::parse("Z2");

    SUBCASE("convolution by (1, i) has transform (1+i, 1-i)") {
        CMatrix conv(2, 2);
        conv << Cplx(1, 0), Cplx(0, 1), Cplx(0, 1), Cplx(1, 0);
        const auto vals = gelfand_gamma_p(conv, z2);
        CHECK(std::abs(vals[0] - Cplx(1, 1)) <= 1e-14);
        CHECK(std::abs(vals[1] - Cplx(1, -1)) <= 1e-14);

        // Eigenvalue equation on the characters chi_t(gamma) = gamma(t).
        for (int t = 0; t < 2; ++t) {
            CVector chi(2);
            for (int gi = 0; gi < 2; ++gi) chi[gi] = z2.pairing(z2.element_at(gi), {t});
            CHECK(((conv * chi) - vals[t] * chi).cwiseAbs().maxCoeff() <= 1e-14);
        }
    }

    SUBCASE("multiplicative and contractive; isometric at p = 2") {
        const FiniteAbelianGroup z4 = FiniteAbelianGroup::parse("Z4");
        Rng rng = Rng::stream(3, "gelfand");
        for (int rep = 0; rep < 5; ++rep) {
            // Random convolution operators g = sum (1/m) c_tau L_tau.
            CMatrix a = CMatrix::Zero(4, 4), b = CMatrix::Zero(4, 4);
            for (int ti = 0; ti < 4; ++ti) {
                const Cplx ca = rng.cgaussian(), cb = rng.cgaussian();
                for (int r = 0; r < 4; ++r) {
                    const int to = z4.index_of(z4.add(z4.element_at(r), z4.element_at(ti)));
                    a(to, r) += 0.25 * ca;
                    b(to, r) += 0.25 * cb;
                }
            }
            const auto va = gelfand_gamma_p(a, z4);
            const auto vb = gelfand_gamma_p(b, z4);
            const auto vab = gelfand_gamma_p((a * b).eval(), z4);
            double mult = 0.0, sup = 0.0;
            for (int t = 0; t < 4; ++t) {
                mult = std::max(mult, std::abs(vab[t] - va[t] * vb[t]));
                sup = std::max(sup, std::abs(va[t]));
            }
            CHECK(mult <= 1e-10);
            for (double p : {1.5, 2.0, 3.0}) {
                const NormEstimate est = pnorm_estimate(a, p);
                CHECK(sup <= est.upper + 1e-9);
                if (p == 2.0) CHECK(std::abs(sup - est.lower) <= 1e-9 * std::max(1.0, sup));
            }
        }
    }

    SUBCASE("non-convolution input is rejected") {
        CMatrix bad(2, 2);
        bad << 1.0, 0.5, 0.0, 1.0;
        CHECK_THROWS_AS(gelfand_gamma_p(bad, z2), std::invalid_argument);
        CHECK_THROWS_AS(gelfand_gamma_p(CMatrix::Identity(3, 3), z2), std::invalid_argument);
    }
}

TEST_CASE("phi2 is the fiberwise Fourier transform") {
    const GroupAction act = z4_phased();
    const auto& g = act.group();
    const int m = g.order();
    Rng rng = Rng::stream(17, "phi2");
    const auto x = random_double(rng, act);
    const BiKernel y = phi1(x);

    SUBCASE("coefficient formula against a direct transform") {
        const BiKernel z = phi2(y);
        CHECK(z.space == StageSpace::multiplier_alpha);
        for (const auto& s : g.elements())
            for (const auto& t : g.elements()) {
                CMatrix want = CMatrix::Zero(2, 2);
                for (const auto& gamma : g.dual_of().elements())
                    want += std::conj(g.pairing(gamma, t)) * y.at(s, gamma);
                CHECK(max_diff(z.at(s, t), want / double(m)) <= 1e-14);
            }
        CHECK_THROWS_AS(phi2(z), std::invalid_argument);  // wrong stage
    }

    SUBCASE("matrix route agrees with the kernel route") {
        for (double p : {1.5, 2.0, 3.0}) {
            const LabeledOperator via_matrix = phi2_matrix(stage_rep(y, p), act);
            const LabeledOperator via_kernel = stage_rep(phi2(y), p);
            CHECK(max_diff(via_matrix.mat, via_kernel.mat) <=
                  1e-10 * std::max(1.0, via_kernel.mat.cwiseAbs().maxCoeff()));
        }
    }

    SUBCASE("matrix route rejects non-convolution coefficients") {
        LabeledOperator rep = stage_rep(y, 3.0);
        rep.mat(0, 1) += 1e-3;  // breaks the dual-translation commutant
        CHECK_THROWS_AS(phi2_matrix(rep, act), std::invalid_argument);
        LabeledOperator wrong = stage_rep(phi2(y), 3.0);
        CHECK_THROWS_AS(phi2_matrix(wrong, act), std::invalid_argument);  // wrong labels
    }

    SUBCASE("contractive for p != 2, isometric for p = 2") {
        for (double p : {1.5, 3.0}) {
            const NormEstimate src = pnorm_estimate(stage_rep(y, p));
            const NormEstimate img = pnorm_estimate(stage_rep(phi2(y), p));
            CHECK(img.lower <= src.upper * (1.0 + 1e-9) + 1e-9);
        }
        const NormEstimate src2 = pnorm_estimate(stage_rep(y, 2.0));
        const NormEstimate img2 = pnorm_estimate(stage_rep(phi2(y), 2.0));
        CHECK(std::abs(src2.upper - img2.upper) <= 1e-8 * std::max(1.0, src2.upper));
    }

    SUBCASE("trivial group: the whole chain is isometric for every p") {
        const GroupAction triv(FiniteAbelianGroup::parse("Z1"), 2);
        const auto f = random_double(rng, triv);
        for (double p : {1.5, 2.0, 3.0}) {
            const NormEstimate src = pnorm_estimate(double_rep(f, p));
            const NormEstimate img = pnorm_estimate(phi_total(f, p));
            CHECK(std::abs(src.lower - img.lower) <= 1e-10 * std::max(1.0, src.lower));
            CHECK(max_diff(double_rep(f, p).mat, phi_total(f, p).mat) == 0.0);
        }
    }
}

TEST_CASE("phi3 untwists the fiber by the inverse action") {
    const GroupAction act = z2z2_phased();
    const auto& g = act.group();
    Rng rng = Rng::stream(13, "phi3");
    const auto x = random_double(rng, act);
    const BiKernel z = phi2(phi1(x));

    SUBCASE("coefficient formula") {
        const BiKernel w = phi3(z);
        CHECK(w.space == StageSpace::multiplier_plain);
        for (const auto& s : g.elements())
            for (const auto& t : g.elements())
                CHECK(max_diff(w.at(s, t), act.apply_inverse(t, z.at(s, t))) == 0.0);
        CHECK_THROWS_AS(phi3(w), std::invalid_argument);
    }

    SUBCASE("spatial route: conjugation by I (x) sum_t e_tt (x) u_{-t}") {
        const int m = g.order(), n = act.degree();
        CMatrix u = CMatrix::Zero(m * n, m * n);
        for (int ti = 0; ti < m; ++ti)
            u.block(ti * n, ti * n, n, n) = act.implementer(g.neg(g.element_at(ti)));
        const CMatrix c = kron(CMatrix::Identity(m, m), u);
        for (double p : {1.5, 3.0}) {
            const CMatrix lhs = stage_rep(phi3(z), p).mat;
            const CMatrix rhs = c * stage_rep(z, p).mat * c.adjoint();
            CHECK(max_diff(lhs, rhs) <= 1e-12 * std::max(1.0, lhs.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("phi4 deletes the scalar middle leg after the shear") {
    const GroupAction act = z4_phased();
    const auto& g = act.group();
    const int m = g.order(), n = act.degree();
    Rng rng = Rng::stream(19, "phi4");

    SUBCASE("translation coefficients map to lambda_p(r) (x) I") {
        for (const auto& r : g.elements()) {
            BiKernel w(act, StageSpace::multiplier_plain);
            for (const auto& t : g.elements()) w.at(r, t) = CMatrix::Identity(n, n);
            const LabeledOperator out = phi4(stage_rep(w, 3.0), act);
            CHECK(max_diff(out.mat, lambda_rep(g, r, 3.0, n).mat) == 0.0);
        }
    }

    SUBCASE("multiplier coefficients map to M_f (x) a") {
        CMatrix a(n, n);
        a << Cplx(1, 2), Cplx(0, -1), Cplx(3, 0), Cplx(-2, 1);
        std::vector<Cplx> sym = {Cplx(1, 0), Cplx(0, 1), Cplx(-2, 0), Cplx(0.5, 0.5)};
        BiKernel w(act, StageSpace::multiplier_plain);
        for (int ti = 0; ti < m; ++ti) w.at(g.identity(), g.element_at(ti)) = sym[ti] * a;
        const LabeledOperator out = phi4(stage_rep(w, 1.5), act);
        CMatrix want = CMatrix::Zero(m * n, m * n);
        for (int ti = 0; ti < m; ++ti) want.block(ti * n, ti * n, n, n) = sym[ti] * a;
        CHECK(max_diff(out.mat, want) == 0.0);
        CHECK(out.row_space == std::vector<IndexFactor>{{"G", m}, {"n", n}});
    }

    SUBCASE("general elements: collapsed entries follow the row rule") {
        const auto x = random_double(rng, act);
        const BiKernel w = phi3(phi2(phi1(x)));
        const LabeledOperator t_op = phi4(stage_rep(w, 3.0), act);
        for (int a = 0; a < m; ++a)
            for (int ap = 0; ap < m; ++ap) {
                const CMatrix want =
                    w.at(g.sub(g.element_at(a), g.element_at(ap)), g.element_at(a));
                CHECK(max_diff(t_op.mat.block(a * n, ap * n, n, n), want) <= 1e-13);
            }
    }

    SUBCASE("operators outside the third-stage algebra are structure violations") {
        const auto x = random_double(rng, act);
        LabeledOperator d = stage_rep(phi3(phi2(phi1(x))), 3.0);
        d.mat(0, n) += 1e-6;  // off-diagonal in the middle leg after the shear
        CHECK_THROWS_AS(phi4(d, act), std::runtime_error);
        CHECK_THROWS_AS(phi4(lambda_rep(g, {1}, 3.0, n), act), std::invalid_argument);
    }
}

TEST_CASE("composite chain: unit, homomorphism, bijectivity") {
    Rng rng = Rng::stream(29, "composite");
    for (const GroupAction& act : {z2_trivial(), z3_phased(), z2z2_phased()}) {
        const int m = act.group().order(), n = act.degree();
        const auto u = DoubleCcElement::unit(act);
        const LabeledOperator t_u = phi_total(u, 3.0);
        CHECK(max_diff(t_u.mat, CMatrix::Identity(m * n, m * n)) <= 1e-14);

        for (double p : {1.5, 2.0, 3.0}) {
            const auto f = random_double(rng, act);
            const auto h = random_double(rng, act);
            const CMatrix lhs = phi_total(double_convolve(f, h), p).mat;
            const CMatrix rhs = (phi_total(f, p).mat * phi_total(h, p).mat).eval();
            CHECK(max_diff(lhs, rhs) <= 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
        }

        CHECK(linearized_phi_rank(act, 1.5) == m * m * n * n);
        CHECK(linearized_phi_rank(act, 3.0) == m * m * n * n);
    }
}

TEST_CASE("equivariance of the chain against the right-translation action") {
    Rng rng = Rng::stream(37, "equivariance");
    for (const GroupAction& act : {z4_phased(), z2z2_phased(), z3_phased()}) {
        std::vector<DoubleCcElement> tests;
        for (int k = 0; k < 3; ++k) tests.push_back(random_double(rng, act));
        const EquivarianceReport rep = equivariance_check(act, 1.5, tests);
        CHECK(rep.composite <= 1e-9);
        CHECK(rep.claim1 <= 1e-9);
        CHECK(rep.claim2 <= 1e-9);
    }

    SUBCASE("Ad rho (x) alpha translates multiplier symbols") {
        const GroupAction act = z4_phased();
        const auto& g = act.group();
        const int n = act.degree();
        std::vector<Cplx> sym = {Cplx(1, 0), Cplx(2, 1), Cplx(0, -3), Cplx(-1, 1)};
        const LabeledOperator mf = multiplication_operator(
            {{"G", 4}, {"n", n}},
            [&sym](const std::vector<int>& idx) { return sym[idx[0]]; }, 3.0);
        for (const auto& s : g.elements()) {
            const LabeledOperator moved = ad_rho_tensor_alpha(s, mf, act);
            for (int t = 0; t < 4; ++t) {
                const int from = g.index_of(g.add(g.element_at(t), s));
                CHECK(max_diff(moved.mat.block(t * n, t * n, n, n),
                               sym[from] * CMatrix::Identity(n, n)) <= 1e-15);
            }
        }
    }
}

TEST_CASE("strict contraction witness on Z/2 and the dichotomy verdicts") {
    const GroupAction act = z2_trivial();
    const auto wit = contraction_witness(act);

    SUBCASE("the witness is the lifted Gelfand gap element") {
        const FiniteAbelianGroup g = act.group();
        CHECK(max_diff(wit.at({0}, {0}), 2.0 * CMatrix::Identity(1, 1)) == 0.0);
        CHECK(max_diff(wit.at({1}, {0}), Cplx(0, 2) * CMatrix::Identity(1, 1)) == 0.0);
        CHECK(wit.at({0}, {1}).cwiseAbs().maxCoeff() == 0.0);

        CMatrix src_want(4, 4);
        src_want << Cplx(1, 0), 0, Cplx(0, 1), 0,  //
            0, Cplx(1, 0), 0, Cplx(0, 1),          //
            Cplx(0, 1), 0, Cplx(1, 0), 0,          //
            0, Cplx(0, 1), 0, Cplx(1, 0);
        CHECK(max_diff(double_rep(wit, 3.0).mat, src_want) == 0.0);

        CMatrix img_want = CMatrix::Zero(2, 2);
        img_want(0, 0) = Cplx(1, 1);
        img_want(1, 1) = Cplx(1, -1);
        CHECK(max_diff(phi_total(wit, 3.0).mat, img_want) == 0.0);
    }

    SUBCASE("certified gap at p in {1.5, 3}, certified equality at p = 2") {
        EstimateOptions opts;
        opts.use_grid = true;
        const double gap_want = std::pow(2.0, 2.0 / 3.0) - std::sqrt(2.0);  // ~0.173
        for (double p : {1.5, 3.0}) {
            const NormEstimate src = pnorm_estimate(double_rep(wit, p), opts);
            const NormEstimate img = pnorm_estimate(phi_total(wit, p), opts);
            CHECK(src.lower >= std::pow(2.0, 2.0 / 3.0) - 1e-9);
            CHECK(img.upper <= std::sqrt(2.0) + 1e-12);
            CHECK(img.upper < src.lower - 1e-3);
            CHECK(src.lower - img.upper >= gap_want - 1e-6);
        }
        const NormEstimate src2 = pnorm_estimate(double_rep(wit, 2.0), opts);
        const NormEstimate img2 = pnorm_estimate(phi_total(wit, 2.0), opts);
        CHECK(std::abs(src2.upper - img2.upper) <= 1e-9);

        // The primitive Gelfand gap behind the witness: ||conv(1,i)||_p > sqrt 2.
        CMatrix conv(2, 2);
        conv << Cplx(1, 0), Cplx(0, 1), Cplx(0, 1), Cplx(1, 0);
        for (double p : {1.5, 3.0})
            CHECK(pnorm_lower_power(conv, p).lower > std::sqrt(2.0) + 1e-3);
    }

    SUBCASE("verdicts: contraction for p != 2 on nontrivial G, isometry otherwise") {
        Rng rng = Rng::stream(43, "verdicts");
        auto pairs_at = [&](const GroupAction& a, double p, double scale) {
            std::vector<std::pair<CMatrix, CMatrix>> pairs;
            for (int k = 0; k < 3; ++k) {
                auto f = random_double(rng, a);
                pairs.emplace_back(scale * double_rep(f, p).mat, scale * phi_total(f, p).mat);
            }
            if (a.group().order() > 1) {
                const auto w = contraction_witness(a);
                pairs.emplace_back(scale * double_rep(w, p).mat, scale * phi_total(w, p).mat);
            }
            return pairs;
        };
        EstimateOptions opts;
        opts.use_grid = true;

        for (double p : {1.5, 3.0}) {
            const auto v = isometry_verdict_pairs(pairs_at(act, p, 1.0), p, 1e-3, opts);
            CHECK(v.verdict == IsometryVerdict::strictly_contractive);
            CHECK(v.witness_index >= 0);
        }
        CHECK(isometry_verdict_pairs(pairs_at(act, 2.0, 1.0), 2.0, 1e-3, opts).verdict ==
              IsometryVerdict::isometric);
        const GroupAction triv1(FiniteAbelianGroup::parse("Z1"), 2);
        CHECK(isometry_verdict_pairs(pairs_at(triv1, 3.0, 1.0), 3.0, 1e-3, opts).verdict ==
              IsometryVerdict::isometric);

        // Verdicts are invariant under rescaling the test elements.
        for (double scale : {0.1, 10.0}) {
            Rng replay = Rng::stream(43, "verdicts");  // same elements, same order
            rng = replay;
            for (double p : {1.5, 3.0})
                CHECK(isometry_verdict_pairs(pairs_at(act, p, scale), p, 1e-3, opts).verdict ==
                      IsometryVerdict::strictly_contractive);
        }
    }
}

TEST_CASE("verdicts survive conjugating the action by a fixed phased unitary") {
    const FiniteAbelianGroup g = FiniteAbelianGroup::parse("Z2");
    const GroupAction swap = GroupAction::parse(g, 2, "perm:(0 1)");
    // v = diag(1, i): v u v^* stays a phased permutation.
    CMatrix v = CMatrix::Zero(2, 2);
    v(0, 0) = 1.0;
    v(1, 1) = Cplx(0, 1);
    const CMatrix moved = v * swap.implementer({1}) * v.adjoint();
    const GroupAction conj_act(g, 2, {moved});

    Rng rng = Rng::stream(47, "conjugated");
    for (double p : {1.5, 2.0, 3.0}) {
        std::vector<std::pair<CMatrix, CMatrix>> base, conj;
        for (int k = 0; k < 2; ++k) {
            const auto f = random_double(rng, swap);
            DoubleCcElement fc(conj_act);
            for (std::size_t idx = 0; idx < f.values.size(); ++idx)
                fc.values[idx] = v * f.values[idx] * v.adjoint();
            base.emplace_back(double_rep(f, p).mat, phi_total(f, p).mat);
            conj.emplace_back(double_rep(fc, p).mat, phi_total(fc, p).mat);
        }
        const auto w = contraction_witness(swap);
        const auto wc = contraction_witness(conj_act);
        base.emplace_back(double_rep(w, p).mat, phi_total(w, p).mat);
        conj.emplace_back(double_rep(wc, p).mat, phi_total(wc, p).mat);

        EstimateOptions opts;
        opts.use_grid = true;
        const auto vb = isometry_verdict_pairs(base, p, 1e-3, opts);
        const auto vc = isometry_verdict_pairs(conj, p, 1e-3, opts);
        CHECK(vb.verdict == vc.verdict);
        if (p == 2.0) CHECK(vb.verdict == IsometryVerdict::isometric);
        if (p != 2.0) CHECK(vb.verdict == IsometryVerdict::strictly_contractive);
    }
}

TEST_CASE("core dimensions at the two endpoints of the chain") {
    auto endpoint_cores = [](const GroupAction& act, double p) {
        std::vector<LabeledOperator> dbasis, ibasis;
        const auto& g = act.group();
        const int n = act.degree();
        for (const auto& gamma : g.dual_of().elements())
            for (const auto& s : g.elements())
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        CMatrix a = CMatrix::Zero(n, n);
                        a(i, j) = 1.0;
                        const auto pm = DoubleCcElement::point_mass(act, gamma, s, a);
                        dbasis.push_back(double_rep(pm, p));
                        ibasis.push_back(phi_total(pm, p));
                    }
        return std::pair<std::size_t, std::size_t>(core_compute(dbasis).size(),
                                                   core_compute(ibasis).size());
    };

    // p != 2: source core has dimension core(A) = n; image core |G| * n.
    const auto [d2, i2] = endpoint_cores(z2_trivial(), 3.0);
    CHECK(d2 == 1);
    CHECK(i2 == 2);
    const auto [d4, i4] = endpoint_cores(z4_phased(), 3.0);
    CHECK(d4 == 2);
    CHECK(i4 == 8);

    // p = 2: both endpoints are C*-algebras of the same dimension.
    const auto [d2e, i2e] = endpoint_cores(z2_trivial(), 2.0);
    CHECK(d2e == 4);
    CHECK(i2e == 4);
}

TEST_CASE("chain report aggregates residuals, ranks and verdicts") {
    const GroupAction act = z3_phased();
    const ChainReport rep = chain_report(act, 3.0, 3, 2026);
    REQUIRE(rep.maps.size() == 5);
    CHECK(rep.maps[0].map_name == "phi1");
    CHECK(rep.maps[4].map_name == "phi");
    for (const auto& m : rep.maps) {
        CHECK(m.hom_residual <= 1e-9);
        CHECK(m.source_norms.size() == 4);  // 3 random + witness
        CHECK(m.image_norms.size() == 4);
    }
    CHECK(rep.equivariance_residual <= 1e-9);
    CHECK(rep.linearized_rank == 9 * 4);
    CHECK(rep.full_rank == 9 * 4);
    CHECK(rep.verdicts.verdict == IsometryVerdict::strictly_contractive);

    const ChainReport rep2 = chain_report(act, 2.0, 3, 2026);
    CHECK(rep2.verdicts.verdict == IsometryVerdict::isometric);
}
