#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpdl/action.hpp"
#include "lpdl/crossed_product.hpp"
#include "lpdl/group.hpp"
#include "lpdl/labeled_operator.hpp"
#include "lpdl/pnorm.hpp"

namespace lpdl {

/**
 * Coefficient form of the double crossed product: an A-valued function
 * F(gamma, s) on dual group x group, stored gamma-major.  The base action of
 * G on A travels with the element; the dual group carries the normalized
 * (mass one) measure, so every convolution and integrated form over the
 * dual leg weighs points by 1/|G^|.
 */
struct DoubleCcElement {
    GroupAction action;          // alpha: G acting on M_n
    FiniteAbelianGroup dual;     // character group of action.group()
    std::vector<CMatrix> values; // index = gamma_index * |G| + s_index

    explicit DoubleCcElement(GroupAction act);
    static DoubleCcElement point_mass(const GroupAction& act, const GroupElement& gamma,
                                      const GroupElement& s, CMatrix a);
    /// The unit of the double algebra: |G^| delta_(trivial, e) tensor I.
    static DoubleCcElement unit(const GroupAction& act);

    const FiniteAbelianGroup& group() const { return action.group(); }
    int degree() const { return action.degree(); }
    const CMatrix& at(const GroupElement& gamma, const GroupElement& s) const;
    CMatrix& at(const GroupElement& gamma, const GroupElement& s);
    double max_abs() const;
};

DoubleCcElement operator+(const DoubleCcElement& f, const DoubleCcElement& g);
DoubleCcElement operator-(const DoubleCcElement& f, const DoubleCcElement& g);
DoubleCcElement operator*(const Cplx& z, const DoubleCcElement& f);

/// Which of the three intermediate algebras a kernel lives in.
enum class StageSpace {
    gelfand_side,      // W*_p(G, W*_p(G^, A, trivial), beta): outer G, inner G^
    multiplier_alpha,  // W*_p(G, l^inf(G) (x) A, lt (x) alpha): outer G, inner G
    multiplier_plain,  // W*_p(G, l^inf(G) (x) A, lt (x) id)
};

/**
 * A-valued kernel on (outer group) x (inner index set): the coefficient form
 * shared by the three intermediate stages of the chain.  Index layout is
 * outer-major.
 */
struct BiKernel {
    GroupAction action;  // base alpha
    StageSpace space = StageSpace::gelfand_side;
    std::vector<CMatrix> values;

    BiKernel(GroupAction act, StageSpace sp);
    const FiniteAbelianGroup& group() const { return action.group(); }
    const FiniteAbelianGroup& inner_group() const;  // G^ for stage 1, G otherwise
    int degree() const { return action.degree(); }
    const CMatrix& at(const GroupElement& outer, const GroupElement& inner) const;
    CMatrix& at(const GroupElement& outer, const GroupElement& inner);
    double max_abs() const;
};

BiKernel operator-(const BiKernel& f, const BiKernel& g);

// --- the auxiliary actions, realized as phased-permutation GroupActions ------

/// Dual action alpha^ of G^ on the crossed product matrices: Ad(V_gamma (x) I).
GroupAction dual_hat_action(const GroupAction& alpha);
/// beta of G on W*_p(G^, A, trivial): Ad(W_{-t} (x) u_t).
GroupAction beta_hat_action(const GroupAction& alpha);
/// lt (x) alpha of G on l^inf(G) (x) A inside B(l^p(G) (x) E): Ad(L_t (x) u_t).
GroupAction lt_alpha_action(const GroupAction& alpha);
/// lt (x) id: Ad(L_t (x) I).
GroupAction lt_id_action(const GroupAction& alpha);

// --- primitive operators ------------------------------------------------------

/// V_gamma (x) I_E on [G, n]: multiplication by conj(gamma(.)) on the group leg.
LabeledOperator v_gamma(const FiniteAbelianGroup& group, const GroupElement& gamma, double p,
                        int degree);
/// rho_p(s) (x) I_E on [G, n]: right translation delta_r -> delta_{r-s}.
LabeledOperator rho_rep(const FiniteAbelianGroup& group, const GroupElement& s, double p,
                        int degree);

// --- actions on elements -------------------------------------------------------

/// Dual action on coefficients: a_s -> conj(gamma(s)) a_s.
CcElement dual_action(const GroupElement& gamma, const CcElement& f);
/// Dual action on a represented element of [G, n]: (V_gamma (x) I) f (V_-gamma (x) I).
LabeledOperator dual_action_matrix(const GroupElement& gamma, const LabeledOperator& f,
                                   const FiniteAbelianGroup& group);
/// beta_t on coefficients over the dual group: g(tau) -> tau(t) alpha_t(g(tau)).
CcElement beta_action(const GroupElement& t, const CcElement& g, const GroupAction& alpha);
/// Double dual action: F(gamma, s) -> conj(gamma(t)) F(gamma, s).
DoubleCcElement double_dual_action(const GroupElement& t, const DoubleCcElement& f);
/// (Ad rho_p (x) alpha)_s on [G, n]: conjugation by rho_p(s) (x) u_s.
LabeledOperator ad_rho_tensor_alpha(const GroupElement& s, const LabeledOperator& t_op,
                                    const GroupAction& alpha);
/// ((rt (x) alpha) (x) id)_r on a stage-3 kernel: w(s, t) -> alpha_r(w(s, t+r)).
BiKernel rt_alpha_id_action(const GroupElement& r, const BiKernel& w);

// --- representations -----------------------------------------------------------

/// Double integrated form on [G^, G, n], dual-leg weight 1/|G^|.
LabeledOperator double_rep(const DoubleCcElement& f, double p);
/// Stage representations on [G, G^, n] / [G, G, n].
LabeledOperator stage_rep(const BiKernel& f, double p);
/// Twisted convolution of the double algebra (normalized dual measure).
DoubleCcElement double_convolve(const DoubleCcElement& f, const DoubleCcElement& g);
/// Twisted convolution at a given stage (inner and outer weights per stage).
BiKernel stage_convolve(const BiKernel& f, const BiKernel& g);

// --- the chain -----------------------------------------------------------------

/// Phi_1: y(t, tau) = tau(t) x(tau, t).  Isometric for every p.
BiKernel phi1(const DoubleCcElement& x);
/// Phi_2 = Gelfand transform (x) id on each outer coefficient: the A-valued
/// Fourier transform z(s, t) = (1/|G^|) sum_gamma y(s, gamma) conj(gamma(t)).
BiKernel phi2(const BiKernel& y);
/// Phi_3: w(s, t) = alpha_{-t}(z(s, t)).  Isometric for every p.
BiKernel phi3(const BiKernel& z);
/**
 * Phi_4 on the represented stage-3 element: conjugate by the exact
 * permutation V(delta_s (x) delta_t (x) xi) = delta_{s+t} (x) delta_t (x) xi,
 * verify the middle leg acts as a scalar (<= 1e-12 entrywise), and collapse
 * to [G, n].  A failed structure check throws std::runtime_error, since it
 * signals an upstream bug rather than bad user input.
 */
LabeledOperator phi4(const LabeledOperator& d, const GroupAction& alpha);

/// The composite Phi = Phi4 . Phi3 . Phi2 . Phi1 as an operator on [G, n].
LabeledOperator phi_total(const DoubleCcElement& f, double p);

/**
 * Eigenvalue list of a dual-group convolution operator on the characters
 * chi_t(gamma) = gamma(t): the Gelfand transform of PM_p(G^), equal to the
 * Fourier transform of the convolution coefficients.  Throws
 * std::invalid_argument when g fails to commute with the dual translations.
 */
std::vector<Cplx> gelfand_gamma_p(const CMatrix& g, const FiniteAbelianGroup& dual_group);

/**
 * Phi_2 on a represented stage-1 element: read outer coefficients with the
 * expectation, check each is a dual-convolution operator tensor A (throws
 * std::invalid_argument otherwise), transform, reassemble.
 */
LabeledOperator phi2_matrix(const LabeledOperator& y, const GroupAction& alpha);

// --- certification helpers -----------------------------------------------------

/**
 * The strict-contraction witness: F(gamma, s) = [s = e] c_gamma I, the lift
 * through Phi_1^{-1} of a convolution element whose Gelfand transform loses
 * norm for p != 2.  c is |G^| times a tensor product of per-factor quadratic
 * chirps; on Z/2 this is the classical (1, i) gap element.
 */
DoubleCcElement contraction_witness(const GroupAction& alpha);

/// Rank of the linearized composite over the double coefficient basis;
/// full rank |G|^2 n^2 certifies bijectivity.
int linearized_phi_rank(const GroupAction& alpha, double p);

struct EquivarianceReport {
    double composite = 0.0;  // Phi . double-dual vs (Ad rho (x) alpha) . Phi
    double claim1 = 0.0;     // through stage 3 with ((rt (x) alpha) (x) id)
    double claim2 = 0.0;     // Phi_4 intertwines the two right-hand actions
    double max_residual() const { return std::max({composite, claim1, claim2}); }
};

/// Entrywise residuals of the equivariance identities over the test set.
EquivarianceReport equivariance_check(const GroupAction& alpha, double p,
                                      const std::vector<DoubleCcElement>& tests);

// --- reporting -----------------------------------------------------------------

struct MapRecord {
    std::string map_name;
    double hom_residual = 0.0;
    // Per test element: source and image certified bounds.
    std::vector<NormEstimate> source_norms;
    std::vector<NormEstimate> image_norms;
};

struct ChainReport {
    double p = 2.0;
    std::vector<MapRecord> maps;  // phi1, phi2, phi3, phi4, phi
    double equivariance_residual = 0.0;
    int linearized_rank = 0;
    int full_rank = 0;
    VerdictReport verdicts;  // composite source vs image, per test element
};

/// Runs the whole chain on `tests` random double elements plus the
/// contraction witness, collecting certified norms, residuals and verdicts.
ChainReport chain_report(const GroupAction& alpha, double p, int tests, std::uint64_t seed);

}  // namespace lpdl
