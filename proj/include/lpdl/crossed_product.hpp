#pragma once

#include <optional>
#include <vector>

#include "lpdl/action.hpp"
#include "lpdl/group.hpp"
#include "lpdl/labeled_operator.hpp"

namespace lpdl {

/**
 * Finitely supported A-valued coefficient function f = sum_t a_t delta_t on
 * the acting group, the dense model of the crossed product.  Coefficients are
 * stored densely in group enumeration order; the action fixes both the group
 * and the matrix degree.
 */
struct CcElement {
    GroupAction action;
    std::vector<CMatrix> coefficients;

    /// Zero element.
    explicit CcElement(GroupAction act);
    /// a * delta_t.
    static CcElement point_mass(const GroupAction& act, const GroupElement& t, CMatrix a);

    const FiniteAbelianGroup& group() const { return action.group(); }
    int degree() const { return action.degree(); }
    const CMatrix& at(const GroupElement& t) const;
    CMatrix& at(const GroupElement& t);
    double max_abs() const;
};

/// Same group, same degree, identical implementers.
bool same_algebra(const CcElement& f, const CcElement& g);

CcElement operator+(const CcElement& f, const CcElement& g);
CcElement operator-(const CcElement& f, const CcElement& g);
CcElement operator*(const Cplx& z, const CcElement& f);

/**
 * Twisted convolution (f*g)(t) = w sum_s f(s) alpha_s(g(t-s)), the product of
 * the crossed product in coefficient form.  The weight w is the Haar mass of
 * one point: 1 for the counting measure (plain crossed product), 1/|G| for
 * the normalized measure used on dual groups.
 */
CcElement twisted_convolve(const CcElement& f, const CcElement& g, double weight = 1.0);

/// Regular covariant pair: pi(a) = sum_t e_tt (x) alpha_{-t}(a) on l^p(G) (x) E.
LabeledOperator pi_rep(const CMatrix& a, const GroupAction& action, double p);

/// Left translation lambda(s) (x) I_E: delta_r |-> delta_{r+s} on the group leg.
LabeledOperator lambda_rep(const FiniteAbelianGroup& group, const GroupElement& s, double p,
                           int degree);

/// Integrated form together with the coefficient function it came from.
struct CrossedProductRep {
    LabeledOperator ambient;
    std::optional<CcElement> source;
};

/// sum_t w pi(a_t) lambda(t); an algebra homomorphism from twisted_convolve
/// with the same weight.
CrossedProductRep integrated_form(const CcElement& f, double p, double weight = 1.0);

/**
 * Coefficient read-back E_t: for f = integrated_form(sum a_s delta_s) this
 * returns a_t exactly; on arbitrary operators with [group leg, inner leg]
 * labels it is the contractive block read  E_t(f) = block(e, -t) / w.
 * Throws std::invalid_argument when the labels do not form a square
 * [|G|, inner] shape.
 */
CMatrix expectation(const LabeledOperator& f, const FiniteAbelianGroup& group,
                    const GroupElement& t, double weight = 1.0);

/// Spanning matrices pi(e_ij) lambda(t), ordered t slow, then i, then j.
std::vector<LabeledOperator> crossed_product_basis(const GroupAction& action, double p);

/**
 * Label-explicit variants used by the double crossed product, where the inner
 * space l^p(G) (x) E keeps its own two legs and the outer group is the dual.
 */
LabeledOperator integrated_form_on(const CcElement& f, double p, double weight,
                                   const IndexFactor& group_leg,
                                   const std::vector<IndexFactor>& inner_legs);

}  // namespace lpdl
