#pragma once

#include <vector>

#include "lpdl/labeled_operator.hpp"

namespace lpdl {

/// Hermitian declaration threshold on the exponential-isometry defect.
inline constexpr double kHermitianDefectTol = 1e-7;

/**
 * Outcome of the exponential-isometry (Vidav) test: a is hermitian exactly
 * when every exp(i t a) is an isometry of l^p.  The defect is the largest
 * certified excess of ||exp(i t a)||_p over 1 on the sampled grid; `hermitian`
 * records whether it stayed at or below kHermitianDefectTol.
 */
struct HermitianCertificate {
    LabeledOperator element;
    std::vector<double> t_grid;
    double max_exp_norm_defect = 0.0;
    bool hermitian = false;
};

/**
 * Samples t over a coarse grid {+-k tau/8 : k=1..8} together with a dyadic
 * refinement {+-2^{-k} tau : k<=12}, where tau = pi normalized by the spectral
 * scale of the translation-invariant part of a (so a and a + r I for real r
 * get identical grids and defects).  Norms are the certified lower bounds of
 * the p-norm engine, which are exact on the diagonal and p=2 cases that carry
 * all hermitian structure here.
 */
HermitianCertificate hermitian_test(const LabeledOperator& a);

/**
 * Basis of the norm-closed involutive heart of the unital algebra spanned by
 * `algebra_basis` inside B(l^p): the span of its hermitian elements plus i
 * times them.  For an ambient exponent p != 2 the hermitian elements are the
 * real-diagonal members of the span; for p = 2 they are the self-adjoint
 * ones.  Both are linear conditions, solved by an SVD kernel over the real
 * coefficient space.
 *
 * Pre: the operators span a unital subalgebra (product closure is the
 * caller's responsibility and is property-tested on the output).  Throws
 * std::invalid_argument when the identity is not in the span, when the basis
 * is empty, or when labels/exponents disagree.
 */
std::vector<LabeledOperator> core_compute(const std::vector<LabeledOperator>& algebra_basis);

}  // namespace lpdl
