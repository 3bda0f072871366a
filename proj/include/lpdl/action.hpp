#pragma once

#include <string>
#include <vector>

#include "lpdl/group.hpp"
#include "lpdl/labeled_operator.hpp"

namespace lpdl {

/**
 * Action of a finite abelian group on the matrix algebra M_n, realized by
 * conjugation with phased permutation matrices: alpha_t(a) = u_t a u_t^{-1}.
 * For p != 2 these conjugations exhaust the isometric automorphisms of the
 * p-operator structure on M_n, and they are isometric at every matrix level.
 *
 * One implementer v_j is supplied per cyclic factor of the group and
 * u_t = prod_j v_j^{t_j}.  Construction verifies that the recipe actually
 * defines an action: each v_j^{n_j} must be scalar, and the conjugations by
 * distinct generators must commute (their commutator must be scalar).  The
 * identities u_e = I and Ad u_{s+t} = Ad u_s . Ad u_t then hold exactly.
 *
 * Literal grammar (CLI and config files):
 *   "trivial"
 *   "perm:SEG[;SEG...]"     one segment per group factor, SEG = cycles like
 *                           "(0 1)" or "(0 1)(2 3)"; "()" is the identity
 *   "phased:SEG[;SEG...]"   SEG = cycles with an optional phase list
 *                           "(0 1)@0,1/2" — entry k of the list is the phase
 *                           of output coordinate k as a rational multiple of
 *                           a full turn, so u = diag(e^{2 pi i r_k}) * P
 */
class GroupAction {
public:
    /// The trivial action (every u_t the identity).
    GroupAction(FiniteAbelianGroup group, int degree);

    /// One phased-permutation generator per group factor.
    GroupAction(FiniteAbelianGroup group, int degree, std::vector<CMatrix> generators);

    static GroupAction parse(const FiniteAbelianGroup& group, int degree,
                             const std::string& literal);

    const FiniteAbelianGroup& group() const { return group_; }
    int degree() const { return degree_; }
    /// True when every alpha_t is the identity map (all generators scalar).
    bool is_trivial() const { return trivial_; }
    /// Round-trips through parse(); "trivial" for the trivial constructor.
    const std::string& literal() const { return literal_; }

    /// The implementer u_t.
    const CMatrix& implementer(const GroupElement& t) const;
    /// alpha_t(a) = u_t a u_t^{-1}.
    CMatrix apply(const GroupElement& t, const CMatrix& a) const;
    /// alpha_t^{-1}(a) = alpha_{-t}(a) = u_t^{-1} a u_t.
    CMatrix apply_inverse(const GroupElement& t, const CMatrix& a) const;

private:
    void finish_construction();

    FiniteAbelianGroup group_;
    int degree_ = 1;
    std::vector<CMatrix> generators_;
    std::vector<CMatrix> implementers_;  // indexed by group_.index_of
    bool trivial_ = true;
    std::string literal_;
};

}  // namespace lpdl
