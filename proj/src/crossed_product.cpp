#include "lpdl/crossed_product.hpp"

#include <stdexcept>
#include <string>

namespace lpdl {

CcElement::CcElement(GroupAction act) : action(std::move(act)) {
    coefficients.assign(action.group().order(),
                        CMatrix::Zero(action.degree(), action.degree()));
}

CcElement CcElement::point_mass(const GroupAction& act, const GroupElement& t, CMatrix a) {
    if (a.rows() != act.degree() || a.cols() != act.degree())
        throw std::invalid_argument("point mass coefficient has wrong degree");
    CcElement f(act);
    f.at(t) = std::move(a);
    return f;
}

const CMatrix& CcElement::at(const GroupElement& t) const {
    return coefficients[group().index_of(t)];
}

CMatrix& CcElement::at(const GroupElement& t) { return coefficients[group().index_of(t)]; }

double CcElement::max_abs() const {
    double m = 0.0;
    for (const CMatrix& a : coefficients) m = std::max(m, a.cwiseAbs().maxCoeff());
    return m;
}

bool same_algebra(const CcElement& f, const CcElement& g) {
    if (f.group().literal() != g.group().literal() || f.degree() != g.degree()) return false;
    for (const GroupElement& t : f.group().elements())
        if ((f.action.implementer(t) - g.action.implementer(t)).cwiseAbs().maxCoeff() > 0.0)
            return false;
    return true;
}

namespace {

void require_same_algebra(const CcElement& f, const CcElement& g, const char* what) {
    if (!same_algebra(f, g))
        throw std::invalid_argument(std::string(what) +
                                    ": operands live over different groups or actions");
}

}  // namespace

CcElement operator+(const CcElement& f, const CcElement& g) {
    require_same_algebra(f, g, "add");
    CcElement out = f;
    for (size_t k = 0; k < out.coefficients.size(); ++k) out.coefficients[k] += g.coefficients[k];
    return out;
}

CcElement operator-(const CcElement& f, const CcElement& g) {
    require_same_algebra(f, g, "subtract");
    CcElement out = f;
    for (size_t k = 0; k < out.coefficients.size(); ++k) out.coefficients[k] -= g.coefficients[k];
    return out;
}

CcElement operator*(const Cplx& z, const CcElement& f) {
    CcElement out = f;
    for (CMatrix& a : out.coefficients) a *= z;
    return out;
}

CcElement twisted_convolve(const CcElement& f, const CcElement& g, double weight) {
    require_same_algebra(f, g, "twisted convolution");
    const FiniteAbelianGroup& grp = f.group();
    CcElement out(f.action);
    for (const GroupElement& t : grp.elements()) {
        CMatrix acc = CMatrix::Zero(f.degree(), f.degree());
        for (const GroupElement& s : grp.elements())
            acc += f.at(s) * f.action.apply(s, g.at(grp.sub(t, s)));
        out.at(t) = weight * acc;
    }
    return out;
}

LabeledOperator pi_rep(const CMatrix& a, const GroupAction& action, double p) {
    const int n = action.degree();
    if (a.rows() != n || a.cols() != n)
        throw std::invalid_argument("pi: matrix degree does not match the action");
    const int m = action.group().order();
    CMatrix mat = CMatrix::Zero(m * n, m * n);
    for (const GroupElement& t : action.group().elements()) {
        int idx = action.group().index_of(t);
        mat.block(idx * n, idx * n, n, n) = action.apply_inverse(t, a);
    }
    std::vector<IndexFactor> legs{{"G", m}, {"n", n}};
    return LabeledOperator(std::move(mat), legs, legs, p);
}

LabeledOperator lambda_rep(const FiniteAbelianGroup& group, const GroupElement& s, double p,
                           int degree) {
    const int m = group.order();
    CMatrix mat = CMatrix::Zero(m * degree, m * degree);
    for (const GroupElement& r : group.elements()) {
        int from = group.index_of(r);
        int to = group.index_of(group.add(r, s));
        mat.block(to * degree, from * degree, degree, degree) =
            CMatrix::Identity(degree, degree);
    }
    std::vector<IndexFactor> legs{{"G", m}, {"n", degree}};
    return LabeledOperator(std::move(mat), legs, legs, p);
}

LabeledOperator integrated_form_on(const CcElement& f, double p, double weight,
                                   const IndexFactor& group_leg,
                                   const std::vector<IndexFactor>& inner_legs) {
    const FiniteAbelianGroup& grp = f.group();
    const int m = grp.order();
    const int n = f.degree();
    if (group_leg.size != m || factor_dim(inner_legs) != n)
        throw std::invalid_argument("integrated form: legs do not match group order and degree");

    // Block (r, r') of sum_t w pi(a_t) lambda(t) is w alpha_{-r}(a_{r-r'}).
    CMatrix mat = CMatrix::Zero(m * n, m * n);
    for (const GroupElement& r : grp.elements())
        for (const GroupElement& rp : grp.elements()) {
            const CMatrix& a = f.at(grp.sub(r, rp));
            mat.block(grp.index_of(r) * n, grp.index_of(rp) * n, n, n) =
                weight * f.action.apply_inverse(r, a);
        }
    std::vector<IndexFactor> legs{group_leg};
    legs.insert(legs.end(), inner_legs.begin(), inner_legs.end());
    return LabeledOperator(std::move(mat), legs, legs, p);
}

CrossedProductRep integrated_form(const CcElement& f, double p, double weight) {
    LabeledOperator amb = integrated_form_on(f, p, weight, {"G", f.group().order()},
                                             {{"n", f.degree()}});
    return CrossedProductRep{std::move(amb), f};
}

CMatrix expectation(const LabeledOperator& f, const FiniteAbelianGroup& group,
                    const GroupElement& t, double weight) {
    const int m = group.order();
    if (!f.square() || f.row_space != f.col_space || f.row_space.empty() ||
        f.row_space.front().size != m)
        throw std::invalid_argument("expectation: operator labels do not start with a " +
                                    std::to_string(m) + "-point group leg");
    const int n = static_cast<int>(f.mat.rows()) / m;
    int col = group.index_of(group.neg(t));
    return f.mat.block(0, col * n, n, n) / weight;
}

std::vector<LabeledOperator> crossed_product_basis(const GroupAction& action, double p) {
    const int n = action.degree();
    std::vector<LabeledOperator> basis;
    basis.reserve(action.group().order() * n * n);
    for (const GroupElement& t : action.group().elements()) {
        LabeledOperator lam = lambda_rep(action.group(), t, p, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                CMatrix e = CMatrix::Zero(n, n);
                e(i, j) = 1.0;
                basis.push_back(compose(pi_rep(e, action, p), lam));
            }
    }
    return basis;
}

}  // namespace lpdl
