#include "lpdl/core_algebra.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

#include "lpdl/pnorm.hpp"

namespace lpdl {

namespace {

// Spectral scale that ignores real scalar translations: the translation moves
// only the real part of the mean diagonal, so the grid below is invariant
// under a -> a + r I.
double translation_invariant_scale(const CMatrix& a) {
    const int n = static_cast<int>(a.rows());
    Cplx mu = a.trace() / static_cast<double>(n);
    CMatrix traceless = a - mu * CMatrix::Identity(n, n);
    double sigma = traceless.jacobiSvd().singularValues()(0);
    return std::max({sigma, std::abs(mu.imag()), 1e-9});
}

}  // namespace

HermitianCertificate hermitian_test(const LabeledOperator& a) {
    if (!a.square()) throw std::invalid_argument("hermitian test expects a square operator");
    HermitianCertificate cert;
    cert.element = a;
    if (a.mat.rows() == 0) {
        cert.hermitian = true;
        return cert;
    }

    const double tau = M_PI / translation_invariant_scale(a.mat);
    for (int k = 1; k <= 8; ++k) {
        cert.t_grid.push_back(tau * k / 8.0);
        cert.t_grid.push_back(-tau * k / 8.0);
    }
    for (int k = 1; k <= 12; ++k) {
        cert.t_grid.push_back(std::ldexp(tau, -k));
        cert.t_grid.push_back(-std::ldexp(tau, -k));
    }

    for (double t : cert.t_grid) {
        CMatrix e = (Cplx(0, 1) * t * a.mat).exp();
        NormEstimate est = pnorm_estimate(e, a.p);
        cert.max_exp_norm_defect = std::max(cert.max_exp_norm_defect, est.lower - 1.0);
    }
    cert.max_exp_norm_defect = std::max(cert.max_exp_norm_defect, 0.0);
    cert.hermitian = cert.max_exp_norm_defect <= kHermitianDefectTol;
    return cert;
}

std::vector<LabeledOperator> core_compute(const std::vector<LabeledOperator>& algebra_basis) {
    if (algebra_basis.empty()) throw std::invalid_argument("core: empty algebra basis");
    const LabeledOperator& first = algebra_basis.front();
    if (!first.square()) throw std::invalid_argument("core: operators must be square");
    const int n = static_cast<int>(first.mat.rows());
    const int m = static_cast<int>(algebra_basis.size());
    for (const LabeledOperator& b : algebra_basis)
        if (b.row_space != first.row_space || b.col_space != first.col_space || b.p != first.p)
            throw std::invalid_argument("core: basis operators live on different spaces");

    // The identity must lie in the span: solve the least-squares problem on
    // vectorized matrices and reject a nonzero residual.
    CMatrix stacked(n * n, m);
    for (int k = 0; k < m; ++k)
        stacked.col(k) = Eigen::Map<const CVector>(algebra_basis[k].mat.data(), n * n);
    CMatrix id_mat = CMatrix::Identity(n, n);
    CVector vec_id = Eigen::Map<const CVector>(id_mat.data(), n * n);
    Eigen::JacobiSVD<CMatrix> span_svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CVector sol = span_svd.solve(vec_id);
    if ((stacked * sol - vec_id).norm() > 1e-10 * std::sqrt(static_cast<double>(n)))
        throw std::invalid_argument("core: algebra span does not contain the identity");

    // Hermitian elements solve real-linear constraints on c = x + i y:
    //   p != 2:  sum c_k B_k is a real diagonal matrix;
    //   p  = 2:  sum c_k B_k is self-adjoint.
    const bool p_two = first.p == 2.0;
    std::vector<Eigen::VectorXd> rows;
    auto push_row = [&](const Eigen::VectorXd& r) {
        if (r.cwiseAbs().maxCoeff() > 0.0) rows.push_back(r);
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!p_two) {
                if (i == j) {
                    // Im M_ii = 0.
                    Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * m);
                    for (int k = 0; k < m; ++k) {
                        r[k] = algebra_basis[k].mat(i, i).imag();
                        r[m + k] = algebra_basis[k].mat(i, i).real();
                    }
                    push_row(r);
                } else {
                    // M_ij = 0, real and imaginary parts.
                    Eigen::VectorXd re = Eigen::VectorXd::Zero(2 * m);
                    Eigen::VectorXd im = Eigen::VectorXd::Zero(2 * m);
                    for (int k = 0; k < m; ++k) {
                        Cplx b = algebra_basis[k].mat(i, j);
                        re[k] = b.real();
                        re[m + k] = -b.imag();
                        im[k] = b.imag();
                        im[m + k] = b.real();
                    }
                    push_row(re);
                    push_row(im);
                }
            } else if (i <= j) {
                // M_ij - conj(M_ji) = 0, real and imaginary parts.
                Eigen::VectorXd re = Eigen::VectorXd::Zero(2 * m);
                Eigen::VectorXd im = Eigen::VectorXd::Zero(2 * m);
                for (int k = 0; k < m; ++k) {
                    Cplx bij = algebra_basis[k].mat(i, j);
                    Cplx bji = algebra_basis[k].mat(j, i);
                    re[k] = bij.real() - bji.real();
                    re[m + k] = -(bij.imag() - bji.imag());
                    im[k] = bij.imag() + bji.imag();
                    im[m + k] = bij.real() + bji.real();
                }
                push_row(re);
                push_row(im);
            }
        }
    }

    Eigen::MatrixXd constraints(rows.empty() ? 1 : static_cast<int>(rows.size()), 2 * m);
    if (rows.empty())
        constraints.setZero();
    else
        for (size_t r = 0; r < rows.size(); ++r) constraints.row(static_cast<int>(r)) = rows[r];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
    const auto& sing = svd.singularValues();
    double smax = sing.size() ? sing(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sing.size(); ++i)
        if (sing(i) > 1e-10 * std::max(smax, 1.0)) ++rank;

    std::vector<LabeledOperator> core;
    for (int col = rank; col < 2 * m; ++col) {
        Eigen::VectorXd v = svd.matrixV().col(col);
        CMatrix h = CMatrix::Zero(n, n);
        for (int k = 0; k < m; ++k) h += Cplx(v[k], v[m + k]) * algebra_basis[k].mat;
        double peak = h.cwiseAbs().maxCoeff();
        if (peak <= 1e-12) continue;  // kernel direction cancels inside a dependent basis
        core.emplace_back(h / peak, first.row_space, first.col_space, first.p);
    }

    // The complex span of the real solution family has dimension equal to the
    // real kernel dimension; anything else signals a numerically dependent
    // input basis we refuse to paper over.
    if (!core.empty()) {
        CMatrix flat(n * n, static_cast<int>(core.size()));
        for (size_t k = 0; k < core.size(); ++k)
            flat.col(static_cast<int>(k)) =
                Eigen::Map<const CVector>(core[k].mat.data(), n * n);
        Eigen::JacobiSVD<CMatrix> rank_svd(flat);
        const auto& fs = rank_svd.singularValues();
        int crank = 0;
        for (int i = 0; i < fs.size(); ++i)
            if (fs(i) > 1e-10 * fs(0)) ++crank;
        if (crank != static_cast<int>(core.size()))
            throw std::invalid_argument(
                "core: hermitian solutions are complex-linearly dependent; "
                "the input basis is degenerate");
    }
    return core;
}

}  // namespace lpdl
