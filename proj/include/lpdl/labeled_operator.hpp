#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace lpdl {

using Cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// One tensor leg of an index space, e.g. {"G", 4} or {"n", 2}.
struct IndexFactor {
    std::string name;
    int size = 1;

    friend bool operator==(const IndexFactor& a, const IndexFactor& b) {
        return a.name == b.name && a.size == b.size;
    }
};

int factor_dim(const std::vector<IndexFactor>& factors);
std::string factor_string(const std::vector<IndexFactor>& factors);

/**
 * Dense operator between l^p spaces whose coordinates carry tensor-leg labels.
 * Rows and columns are enumerated with the leftmost factor slowest, matching
 * kron(): (A kron B)[(i,k),(j,l)] = A(i,j) B(k,l).
 *
 * Label mismatches in compose() are structural bugs in the caller, so they
 * throw rather than being silently reconciled.
 */
struct LabeledOperator {
    CMatrix mat;
    std::vector<IndexFactor> row_space;
    std::vector<IndexFactor> col_space;
    double p = 2.0;

    LabeledOperator() = default;
    LabeledOperator(CMatrix m, std::vector<IndexFactor> rows, std::vector<IndexFactor> cols,
                    double p_exp);

    bool square() const { return mat.rows() == mat.cols(); }

    static LabeledOperator identity(const std::vector<IndexFactor>& factors, double p_exp);
};

/// Matrix product with label verification: a.col_space must equal b.row_space.
LabeledOperator compose(const LabeledOperator& a, const LabeledOperator& b);

/// Kronecker product, left factor slowest; labels concatenate.
LabeledOperator kron(const LabeledOperator& a, const LabeledOperator& b);

/// Raw Kronecker product on matrices, same ordering convention.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/**
 * Diagonal operator of pointwise multiplication by `symbol`, evaluated on the
 * multi-index of `factors` (one entry per tensor leg, each in [0, size)).
 * Its p -> p norm is max |symbol| for every p.
 */
LabeledOperator multiplication_operator(const std::vector<IndexFactor>& factors,
                                        const std::function<std::complex<double>(const std::vector<int>&)>& symbol,
                                        double p_exp);

}  // namespace lpdl
