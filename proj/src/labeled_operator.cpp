#include "lpdl/labeled_operator.hpp"

#include <stdexcept>

namespace lpdl {

int factor_dim(const std::vector<IndexFactor>& factors) {
    int d = 1;
    for (const auto& f : factors) {
        if (f.size < 1) throw std::invalid_argument("index factor size must be positive");
        d *= f.size;
    }
    return d;
}

std::string factor_string(const std::vector<IndexFactor>& factors) {
    std::string out = "[";
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += ",";
        out += factors[i].name + ":" + std::to_string(factors[i].size);
    }
    return out + "]";
}

LabeledOperator::LabeledOperator(CMatrix m, std::vector<IndexFactor> rows,
                                 std::vector<IndexFactor> cols, double p_exp)
    : mat(std::move(m)), row_space(std::move(rows)), col_space(std::move(cols)), p(p_exp) {
    if (mat.rows() != factor_dim(row_space) || mat.cols() != factor_dim(col_space))
        throw std::invalid_argument("labeled operator shape " + std::to_string(mat.rows()) + "x" +
                                    std::to_string(mat.cols()) + " does not match labels " +
                                    factor_string(row_space) + "x" + factor_string(col_space));
}

LabeledOperator LabeledOperator::identity(const std::vector<IndexFactor>& factors, double p_exp) {
    int d = factor_dim(factors);
    return LabeledOperator(CMatrix::Identity(d, d), factors, factors, p_exp);
}

LabeledOperator compose(const LabeledOperator& a, const LabeledOperator& b) {
    if (a.col_space != b.row_space)
        throw std::invalid_argument("compose: column space " + factor_string(a.col_space) +
                                    " does not match row space " + factor_string(b.row_space));
    if (a.p != b.p) throw std::invalid_argument("compose: mismatched p exponents");
    return LabeledOperator(a.mat * b.mat, a.row_space, b.col_space, a.p);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

LabeledOperator kron(const LabeledOperator& a, const LabeledOperator& b) {
    if (a.p != b.p) throw std::invalid_argument("kron: mismatched p exponents");
    std::vector<IndexFactor> rows = a.row_space;
    rows.insert(rows.end(), b.row_space.begin(), b.row_space.end());
    std::vector<IndexFactor> cols = a.col_space;
    cols.insert(cols.end(), b.col_space.begin(), b.col_space.end());
    return LabeledOperator(kron(a.mat, b.mat), std::move(rows), std::move(cols), a.p);
}

LabeledOperator multiplication_operator(
    const std::vector<IndexFactor>& factors,
    const std::function<std::complex<double>(const std::vector<int>&)>& symbol, double p_exp) {
    const int d = factor_dim(factors);
    CMatrix mat = CMatrix::Zero(d, d);
    std::vector<int> idx(factors.size(), 0);
    for (int flat = 0; flat < d; ++flat) {
        int rem = flat;
        for (int k = static_cast<int>(factors.size()) - 1; k >= 0; --k) {
            idx[k] = rem % factors[k].size;
            rem /= factors[k].size;
        }
        mat(flat, flat) = symbol(idx);
    }
    return LabeledOperator(std::move(mat), factors, factors, p_exp);
}

}  // namespace lpdl
