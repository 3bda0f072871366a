#include "lpdl/group.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lpdl {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> factors) : factors_(std::move(factors)) {
    order_ = 1;
    for (int n : factors_) {
        if (n < 1) throw std::invalid_argument("group factor must be a positive integer");
        order_ *= n;
    }
}

FiniteAbelianGroup FiniteAbelianGroup::parse(const std::string& literal) {
    std::vector<int> factors;
    std::size_t pos = 0;
    while (pos < literal.size()) {
        if (literal[pos] != 'Z')
            throw std::invalid_argument("bad group literal '" + literal + "': expected 'Z<order>'");
        ++pos;
        std::size_t start = pos;
        while (pos < literal.size() && std::isdigit(static_cast<unsigned char>(literal[pos]))) ++pos;
        if (start == pos)
            throw std::invalid_argument("bad group literal '" + literal + "': missing order");
        int n = std::stoi(literal.substr(start, pos - start));
        if (n < 1) throw std::invalid_argument("bad group literal '" + literal + "': order must be >= 1");
        if (n > 1) factors.push_back(n);  // Z1 factors contribute nothing
        if (pos < literal.size()) {
            if (literal[pos] != 'x')
                throw std::invalid_argument("bad group literal '" + literal + "': expected 'x'");
            ++pos;
            if (pos == literal.size())
                throw std::invalid_argument("bad group literal '" + literal + "': trailing 'x'");
        }
    }
    if (literal.empty()) throw std::invalid_argument("empty group literal");
    return FiniteAbelianGroup(std::move(factors));
}

std::string FiniteAbelianGroup::literal() const {
    if (factors_.empty()) return "Z1";
    std::string out;
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        if (j) out += 'x';
        out += 'Z';
        out += std::to_string(factors_[j]);
    }
    return out;
}

GroupElement FiniteAbelianGroup::identity() const {
    return GroupElement(factors_.size(), 0);
}

void FiniteAbelianGroup::check_coords(const GroupElement& a) const {
    if (a.size() != factors_.size())
        throw std::invalid_argument("group element has wrong number of coordinates");
}

GroupElement FiniteAbelianGroup::reduce(const GroupElement& a) const {
    check_coords(a);
    GroupElement r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        int m = a[j] % factors_[j];
        r[j] = m < 0 ? m + factors_[j] : m;
    }
    return r;
}

GroupElement FiniteAbelianGroup::add(const GroupElement& a, const GroupElement& b) const {
    check_coords(a);
    check_coords(b);
    GroupElement r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = (a[j] + b[j]) % factors_[j];
    return reduce(r);
}

GroupElement FiniteAbelianGroup::sub(const GroupElement& a, const GroupElement& b) const {
    check_coords(a);
    check_coords(b);
    GroupElement r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] - b[j];
    return reduce(r);
}

GroupElement FiniteAbelianGroup::neg(const GroupElement& a) const {
    check_coords(a);
    GroupElement r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = -a[j];
    return reduce(r);
}

int FiniteAbelianGroup::index_of(const GroupElement& a) const {
    GroupElement r = reduce(a);
    int idx = 0;
    for (std::size_t j = 0; j < r.size(); ++j) idx = idx * factors_[j] + r[j];
    return idx;
}

GroupElement FiniteAbelianGroup::element_at(int index) const {
    if (index < 0 || index >= order_) throw std::out_of_range("group element index out of range");
    GroupElement r(factors_.size(), 0);
    for (std::size_t j = factors_.size(); j-- > 0;) {
        r[j] = index % factors_[j];
        index /= factors_[j];
    }
    return r;
}

std::vector<GroupElement> FiniteAbelianGroup::elements() const {
    std::vector<GroupElement> out;
    out.reserve(order_);
    for (int i = 0; i < order_; ++i) out.push_back(element_at(i));
    return out;
}

std::complex<double> unit_root(long long num, long long den) {
    if (den == 0) throw std::invalid_argument("unit_root: zero denominator");
    if (den < 0) {
        den = -den;
        num = -num;
    }
    num %= den;
    if (num < 0) num += den;
    long long g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    // Quarter turns exactly; everything else through one cos/sin pair.
    if (num == 0) return {1.0, 0.0};
    if (den == 2) return {-1.0, 0.0};
    if (den == 4) return num == 1 ? std::complex<double>(0.0, 1.0) : std::complex<double>(0.0, -1.0);
    double angle = kTwoPi * static_cast<double>(num) / static_cast<double>(den);
    return {std::cos(angle), std::sin(angle)};
}

std::complex<double> FiniteAbelianGroup::pairing(const GroupElement& g, const GroupElement& s) const {
    check_coords(g);
    check_coords(s);
    // Accumulate sum_j g_j s_j / n_j as an exact rational mod 1.
    long long num = 0, den = 1;
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        long long nj = factors_[j];
        long long term = (static_cast<long long>(g[j]) % nj) * (static_cast<long long>(s[j]) % nj) % nj;
        long long l = std::lcm(den, nj);
        num = num * (l / den) + term * (l / nj);
        den = l;
        num %= den;
    }
    return unit_root(num, den);
}

std::vector<std::complex<double>> fourier_transform(const FiniteAbelianGroup& group,
                                                    const std::vector<std::complex<double>>& f) {
    const int m = group.order();
    if (static_cast<int>(f.size()) != m)
        throw std::invalid_argument("fourier_transform: value count does not match group order");
    std::vector<std::complex<double>> out(m);
    const auto els = group.elements();
    for (int ti = 0; ti < m; ++ti) {
        std::complex<double> acc = 0.0;
        for (int gi = 0; gi < m; ++gi) acc += f[gi] * std::conj(group.pairing(els[gi], els[ti]));
        out[ti] = acc / static_cast<double>(m);
    }
    return out;
}

std::vector<std::complex<double>> fourier_inverse(const FiniteAbelianGroup& group,
                                                  const std::vector<std::complex<double>>& v) {
    const int m = group.order();
    if (static_cast<int>(v.size()) != m)
        throw std::invalid_argument("fourier_inverse: value count does not match group order");
    std::vector<std::complex<double>> out(m);
    const auto els = group.elements();
    for (int gi = 0; gi < m; ++gi) {
        std::complex<double> acc = 0.0;
        for (int ti = 0; ti < m; ++ti) acc += v[ti] * group.pairing(els[gi], els[ti]);
        out[gi] = acc;
    }
    return out;
}

}  // namespace lpdl
