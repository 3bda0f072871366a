#pragma once

#include <complex>
#include <string>
#include <vector>

namespace lpdl {

/// Element of a finite abelian group in coordinates, one entry per cyclic factor.
using GroupElement = std::vector<int>;

/**
 * Finite abelian group Z/n_1 x ... x Z/n_k in fixed coordinates.
 *
 * Elements are coordinate vectors reduced mod the factor orders. The
 * enumeration is lexicographic in the coordinates (first factor slowest), and
 * index_of/element_at convert between an element and its position in that
 * enumeration. The empty factor list is the trivial group of order 1.
 *
 * The dual group is identified with the same coordinate lattice through the
 * bicharacter
 *
 *     pairing(g, s) = exp(2 pi i * sum_j g_j s_j / n_j),
 *
 * so dual_of() returns a group with identical factors and the double dual
 * evaluation s(g) := g(s) is literally the same formula with the arguments
 * swapped.
 */
class FiniteAbelianGroup {
public:
    FiniteAbelianGroup() = default;
    explicit FiniteAbelianGroup(std::vector<int> factors);

    /// Parse literals like "Z4", "Z2xZ2", "Z1" ("Z1" is the trivial group).
    static FiniteAbelianGroup parse(const std::string& literal);

    const std::vector<int>& factors() const { return factors_; }
    std::string literal() const;

    /// Group order; 1 for the trivial group.
    int order() const { return order_; }

    GroupElement identity() const;
    GroupElement reduce(const GroupElement& a) const;
    GroupElement add(const GroupElement& a, const GroupElement& b) const;
    GroupElement sub(const GroupElement& a, const GroupElement& b) const;
    GroupElement neg(const GroupElement& a) const;

    int index_of(const GroupElement& a) const;
    GroupElement element_at(int index) const;
    std::vector<GroupElement> elements() const;

    /**
     * Dual pairing: g an element of the dual group (same coordinates), s an
     * element of this group. The rational angle sum_j g_j s_j / n_j is
     * accumulated exactly and reduced mod 1 before the single complex
     * exponential, so roots of unity with denominator 1, 2 or 4 come out
     * bit-exact (+1, -1, +i, -i).
     */
    std::complex<double> pairing(const GroupElement& g, const GroupElement& s) const;

    /// The dual group: same coordinate lattice under the pairing above.
    FiniteAbelianGroup dual_of() const { return *this; }

private:
    void check_coords(const GroupElement& a) const;

    std::vector<int> factors_;
    int order_ = 1;
};

/**
 * exp(2 pi i * num/den), the exact-phase primitive shared by the pairing and
 * by phased permutation actions. Reduces num/den mod 1 in integers; quarter
 * turns are returned exactly.
 */
std::complex<double> unit_root(long long num, long long den);

/**
 * Fourier transform of f: dual -> C with the normalized Haar measure on the
 * dual (total mass 1):
 *
 *     fhat(t) = (1/|dual|) * sum_g f(g) * conj(g(t)),   t in G.
 *
 * Indexing follows the group enumeration on both sides.
 */
std::vector<std::complex<double>> fourier_transform(const FiniteAbelianGroup& group,
                                                    const std::vector<std::complex<double>>& f);

/**
 * Inverse transform with counting measure on G: f(g) = sum_t v(t) g(t).
 * fourier_inverse(fourier_transform(f)) == f exactly up to rounding.
 */
std::vector<std::complex<double>> fourier_inverse(const FiniteAbelianGroup& group,
                                                  const std::vector<std::complex<double>>& v);

}  // namespace lpdl
