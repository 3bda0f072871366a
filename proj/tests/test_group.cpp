#include "lpdl/group.hpp"

#include <complex>

#include "doctest.h"
#include "lpdl/rng.hpp"

using lpdl::FiniteAbelianGroup;
using lpdl::GroupElement;
using Cplx = std::complex<double>;

TEST_CASE("group literals parse and print") {
    CHECK(FiniteAbelianGroup::parse("Z4").factors() == std::vector<int>{4});
    CHECK(FiniteAbelianGroup::parse("Z2xZ2").factors() == std::vector<int>{2, 2});
    CHECK(FiniteAbelianGroup::parse("Z2xZ3").order() == 6);
    CHECK(FiniteAbelianGroup::parse("Z1").order() == 1);
    CHECK(FiniteAbelianGroup::parse("Z1").factors().empty());
    CHECK(FiniteAbelianGroup::parse("Z2xZ2").literal() == "Z2xZ2");
    CHECK(FiniteAbelianGroup::parse("Z1").literal() == "Z1");
    CHECK_THROWS_AS(FiniteAbelianGroup::parse("Q8"), std::invalid_argument);
    CHECK_THROWS_AS(FiniteAbelianGroup::parse("Z2x"), std::invalid_argument);
    CHECK_THROWS_AS(FiniteAbelianGroup::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(FiniteAbelianGroup::parse("Z0"), std::invalid_argument);
}

TEST_CASE("enumeration is lexicographic with the first factor slowest") {
    FiniteAbelianGroup g({2, 3});
    CHECK(g.element_at(0) == GroupElement{0, 0});
    CHECK(g.element_at(1) == GroupElement{0, 1});
    CHECK(g.element_at(2) == GroupElement{0, 2});
    CHECK(g.element_at(3) == GroupElement{1, 0});
    CHECK(g.element_at(5) == GroupElement{1, 2});
    for (int i = 0; i < g.order(); ++i) CHECK(g.index_of(g.element_at(i)) == i);
    CHECK(g.index_of(GroupElement{3, -2}) == g.index_of(GroupElement{1, 1}));
}

TEST_CASE("arithmetic wraps mod the factor orders") {
    FiniteAbelianGroup g({4});
    CHECK(g.add({3}, {2}) == GroupElement{1});
    CHECK(g.sub({0}, {1}) == GroupElement{3});
    CHECK(g.neg({3}) == GroupElement{1});
    CHECK(g.identity() == GroupElement{0});

    FiniteAbelianGroup t(std::vector<int>{});
    CHECK(t.add({}, {}) == GroupElement{});
    CHECK(t.order() == 1);
}

TEST_CASE("unit_root returns quarter turns bit-exactly") {
    CHECK(lpdl::unit_root(0, 1) == Cplx(1.0, 0.0));
    CHECK(lpdl::unit_root(1, 2) == Cplx(-1.0, 0.0));
    CHECK(lpdl::unit_root(1, 4) == Cplx(0.0, 1.0));
    CHECK(lpdl::unit_root(3, 4) == Cplx(0.0, -1.0));
    CHECK(lpdl::unit_root(5, 4) == Cplx(0.0, 1.0));    // reduced mod 1
    CHECK(lpdl::unit_root(-1, 4) == Cplx(0.0, -1.0));  // negative numerators wrap
    CHECK(lpdl::unit_root(2, 8) == Cplx(0.0, 1.0));    // gcd reduction
    CHECK(lpdl::unit_root(1, 3).real() == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(lpdl::unit_root(1, 3).imag() == doctest::Approx(0.8660254037844386).epsilon(1e-15));
}

TEST_CASE("pairing values on small groups, frozen by hand") {
    FiniteAbelianGroup z4({4});
    // exp(2 pi i * g*s/4) for g=s=1 is i; g=2,s=1 is -1; g=1,s=3 is -i.
    CHECK(z4.pairing({1}, {1}) == Cplx(0.0, 1.0));
    CHECK(z4.pairing({2}, {1}) == Cplx(-1.0, 0.0));
    CHECK(z4.pairing({1}, {3}) == Cplx(0.0, -1.0));
    CHECK(z4.pairing({0}, {3}) == Cplx(1.0, 0.0));

    FiniteAbelianGroup z22({2, 2});
    // Factors pair independently: (1,0) against (0,1) sees no overlap.
    CHECK(z22.pairing({1, 0}, {0, 1}) == Cplx(1.0, 0.0));
    CHECK(z22.pairing({1, 0}, {1, 0}) == Cplx(-1.0, 0.0));
    // (1,1) against (1,1): 1/2 + 1/2 = 1 turn, back to 1.
    CHECK(z22.pairing({1, 1}, {1, 1}) == Cplx(1.0, 0.0));

    FiniteAbelianGroup z1(std::vector<int>{});
    CHECK(z1.pairing({}, {}) == Cplx(1.0, 0.0));
}

TEST_CASE("pairing is a unimodular bicharacter") {
    lpdl::Rng rng(11);
    for (const char* lit : {"Z2", "Z3", "Z4", "Z2xZ2", "Z2xZ3"}) {
        FiniteAbelianGroup g = FiniteAbelianGroup::parse(lit);
        auto els = g.elements();
        for (int rep = 0; rep < 20; ++rep) {
            auto ga = els[rng.uniform_index(els.size())];
            auto s1 = els[rng.uniform_index(els.size())];
            auto s2 = els[rng.uniform_index(els.size())];
            CHECK(std::abs(std::abs(g.pairing(ga, s1)) - 1.0) < 1e-15);
            Cplx lhs = g.pairing(ga, g.add(s1, s2));
            Cplx rhs = g.pairing(ga, s1) * g.pairing(ga, s2);
            CHECK(std::abs(lhs - rhs) < 1e-14);
            // Symmetric in the two slots: double-dual evaluation is the same formula.
            CHECK(std::abs(g.pairing(ga, s1) - g.pairing(s1, ga)) < 1e-15);
        }
    }
}

TEST_CASE("two-point Fourier transform, frozen by hand") {
    // On Z/2 with f = (2, 0) on the dual: fhat(t) = (f(g0) + f(g1)*conj(g1(t)))/2,
    // so fhat(0) = 1 and fhat(1) = 1.
    FiniteAbelianGroup z2({2});
    auto fhat = lpdl::fourier_transform(z2, {Cplx(2, 0), Cplx(0, 0)});
    CHECK(std::abs(fhat[0] - Cplx(1, 0)) < 1e-15);
    CHECK(std::abs(fhat[1] - Cplx(1, 0)) < 1e-15);

    // f = (0, 2) picks up the sign of the nontrivial character: fhat = (1, -1).
    auto ghat = lpdl::fourier_transform(z2, {Cplx(0, 0), Cplx(2, 0)});
    CHECK(std::abs(ghat[0] - Cplx(1, 0)) < 1e-15);
    CHECK(std::abs(ghat[1] - Cplx(-1, 0)) < 1e-15);
}

TEST_CASE("character evaluations transform to point masses") {
    for (const char* lit : {"Z3", "Z4", "Z2xZ2", "Z1"}) {
        FiniteAbelianGroup g = FiniteAbelianGroup::parse(lit);
        auto els = g.elements();
        for (int t0 = 0; t0 < g.order(); ++t0) {
            std::vector<Cplx> f(g.order());
            for (int gi = 0; gi < g.order(); ++gi) f[gi] = g.pairing(els[gi], els[t0]);
            auto fhat = lpdl::fourier_transform(g, f);
            for (int t = 0; t < g.order(); ++t) {
                CHECK(std::abs(fhat[t] - (t == t0 ? Cplx(1, 0) : Cplx(0, 0))) < 1e-14);
            }
        }
    }
}

TEST_CASE("Fourier inversion and Plancherel") {
    lpdl::Rng rng = lpdl::Rng::stream(7, "group-fourier");
    for (const char* lit : {"Z2", "Z3", "Z4", "Z2xZ2", "Z2xZ3", "Z1"}) {
        FiniteAbelianGroup g = FiniteAbelianGroup::parse(lit);
        std::vector<Cplx> f(g.order());
        for (auto& v : f) v = rng.cgaussian();
        auto fhat = lpdl::fourier_transform(g, f);
        auto back = lpdl::fourier_inverse(g, fhat);
        double l2_dual = 0.0, l2_side = 0.0, maxdiff = 0.0;
        for (int i = 0; i < g.order(); ++i) {
            maxdiff = std::max(maxdiff, std::abs(back[i] - f[i]));
            l2_dual += std::norm(f[i]) / g.order();
        }
        for (int i = 0; i < g.order(); ++i) l2_side += std::norm(fhat[i]);
        CHECK(maxdiff < 1e-12);
        // Plancherel with mass-1 Haar on the dual and counting measure on G.
        CHECK(std::abs(l2_dual - l2_side) < 1e-12);
    }
}
