#include <gtest/gtest.h>

#include <map>
#include <set>

#include "fflz/algebra.hpp"

using namespace fflz;

namespace {

Poly P(std::initializer_list<Elem> c) { return Poly(c); }

// Brute-force count of residues mod Q that are coprime to Q.
std::uint64_t phi_bruteforce(const Field& F, const Poly& Q) {
    const int d = Q.deg();
    const std::uint64_t n = ipow_checked(F.q(), static_cast<unsigned>(d));
    std::uint64_t c = 0;
    for (std::uint64_t r = 1; r < n; ++r) {
        const Poly f = poly_from_rank(r, static_cast<std::size_t>(d), F.q(), false);
        if (poly_gcd(F, f, Q).is_one()) ++c;
    }
    return c;
}

bool has_root(const Field& F, const Poly& f) {
    for (Elem x = 0; x < F.q(); ++x)
        if (poly_eval(F, f, x) == 0) return true;
    return false;
}

}  // namespace

TEST(Field, PrimeFieldConstruction) {
    const Field F = field_make(3, 1, std::nullopt);
    EXPECT_EQ(F.q(), 3u);
    EXPECT_EQ(F.mul(2, 2), 1u);
    EXPECT_EQ(F.inv(2), 2u);
    EXPECT_THROW(field_make(4, 1, std::nullopt), std::invalid_argument);
    EXPECT_THROW(field_make(3, 0, std::nullopt), std::invalid_argument);
}

TEST(Field, ExtensionFieldF4) {
    // T^2+T+1 has no root in F_2
    const Field F2 = Field::prime(2);
    EXPECT_FALSE(has_root(F2, P({1, 1, 1})));
    const Field F4 = field_make(2, 2, std::vector<Elem>{1, 1, 1});
    EXPECT_EQ(F4.q(), 4u);
    for (Elem a = 0; a < 4; ++a) {
        EXPECT_EQ(F4.add(a, F4.neg(a)), 0u);
        if (a) { EXPECT_EQ(F4.mul(a, F4.inv(a)), 1u); }
        for (Elem b = 0; b < 4; ++b)
            for (Elem c = 0; c < 4; ++c) EXPECT_EQ(F4.mul(a, F4.add(b, c)), F4.add(F4.mul(a, b), F4.mul(a, c)));
    }
    // X * X = X + 1 with X encoded as 2
    EXPECT_EQ(F4.mul(2, 2), 3u);
    EXPECT_THROW(field_make(2, 2, std::vector<Elem>{1, 0, 1}), std::invalid_argument);  // (T+1)^2
}

TEST(Field, ExtensionModulusSearchIsLeastIrreducible) {
    const Field F9 = field_make(3, 2, std::nullopt);
    EXPECT_EQ(F9.ext_modulus(), (std::vector<Elem>{1, 0, 1}));  // T^2+1
    const Field F8 = field_make(2, 3, std::nullopt);
    EXPECT_EQ(F8.ext_modulus(), (std::vector<Elem>{1, 1, 0, 1}));
    // every nonzero element of F_8 has order dividing 7
    for (Elem a = 1; a < 8; ++a) EXPECT_EQ(F8.pow(a, 7), 1u);
}

TEST(Poly, CanonicalFormAndDegree) {
    EXPECT_TRUE(Poly({0, 0}).is_zero());
    EXPECT_FALSE(Poly{}.degree().has_value());
    EXPECT_EQ(P({1, 0, 1}).degree(), 2);
    EXPECT_EQ(P({1, 2, 0, 0}).size(), 2u);
    EXPECT_THROW((void)Poly{}.deg(), std::domain_error);
}

TEST(Poly, TextFormat) {
    const Field F = Field::prime(5);
    EXPECT_EQ(poly_to_string(P({1, 0, 1})), "1,0,1");
    EXPECT_EQ(poly_parse(F, " 1, 0 ,1"), P({1, 0, 1}));
    EXPECT_EQ(poly_to_string(Poly{}), "0");
    EXPECT_THROW(poly_parse(F, "1,5"), std::invalid_argument);
    EXPECT_THROW(poly_parse(F, "1,,2"), std::invalid_argument);
    EXPECT_THROW(poly_parse(F, ""), std::invalid_argument);
}

TEST(Poly, DivmodRecombines) {
    const Field F = Field::prime(3);
    for (const Poly& a : enumerate_monic(F, 4)) {
        for (const Poly& b : enumerate_monic(F, 2)) {
            auto [quo, rem] = poly_divmod(F, a, b);
            EXPECT_EQ(poly_add(F, poly_mul(F, quo, b), rem), a);
            EXPECT_TRUE(rem.is_zero() || rem.deg() < 2);
        }
    }
}

TEST(Algebra, EnumerateMonic) {
    const Field F3 = Field::prime(3);
    std::vector<Poly> lin(enumerate_monic(F3, 1).begin(), enumerate_monic(F3, 1).end());
    ASSERT_EQ(lin.size(), 3u);
    EXPECT_EQ(lin[0], P({0, 1}));
    EXPECT_EQ(lin[1], P({1, 1}));
    EXPECT_EQ(lin[2], P({2, 1}));
    std::size_t n2 = 0;
    Poly prev;
    for (const Poly& f : enumerate_monic(F3, 2)) {
        if (n2) { EXPECT_LT(prev, f); }
        prev = f;
        ++n2;
    }
    EXPECT_EQ(n2, 9u);
    const Field F2 = Field::prime(2);
    std::vector<Poly> c(enumerate_monic(F2, 0).begin(), enumerate_monic(F2, 0).end());
    ASSERT_EQ(c.size(), 1u);
    EXPECT_TRUE(c[0].is_one());
    EXPECT_THROW(enumerate_monic(F2, -1), std::invalid_argument);
}

TEST(Algebra, IsIrreducibleExamples) {
    EXPECT_TRUE(is_irreducible(Field::prime(3), P({1, 0, 1})));
    EXPECT_FALSE(is_irreducible(Field::prime(5), P({1, 0, 1})));
    EXPECT_EQ(poly_mul(Field::prime(5), P({2, 1}), P({3, 1})), P({1, 0, 1}));
    EXPECT_TRUE(is_irreducible(Field::prime(2), P({1, 1, 0, 1})));
    EXPECT_THROW(is_irreducible(Field::prime(2), P({1})), std::invalid_argument);
    EXPECT_THROW(is_irreducible(Field::prime(2), Poly{}), std::invalid_argument);
}

TEST(Algebra, IsIrreducibleMatchesRootTestInLowDegree) {
    // degree 2 and 3 polynomials are irreducible iff they have no root
    for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
        const Field F = Field::prime(p);
        for (int n : {2, 3})
            for (const Poly& f : enumerate_monic(F, n)) EXPECT_EQ(is_irreducible(F, f), !has_root(F, f)) << poly_to_string(f);
    }
    const Field F4 = field_make(2, 2, std::nullopt);
    for (const Poly& f : enumerate_monic(F4, 3)) EXPECT_EQ(is_irreducible(F4, f), !has_root(F4, f));
}

TEST(Algebra, FactorizeExamples) {
    const Field F = Field::prime(3);
    EXPECT_EQ(factorize(F, P({0, 1, 1})), (std::vector<PrimePower>{{P({0, 1}), 1}, {P({1, 1}), 1}}));
    EXPECT_EQ(factorize(F, P({0, 0, 1})), (std::vector<PrimePower>{{P({0, 1}), 2}}));
    EXPECT_EQ(factorize(F, P({1, 0, 1})), (std::vector<PrimePower>{{P({1, 0, 1}), 1}}));
    EXPECT_TRUE(factorize(F, Poly::one()).empty());
    EXPECT_THROW(factorize(F, Poly{}), std::invalid_argument);
}

TEST(Algebra, FactorizeRecombinesExhaustively) {
    for (std::uint32_t p : {2u, 3u, 5u}) {
        const Field F = Field::prime(p);
        for (int n = 1; n <= (p == 5 ? 5 : 6); ++n) {
            for (const Poly& f : enumerate_monic(F, n)) {
                const auto fac = factorize(F, f);
                Poly prod = Poly::one();
                for (std::size_t i = 0; i < fac.size(); ++i) {
                    EXPECT_TRUE(fac[i].prime.is_monic());
                    EXPECT_TRUE(is_irreducible(F, fac[i].prime));
                    if (i) { EXPECT_LT(fac[i - 1].prime, fac[i].prime); }
                    prod = poly_mul(F, prod, poly_pow(F, fac[i].prime, static_cast<unsigned>(fac[i].exponent)));
                }
                ASSERT_EQ(prod, f);
                // Lambda > 0 iff exactly one distinct prime
                const int lam = von_mangoldt(F, f);
                EXPECT_EQ(lam > 0, fac.size() == 1);
                if (fac.size() == 1) { EXPECT_EQ(lam, fac[0].prime.deg()); }
            }
        }
    }
}

TEST(Algebra, VonMangoldtExamples) {
    const Field F = Field::prime(3);
    EXPECT_EQ(von_mangoldt(F, Poly::one()), 0);
    EXPECT_EQ(von_mangoldt(F, P({0, 0, 1})), 1);
    EXPECT_EQ(von_mangoldt(F, P({1, 0, 1})), 2);
    EXPECT_EQ(von_mangoldt(F, P({0, 1, 1})), 0);
    EXPECT_THROW(von_mangoldt(F, Poly{}), std::invalid_argument);
}

TEST(Algebra, VonMangoldtSumIsExactlyQToTheN) {
    for (std::uint32_t p : {2u, 3u, 5u}) {
        const Field F = Field::prime(p);
        for (int n = 1; n <= 6; ++n) {
            std::uint64_t s = 0;
            for (const Poly& f : enumerate_monic(F, n)) s += static_cast<std::uint64_t>(von_mangoldt(F, f));
            EXPECT_EQ(s, ipow_checked(p, static_cast<unsigned>(n))) << "q=" << p << " n=" << n;
        }
    }
}

TEST(Algebra, CountIrreduciblesNecklace) {
    EXPECT_EQ(count_irreducibles(2, 3), 2u);
    EXPECT_EQ(count_irreducibles(3, 2), 3u);
    EXPECT_EQ(count_irreducibles(3, 1), 3u);
    EXPECT_THROW(count_irreducibles(3, 0), std::invalid_argument);
}

TEST(Algebra, NecklaceMatchesFilteredEnumerationAndSieve) {
    for (std::uint32_t p : {2u, 3u, 5u}) {
        const Field F = Field::prime(p);
        IrreducibleTable table(F);
        for (int n = 1; n <= 6; ++n) {
            std::vector<std::uint64_t> filtered;
            for (const Poly& f : enumerate_monic(F, n))
                if (is_irreducible(F, f)) filtered.push_back(poly_rank(f, static_cast<std::size_t>(n), p));
            EXPECT_EQ(filtered.size(), count_irreducibles(p, n)) << "q=" << p << " n=" << n;
            EXPECT_EQ(table.ranks(n), filtered);
            EXPECT_EQ(table.count(n), filtered.size());
        }
    }
    const Field F4 = field_make(2, 2, std::nullopt);
    IrreducibleTable t4(F4);
    for (int n = 1; n <= 4; ++n) EXPECT_EQ(t4.count(n), count_irreducibles(4, n));
}

TEST(Algebra, EulerPhi) {
    const Field F3 = Field::prime(3);
    EXPECT_EQ(euler_phi(F3, P({1, 0, 1})), 8u);
    EXPECT_EQ(euler_phi(F3, P({0, 0, 1})), 6u);
    EXPECT_EQ(phi_bruteforce(F3, P({0, 0, 1})), 6u);
    const Field F2 = Field::prime(2);
    EXPECT_EQ(euler_phi(F2, P({0, 1, 1})), 1u);
    EXPECT_EQ(phi_bruteforce(F2, P({0, 1, 1})), 1u);
    for (std::uint32_t p : {2u, 3u})
        for (int d = 1; d <= 4; ++d)
            for (const Poly& Q : enumerate_monic(Field::prime(p), d)) EXPECT_EQ(euler_phi(Field::prime(p), Q), phi_bruteforce(Field::prime(p), Q));
    EXPECT_THROW(euler_phi(F3, P({2})), std::invalid_argument);
}
