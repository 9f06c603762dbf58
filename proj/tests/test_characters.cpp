#include <gtest/gtest.h>

#include <random>

#include "fflz/characters.hpp"

using namespace fflz;

namespace {

Poly P(std::initializer_list<Elem> c) { return Poly(c); }

UnitGroupTable table_for(std::uint32_t q, std::initializer_list<Elem> Q) {
    const Field F = Field::prime(q);
    return UnitGroupTable(F, make_modulus(F, P(Q)));
}

}  // namespace

TEST(Characters, ModulusValidation) {
    const Field F5 = Field::prime(5);
    EXPECT_THROW(make_modulus(F5, P({1, 0, 1})), std::invalid_argument);  // (T+2)(T+3)
    EXPECT_THROW(make_modulus(F5, P({1, 1})), std::invalid_argument);     // degree 1
    EXPECT_THROW(make_modulus(F5, P({1, 0, 2})), std::invalid_argument);  // not monic
    EXPECT_EQ(make_modulus(Field::prime(3), P({1, 0, 1})).group_order, 8u);
}

TEST(Characters, LeastGeneratorQ3) {
    const auto t = table_for(3, {1, 0, 1});
    EXPECT_EQ(t.order(), 8u);
    EXPECT_EQ(t.generator(), P({1, 1}));
    // T has order 4, so it cannot generate
    const Field F = Field::prime(3);
    EXPECT_TRUE(poly_powmod(F, P({0, 1}), 4, P({1, 0, 1})).is_one());
    EXPECT_EQ(poly_powmod(F, P({1, 1}), 4, P({1, 0, 1})), P({2}));
    EXPECT_EQ(t.dlog(Poly::one()), 0);
}

TEST(Characters, PrimeOrderGroupAnyElementGenerates) {
    const auto t = table_for(2, {1, 1, 0, 1});
    EXPECT_EQ(t.order(), 7u);
    EXPECT_EQ(t.generator(), P({0, 1}));
}

TEST(Characters, DlogIsBijection) {
    const auto t = table_for(3, {1, 2, 0, 1});
    std::vector<int> hit(t.order(), 0);
    for (std::uint64_t r = 1; r <= t.order(); ++r) ++hit[static_cast<std::size_t>(t.dlog(r))];
    for (int h : hit) EXPECT_EQ(h, 1);
    EXPECT_EQ(t.dlog(std::uint64_t{0}), -1);
}

TEST(Characters, FamilyAndParityCounts) {
    for (std::uint32_t q : {2u, 3u, 5u}) {
        const Field F = Field::prime(q);
        for (int d = 2; d <= (q == 5 ? 3 : 4); ++d) {
            const auto t = UnitGroupTable(F, make_modulus(F, least_irreducible(F, d)));
            const auto fam = family(t);
            const std::uint64_t qd = ipow_checked(q, static_cast<unsigned>(d));
            EXPECT_EQ(fam.size(), qd - 2);
            std::uint64_t even = 0;
            for (const auto& chi : fam) even += chi.even ? 1 : 0;
            EXPECT_EQ(even, (qd - 1) / (q - 1) - 1);
            if (q == 2) { EXPECT_EQ(even, fam.size()); }
        }
    }
    const auto t = table_for(3, {1, 0, 1});
    std::vector<std::uint64_t> even;
    for (const auto& chi : family(t))
        if (chi.even) even.push_back(chi.index);
    EXPECT_EQ(even, (std::vector<std::uint64_t>{2, 4, 6}));
}

TEST(Characters, EvaluationBasics) {
    const auto t = table_for(3, {1, 0, 1});
    for (const auto& chi : family(t)) {
        EXPECT_NEAR(std::abs(chi_eval(t, chi, Poly::one()) - 1.0), 0.0, 1e-15);
        EXPECT_EQ(chi_eval(t, chi, P({1, 0, 1})), std::complex<double>(0.0));
        const double ang = 2 * std::numbers::pi * static_cast<double>(chi.index) / 8.0;
        EXPECT_NEAR(std::abs(chi_eval(t, chi, t.generator()) - std::polar(1.0, ang)), 0.0, 1e-14);
    }
}

TEST(Characters, Conjugate) {
    const auto t = table_for(3, {1, 0, 1});
    EXPECT_EQ(conjugate(t.character(1)).index, 7u);
    for (const auto& chi : family(t)) {
        const auto cb = conjugate(chi);
        EXPECT_EQ(cb.even, chi.even);
        EXPECT_EQ(cb == chi, (2 * chi.index) % 8 == 0);
        for (std::uint64_t r = 1; r < 9; ++r)
            EXPECT_NEAR(std::abs(chi_eval_residue(t, cb, r) - std::conj(chi_eval_residue(t, chi, r))), 0.0, 1e-14);
        EXPECT_EQ(conjugate(cb), chi);
    }
}

TEST(Characters, SchurOrthogonality) {
    const Field F = Field::prime(3);
    for (int d = 2; d <= 3; ++d) {
        for (const Poly& Q : enumerate_monic(F, d)) {
            if (!is_irreducible(F, Q)) continue;
            const UnitGroupTable t(F, make_modulus(F, Q));
            auto chars = family(t);
            chars.insert(chars.begin(), t.character(0));
            for (std::uint64_t r = 2; r <= t.order(); ++r) {
                std::complex<double> s = 0;
                for (const auto& chi : chars) s += chi_eval_residue(t, chi, r);
                EXPECT_LT(std::abs(s) / static_cast<double>(chars.size()), 1e-12);
            }
        }
    }
}

TEST(Characters, Multiplicativity) {
    const Field F = Field::prime(5);
    const UnitGroupTable t(F, make_modulus(F, least_irreducible(F, 3)));
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> res(0, 124), kd(1, t.order() - 1);
    for (int i = 0; i < 1000; ++i) {
        const Poly a = poly_from_rank(res(rng), 4, 5, false);
        const Poly b = poly_from_rank(res(rng), 4, 5, false);
        const auto chi = t.character(kd(rng));
        const auto lhs = chi_eval(t, chi, poly_mul(F, a, b));
        const auto rhs = chi_eval(t, chi, a) * chi_eval(t, chi, b);
        EXPECT_LT(std::abs(lhs - rhs), 1e-12);
    }
}

TEST(Characters, ParityMatchesScalarInvariance) {
    for (std::uint32_t q : {3u, 5u, 7u}) {
        const Field F = Field::prime(q);
        const UnitGroupTable t(F, make_modulus(F, least_irreducible(F, 2)));
        for (const auto& chi : family(t)) {
            bool invariant = true;
            for (std::uint64_t r = 1; r <= t.order() && invariant; ++r) {
                const Poly f = t.residue_poly(r);
                for (Elem c = 1; c < q; ++c)
                    if (std::abs(chi_eval(t, chi, poly_scale(F, f, c)) - chi_eval(t, chi, f)) > 1e-12) invariant = false;
            }
            EXPECT_EQ(invariant, chi.even) << "q=" << q << " k=" << chi.index;
        }
    }
}

TEST(Characters, RebuildFromParts) {
    const Field F = Field::prime(3);
    const auto m = make_modulus(F, P({1, 0, 1}));
    const UnitGroupTable t(F, m);
    const auto r = UnitGroupTable::from_parts(F, m, t.generator(), t.dlog_table());
    EXPECT_EQ(r.dlog_table(), t.dlog_table());
    auto bad = t.dlog_table();
    std::swap(bad[1], bad[2]);
    EXPECT_THROW(UnitGroupTable::from_parts(F, m, t.generator(), bad), CacheCorruption);
    EXPECT_THROW(UnitGroupTable::from_parts(F, m, t.generator(), std::vector<std::int32_t>(3, 0)), CacheCorruption);
}
