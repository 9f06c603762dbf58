#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fflz/algebra.hpp"
#include "fflz/errors.hpp"

namespace fflz {

/// Monic irreducible modulus Q of degree d >= 2.
struct Modulus {
    Poly Q;
    int d = 0;
    std::uint64_t group_order = 0;  // q^d - 1
};

inline Modulus make_modulus(const Field& F, const Poly& Q) {
    if (Q.is_zero() || Q.deg() < 2) throw std::invalid_argument("modulus: degree must be >= 2");
    if (!Q.is_monic()) throw std::invalid_argument("modulus: Q must be monic");
    if (!is_irreducible(F, Q)) throw std::invalid_argument("modulus: Q = " + poly_to_string(Q) + " is reducible");
    const std::uint64_t size = ipow_checked(F.q(), static_cast<unsigned>(Q.deg()));
    return Modulus{Q, Q.deg(), size - 1};
}

/// A Dirichlet character chi_k: chi_k(g^j) = exp(2 pi i k j / (q^d - 1)).
struct Character {
    std::uint64_t index = 0;
    std::uint64_t group_order = 0;
    bool even = false;

    [[nodiscard]] int lambda_inf() const noexcept { return even ? 1 : 0; }
    friend bool operator==(const Character&, const Character&) = default;
};

inline Character conjugate(const Character& chi) {
    Character c = chi;
    c.index = chi.index == 0 ? 0 : chi.group_order - chi.index;
    return c;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

/// The cyclic group (F_q[T]/Q)^x: generator, full discrete-log table and the
/// table of roots of unity used for every character value. Residues are
/// addressed by their base-q rank (sum c_i q^i over the d low coefficients).
class UnitGroupTable {
public:
    static constexpr std::uint64_t kMaxGroupOrder = std::uint64_t{1} << 26;

    UnitGroupTable(const Field& F, Modulus modulus) : F_(F), mod_(std::move(modulus)) {
        check_size();
        const std::uint64_t M = mod_.group_order;
        const auto factors = prime_factors(M);
        for (std::uint64_t r = 1; r <= M; ++r) {
            const Poly g = residue_poly(r);
            bool full = true;
            for (std::uint64_t l : factors) {
                if (poly_powmod(F_, g, M / l, mod_.Q).is_one()) {
                    full = false;
                    break;
                }
            }
            if (full) {
                generator_ = g;
                break;
            }
        }
        fill_from_generator();
    }

    /// Rebuilds a table from a stored generator and dlog table; throws
    /// CacheCorruption if they are inconsistent.
    static UnitGroupTable from_parts(const Field& F, Modulus modulus, const Poly& generator, std::vector<std::int32_t> dlog) {
        UnitGroupTable t(F, std::move(modulus), 0);
        if (dlog.size() != t.mod_.group_order + 1) throw CacheCorruption("dlog table has wrong size");
        if (generator.is_zero() || (generator.degree() && *generator.degree() >= t.mod_.d)) throw CacheCorruption("generator is not a reduced residue");
        t.generator_ = generator;
        t.dlog_ = std::move(dlog);
        const std::uint64_t M = t.mod_.group_order;
        t.exp_.assign(M, 0);
        std::vector<char> seen(M, 0);
        if (t.dlog_[0] != -1) throw CacheCorruption("dlog(0) must be undefined");
        for (std::uint64_t r = 1; r <= M; ++r) {
            const std::int32_t e = t.dlog_[r];
            if (e < 0 || static_cast<std::uint64_t>(e) >= M || seen[static_cast<std::size_t>(e)]) throw CacheCorruption("dlog table is not a bijection");
            seen[static_cast<std::size_t>(e)] = 1;
            t.exp_[static_cast<std::size_t>(e)] = r;
        }
        if (t.dlog_[1] != 0 || t.dlog_[t.rank_of_reduced(generator)] != 1) throw CacheCorruption("dlog table does not match generator");
        // spot-check multiplicativity on the generator chain
        Poly cur = Poly::one();
        for (std::uint64_t j = 0; j < std::min<std::uint64_t>(M, 64); ++j) {
            if (t.exp_[j] != t.rank_of_reduced(cur)) throw CacheCorruption("dlog table inconsistent with generator powers");
            cur = poly_mulmod(F, cur, generator, t.mod_.Q);
        }
        t.build_roots();
        return t;
    }

    [[nodiscard]] const Field& field() const noexcept { return F_; }
    [[nodiscard]] const Modulus& modulus() const noexcept { return mod_; }
    [[nodiscard]] std::uint64_t order() const noexcept { return mod_.group_order; }
    [[nodiscard]] const Poly& generator() const noexcept { return generator_; }
    [[nodiscard]] const std::vector<std::int32_t>& dlog_table() const noexcept { return dlog_; }
    [[nodiscard]] const std::vector<std::complex<double>>& roots_of_unity() const noexcept { return roots_; }

    /// Rank of f mod Q.
    [[nodiscard]] std::uint64_t residue(const Poly& f) const {
        if (f.size() <= static_cast<std::size_t>(mod_.d)) return rank_of_reduced(f);
        return rank_of_reduced(poly_mod(F_, f, mod_.Q));
    }
    [[nodiscard]] Poly residue_poly(std::uint64_t rank) const { return poly_from_rank(rank, static_cast<std::size_t>(mod_.d), F_.q(), false); }

    /// Discrete log of a nonzero residue rank, -1 for the zero class.
    [[nodiscard]] std::int64_t dlog(std::uint64_t rank) const { return dlog_.at(rank); }
    [[nodiscard]] std::int64_t dlog(const Poly& f) const { return dlog_[residue(f)]; }
    /// Rank of g^j.
    [[nodiscard]] std::uint64_t exp(std::uint64_t j) const { return exp_[j % mod_.group_order]; }
    [[nodiscard]] std::uint64_t mul_residues(std::uint64_t a, std::uint64_t b) const {
        if (a == 0 || b == 0) return 0;
        return exp(static_cast<std::uint64_t>(dlog_[a]) + static_cast<std::uint64_t>(dlog_[b]));
    }
    [[nodiscard]] std::uint64_t inv_residue(std::uint64_t a) const {
        if (a == 0) throw std::domain_error("inverse of the zero residue");
        return exp(mod_.group_order - static_cast<std::uint64_t>(dlog_[a]));
    }

    /// exp(2 pi i j / M) for any integer exponent j.
    [[nodiscard]] const std::complex<double>& root(std::uint64_t j) const noexcept { return roots_[j % mod_.group_order]; }

    [[nodiscard]] Character character(std::uint64_t k) const {
        const std::uint64_t M = mod_.group_order;
        if (k >= M) throw std::invalid_argument("character index out of range");
        return Character{k, M, k % (F_.q() - 1) == 0};
    }

private:
    UnitGroupTable(const Field& F, Modulus modulus, int) : F_(F), mod_(std::move(modulus)) { check_size(); }

    void check_size() const {
        if (mod_.group_order == 0 || mod_.group_order > kMaxGroupOrder)
            throw std::invalid_argument("unit group: order q^d - 1 = " + std::to_string(mod_.group_order) + " outside supported range");
    }

    [[nodiscard]] std::uint64_t rank_of_reduced(const Poly& f) const noexcept { return poly_rank(f, static_cast<std::size_t>(mod_.d), F_.q()); }

    void fill_from_generator() {
        const std::uint64_t M = mod_.group_order;
        dlog_.assign(M + 1, -1);
        exp_.assign(M, 0);
        Poly cur = Poly::one();
        for (std::uint64_t j = 0; j < M; ++j) {
            const std::uint64_t r = rank_of_reduced(cur);
            dlog_[r] = static_cast<std::int32_t>(j);
            exp_[j] = r;
            cur = poly_mulmod(F_, cur, generator_, mod_.Q);
        }
        build_roots();
    }

    void build_roots() {
        const std::uint64_t M = mod_.group_order;
        roots_.resize(M);
        for (std::uint64_t j = 0; j < M; ++j) {
            roots_[j] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(M));
        }
    }

    Field F_;
    Modulus mod_;
    Poly generator_;
    std::vector<std::int32_t> dlog_;  // indexed by residue rank; q^d entries
    std::vector<std::uint64_t> exp_;
    std::vector<std::complex<double>> roots_;
};

/// The family F_Q: all nontrivial characters, ascending index.
inline std::vector<Character> family(const UnitGroupTable& table) {
    std::vector<Character> out;
    out.reserve(table.order() - 1);
    for (std::uint64_t k = 1; k < table.order(); ++k) out.push_back(table.character(k));
    return out;
}

inline std::complex<double> chi_eval_residue(const UnitGroupTable& table, const Character& chi, std::uint64_t rank) {
    const std::int64_t e = table.dlog(rank);
    if (e < 0) return {0.0, 0.0};
    // (k * e) mod M without overflow: both < 2^26
    return table.root((chi.index * static_cast<std::uint64_t>(e)) % chi.group_order);
}

inline std::complex<double> chi_eval(const UnitGroupTable& table, const Character& chi, const Poly& f) {
    return chi_eval_residue(table, chi, table.residue(f));
}

}  // namespace fflz
