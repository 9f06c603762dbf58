#pragma once

#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fflz/field.hpp"
#include "fflz/poly.hpp"

namespace fflz {

/// q^n, throwing if the result does not fit in 63 bits.
inline std::uint64_t ipow_checked(std::uint64_t q, unsigned n) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < n; ++i) {
        if (r > (std::uint64_t{1} << 62) / q) throw std::overflow_error("ipow: q^n overflows");
        r *= q;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Monic enumeration
// ---------------------------------------------------------------------------

/// All q^n monic polynomials of degree n, constant coefficient fastest.
class MonicRange {
public:
    MonicRange(const Field& F, int n) : q_(F.q()), n_(n) {
        if (n < 0) throw std::invalid_argument("enumerate_monic: negative degree");
    }

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = Poly;
        using difference_type = std::ptrdiff_t;
        using pointer = const Poly*;
        using reference = const Poly&;

        iterator() = default;
        iterator(std::uint32_t q, int n) : q_(q), digits_(static_cast<std::size_t>(n) + 1, 0), done_(false) {
            digits_.back() = 1;
            current_ = Poly(digits_);
        }
        reference operator*() const noexcept { return current_; }
        pointer operator->() const noexcept { return &current_; }
        iterator& operator++() {
            std::size_t i = 0;
            const std::size_t top = digits_.size() - 1;
            while (i < top) {
                if (++digits_[i] < q_) break;
                digits_[i] = 0;
                ++i;
            }
            if (i == top) {
                done_ = true;
            } else {
                current_ = Poly(digits_);
            }
            return *this;
        }
        void operator++(int) { ++*this; }
        friend bool operator==(const iterator& a, const iterator& b) noexcept { return a.done_ == b.done_; }

    private:
        std::uint32_t q_ = 0;
        std::vector<Elem> digits_;
        Poly current_;
        bool done_ = true;
    };

    [[nodiscard]] iterator begin() const { return iterator(q_, n_); }
    [[nodiscard]] iterator end() const { return iterator(); }

private:
    std::uint32_t q_;
    int n_;
};

inline MonicRange enumerate_monic(const Field& F, int n) { return MonicRange(F, n); }

// ---------------------------------------------------------------------------
// Irreducibility, factorization, von Mangoldt
// ---------------------------------------------------------------------------

inline Poly frobenius_step(const Field& F, const Poly& h, const Poly& f) { return poly_powmod(F, h, F.q(), f); }

/// Ben-Or test: f of degree n is irreducible iff gcd(f, T^(q^i) - T) = 1 for i <= n/2.
inline bool is_irreducible(const Field& F, const Poly& f) {
    if (f.is_zero() || f.deg() < 1) throw std::invalid_argument("is_irreducible: constant or zero input");
    const Poly g = poly_make_monic(F, f);
    const int n = g.deg();
    if (n == 1) return true;
    const Poly x = Poly::monomial(1, 1);
    Poly h = x;
    for (int i = 1; i <= n / 2; ++i) {
        h = frobenius_step(F, h, g);
        if (!poly_gcd(F, g, poly_sub(F, h, x)).is_one()) return false;
    }
    return true;
}

struct PrimePower {
    Poly prime;
    int exponent;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Trial division by monic candidates in canonical order. The first divisor found
/// of least degree is irreducible, so no separate irreducibility test is needed.
inline std::vector<PrimePower> factorize(const Field& F, const Poly& f) {
    if (f.is_zero()) throw std::invalid_argument("factorize: zero polynomial");
    if (!f.is_monic()) throw std::invalid_argument("factorize: input must be monic");
    std::vector<PrimePower> out;
    Poly rem = f;
    for (int m = 1; 2 * m <= rem.deg(); ++m) {
        for (const Poly& cand : enumerate_monic(F, m)) {
            if (2 * m > rem.deg()) break;
            int k = 0;
            while (true) {
                auto [quot, r] = poly_divmod(F, rem, cand);
                if (!r.is_zero()) break;
                rem = std::move(quot);
                ++k;
            }
            if (k > 0) out.push_back({cand, k});
        }
    }
    if (rem.deg() >= 1) {
        // rem is irreducible; merge if it repeats the last factor found
        if (!out.empty() && out.back().prime == rem) {
            ++out.back().exponent;
        } else {
            out.push_back({rem, 1});
        }
    }
    return out;
}

/// Lambda(f) = deg P if f = P^k for a monic irreducible P, else 0. Uses the
/// distinct-degree split: the first i with gcd(f, T^(q^i) - T) != 1 exposes the
/// product of all prime factors of degree i; none up to n/2 means f is prime.
inline int von_mangoldt(const Field& F, const Poly& f) {
    if (f.is_zero()) throw std::invalid_argument("von_mangoldt: zero polynomial");
    if (!f.is_monic()) throw std::invalid_argument("von_mangoldt: input must be monic");
    const int n = f.deg();
    if (n == 0) return 0;
    if (F.q() <= 64 && n > 1) {
        // linear factors by evaluation: a root c forces f = (T - c)^n
        Elem root = 0;
        int roots = 0;
        for (Elem c = 0; c < F.q() && roots < 2; ++c)
            if (poly_eval(F, f, c) == 0) root = c, ++roots;
        if (roots >= 2) return 0;
        if (roots == 1) return f == poly_pow(F, Poly{F.neg(root), 1}, static_cast<unsigned>(n)) ? 1 : 0;
    }
    const Poly x = Poly::monomial(1, 1);
    Poly h = x;
    for (int i = 1; 2 * i <= n; ++i) {
        h = frobenius_step(F, h, f);
        Poly g = poly_gcd(F, f, poly_sub(F, h, x));
        if (g.is_one()) continue;
        if (g.deg() != i) return 0;
        Poly rem = f;
        while (rem.deg() > 0) {
            auto [quot, r] = poly_divmod(F, rem, g);
            if (!r.is_zero()) return 0;
            rem = std::move(quot);
        }
        return i;
    }
    return n;  // no factor of degree <= n/2: f is irreducible
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

inline int mobius(unsigned n) noexcept {
    int mu = 1;
    for (unsigned d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            n /= d;
            if (n % d == 0) return 0;
            mu = -mu;
        }
    }
    if (n > 1) mu = -mu;
    return mu;
}

inline std::vector<unsigned> divisors(unsigned n) {
    std::vector<unsigned> d;
    for (unsigned i = 1; i <= n; ++i)
        if (n % i == 0) d.push_back(i);
    return d;
}

/// Number of monic irreducibles of degree n: (1/n) sum_{m|n} mu(m) q^(n/m).
inline std::uint64_t count_irreducibles(std::uint64_t q, int n) {
    if (n < 1) throw std::invalid_argument("count_irreducibles: degree must be >= 1");
    __int128 s = 0;
    for (unsigned m : divisors(static_cast<unsigned>(n))) s += static_cast<__int128>(mobius(m)) * ipow_checked(q, static_cast<unsigned>(n) / m);
    return static_cast<std::uint64_t>(s / n);
}

/// Monic irreducibles of each degree, found by sieving: a monic polynomial of
/// degree n is marked reducible when it is P*g for a monic irreducible P of
/// degree <= n/2. Polynomials are identified by their monic rank.
class IrreducibleTable {
public:
    explicit IrreducibleTable(Field F) : F_(std::move(F)) {}

    [[nodiscard]] const Field& field() const noexcept { return F_; }

    /// Sorted monic ranks of the irreducibles of degree n.
    const std::vector<std::uint64_t>& ranks(int n) {
        if (n < 1) throw std::invalid_argument("irreducibles: degree must be >= 1");
        auto it = ranks_.find(n);
        if (it != ranks_.end()) return it->second;
        std::vector<std::uint64_t> out;
        sieve(n, [&](std::uint64_t r) { out.push_back(r); });
        counts_[n] = out.size();
        return ranks_.emplace(n, std::move(out)).first->second;
    }

    std::vector<Poly> polys(int n) {
        std::vector<Poly> out;
        for (std::uint64_t r : ranks(n)) out.push_back(poly_from_rank(r, static_cast<std::size_t>(n), F_.q(), true));
        return out;
    }

    /// Number of irreducibles of degree n, counted without storing them.
    std::uint64_t count(int n) {
        if (n < 1) throw std::invalid_argument("irreducibles: degree must be >= 1");
        auto it = counts_.find(n);
        if (it != counts_.end()) return it->second;
        std::uint64_t c = 0;
        sieve(n, [&](std::uint64_t) { ++c; });
        counts_[n] = c;
        return c;
    }

private:
    template <class Emit>
    void sieve(int n, Emit&& emit) {
        const std::uint32_t q = F_.q();
        const std::uint64_t total = ipow_checked(q, static_cast<unsigned>(n));
        if (n == 1) {
            for (std::uint64_t r = 0; r < total; ++r) emit(r);
            return;
        }
        std::vector<std::uint64_t> pw(static_cast<std::size_t>(n) + 1);
        pw[0] = 1;
        for (int i = 1; i <= n; ++i) pw[static_cast<std::size_t>(i)] = pw[static_cast<std::size_t>(i) - 1] * q;
        std::vector<std::uint64_t> bits((total + 63) / 64, 0);
        const bool prime_field = F_.is_prime_field();
        for (int k = 1; 2 * k <= n; ++k) {
            const int m = n - k;
            for (std::uint64_t prank : ranks(k)) {
                const Poly P = poly_from_rank(prank, static_cast<std::size_t>(k), q, true);
                // product P * g for g = T^m, then odometer over g's lower digits
                std::vector<Elem> prod(static_cast<std::size_t>(n) + 1, 0);
                for (int j = 0; j <= k; ++j) prod[static_cast<std::size_t>(m + j)] = P[static_cast<std::size_t>(j)];
                std::uint64_t idx = 0;
                for (int j = 0; j < n; ++j) idx += prod[static_cast<std::size_t>(j)] * pw[static_cast<std::size_t>(j)];
                std::vector<Elem> g(static_cast<std::size_t>(m), 0);
                while (true) {
                    bits[idx >> 6] |= std::uint64_t{1} << (idx & 63);
                    int i = 0;
                    for (; i < m; ++i) {
                        const Elem old = g[static_cast<std::size_t>(i)];
                        const Elem nxt = old + 1 == q ? 0 : old + 1;
                        g[static_cast<std::size_t>(i)] = nxt;
                        const Elem delta = prime_field ? 1 : F_.sub(nxt, old);
                        for (int j = 0; j <= k; ++j) {
                            const std::size_t pos = static_cast<std::size_t>(i + j);
                            const Elem before = prod[pos];
                            const Elem after = F_.add(before, prime_field ? P[static_cast<std::size_t>(j)] : F_.mul(delta, P[static_cast<std::size_t>(j)]));
                            prod[pos] = after;
                            idx = idx + after * pw[pos] - before * pw[pos];
                        }
                        if (nxt != 0) break;
                    }
                    if (i == m) break;
                }
            }
        }
        for (std::uint64_t r = 0; r < total; ++r) {
            if (!((bits[r >> 6] >> (r & 63)) & 1)) emit(r);
        }
    }

    Field F_;
    std::map<int, std::vector<std::uint64_t>> ranks_;
    std::map<int, std::uint64_t> counts_;
};

/// #(F_q[T]/Q)^x from the factorization of Q.
inline std::uint64_t euler_phi(const Field& F, const Poly& Q) {
    if (Q.is_zero() || Q.deg() < 1) throw std::invalid_argument("euler_phi: modulus must be nonconstant");
    if (!Q.is_monic()) throw std::invalid_argument("euler_phi: modulus must be monic");
    std::uint64_t phi = 1;
    for (const auto& [P, k] : factorize(F, Q)) {
        const std::uint64_t norm = ipow_checked(F.q(), static_cast<unsigned>(P.deg()));
        phi *= ipow_checked(norm, static_cast<unsigned>(k - 1)) * (norm - 1);
    }
    return phi;
}

/// Least monic irreducible of degree n in canonical order.
inline Poly least_irreducible(const Field& F, int n) {
    if (n < 1) throw std::invalid_argument("least_irreducible: degree must be >= 1");
    for (const Poly& f : enumerate_monic(F, n)) {
        if (is_irreducible(F, f)) return f;
    }
    throw std::logic_error("least_irreducible: none found");  // impossible over a finite field
}

/// Builds F_q, q = p^e. For e > 1 the modulus is checked for irreducibility over
/// F_p, or, when absent, the least irreducible of degree e is used.
inline Field field_make(std::uint32_t p, std::uint32_t e, std::optional<std::vector<Elem>> ext_modulus) {
    if (e < 1) throw std::invalid_argument("field: extension degree must be >= 1");
    Field base = Field::prime(p);
    if (e == 1) {
        if (ext_modulus && !ext_modulus->empty()) {
            const Poly m(*ext_modulus);
            if (m.size() > 2 || (m.size() == 2 && !m.is_monic()))
                throw std::invalid_argument("field: prime field takes no extension modulus");
        }
        return base;
    }
    std::uint64_t q = ipow_checked(p, e);
    if (q > Field::kMaxTableOrder) throw std::invalid_argument("field: extension fields limited to q <= " + std::to_string(Field::kMaxTableOrder));
    Poly m;
    if (ext_modulus) {
        for (Elem c : *ext_modulus)
            if (c >= p) throw std::invalid_argument("field: modulus coefficient outside F_p");
        m = Poly(*ext_modulus);
        if (m.is_zero() || m.deg() != static_cast<int>(e) || !m.is_monic())
            throw std::invalid_argument("field: extension modulus must be monic of degree " + std::to_string(e));
        if (!is_irreducible(base, m)) throw std::invalid_argument("field: extension modulus " + poly_to_string(m) + " is reducible over F_" + std::to_string(p));
    } else {
        m = least_irreducible(base, static_cast<int>(e));
    }
    std::vector<Elem> coeffs(m.coeffs().begin(), m.coeffs().end());
    return Field(p, e, std::move(coeffs));
}

}  // namespace fflz
