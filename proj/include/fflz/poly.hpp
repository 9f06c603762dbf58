#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fflz/field.hpp"

namespace fflz {

/// Polynomial over F_q, coefficients constant term first, always trimmed so the
/// last stored coefficient is nonzero. Arithmetic takes the Field explicitly.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<Elem> coeffs) : c_(std::move(coeffs)) { trim(); }
    Poly(std::initializer_list<Elem> coeffs) : c_(coeffs) { trim(); }

    static Poly constant(Elem c) { return Poly(std::vector<Elem>{c}); }
    static Poly one() { return constant(1); }
    /// c * T^n
    static Poly monomial(Elem c, int n) {
        std::vector<Elem> v(static_cast<std::size_t>(n) + 1, 0);
        v.back() = c;
        return Poly(std::move(v));
    }

    [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }
    /// Degree, or nullopt for the zero polynomial.
    [[nodiscard]] std::optional<int> degree() const noexcept {
        if (c_.empty()) return std::nullopt;
        return static_cast<int>(c_.size()) - 1;
    }
    /// Degree of a polynomial known to be nonzero.
    [[nodiscard]] int deg() const {
        if (c_.empty()) throw std::domain_error("poly: degree of the zero polynomial");
        return static_cast<int>(c_.size()) - 1;
    }
    [[nodiscard]] Elem lead() const noexcept { return c_.empty() ? 0 : c_.back(); }
    [[nodiscard]] bool is_monic() const noexcept { return !c_.empty() && c_.back() == 1; }
    [[nodiscard]] bool is_one() const noexcept { return c_.size() == 1 && c_[0] == 1; }
    [[nodiscard]] Elem operator[](std::size_t i) const noexcept { return i < c_.size() ? c_[i] : 0; }
    [[nodiscard]] std::span<const Elem> coeffs() const noexcept { return c_; }
    [[nodiscard]] std::size_t size() const noexcept { return c_.size(); }

    friend bool operator==(const Poly&, const Poly&) = default;

    /// Canonical order: zero first, then by degree, then by coefficient codes
    /// compared from the top (odometer order with the constant term fastest).
    friend std::strong_ordering operator<=>(const Poly& a, const Poly& b) noexcept {
        if (a.c_.size() != b.c_.size()) return a.c_.size() <=> b.c_.size();
        for (std::size_t i = a.c_.size(); i-- > 0;) {
            if (a.c_[i] != b.c_[i]) return a.c_[i] <=> b.c_[i];
        }
        return std::strong_ordering::equal;
    }

private:
    void trim() noexcept {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<Elem> c_;
};

inline Poly poly_add(const Field& F, const Poly& a, const Poly& b) {
    std::vector<Elem> r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = F.add(a[i], b[i]);
    return Poly(std::move(r));
}

inline Poly poly_sub(const Field& F, const Poly& a, const Poly& b) {
    std::vector<Elem> r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = F.sub(a[i], b[i]);
    return Poly(std::move(r));
}

inline Poly poly_scale(const Field& F, const Poly& a, Elem c) {
    std::vector<Elem> r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = F.mul(a[i], c);
    return Poly(std::move(r));
}

inline Poly poly_mul(const Field& F, const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Elem> r(a.size() + b.size() - 1, 0);
    const auto ac = a.coeffs();
    const auto bc = b.coeffs();
    for (std::size_t i = 0; i < ac.size(); ++i) {
        if (ac[i] == 0) continue;
        for (std::size_t j = 0; j < bc.size(); ++j) r[i + j] = F.add(r[i + j], F.mul(ac[i], bc[j]));
    }
    return Poly(std::move(r));
}

/// Quotient and remainder; throws on division by zero.
inline std::pair<Poly, Poly> poly_divmod(const Field& F, const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::domain_error("poly: division by zero polynomial");
    if (a.size() < b.size()) return {Poly{}, a};
    std::vector<Elem> rem(a.coeffs().begin(), a.coeffs().end());
    const auto bc = b.coeffs();
    const std::size_t db = bc.size() - 1;
    const Elem inv_lead = F.inv(bc.back());
    std::vector<Elem> quot(rem.size() - db, 0);
    for (std::size_t k = rem.size(); k-- > db;) {
        const Elem c = F.mul(rem[k], inv_lead);
        if (c == 0) continue;
        quot[k - db] = c;
        for (std::size_t i = 0; i <= db; ++i) rem[k - db + i] = F.sub(rem[k - db + i], F.mul(c, bc[i]));
    }
    rem.resize(db);
    return {Poly(std::move(quot)), Poly(std::move(rem))};
}

inline Poly poly_mod(const Field& F, const Poly& a, const Poly& b) { return poly_divmod(F, a, b).second; }

inline Poly poly_make_monic(const Field& F, const Poly& a) {
    if (a.is_zero() || a.is_monic()) return a;
    return poly_scale(F, a, F.inv(a.lead()));
}

/// Monic gcd; gcd(0, 0) = 0.
inline Poly poly_gcd(const Field& F, Poly a, Poly b) {
    while (!b.is_zero()) {
        Poly r = poly_mod(F, a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return poly_make_monic(F, a);
}

inline Poly poly_mulmod(const Field& F, const Poly& a, const Poly& b, const Poly& m) {
    return poly_mod(F, poly_mul(F, a, b), m);
}

inline Poly poly_powmod(const Field& F, Poly base, std::uint64_t k, const Poly& m) {
    Poly r = poly_mod(F, Poly::one(), m);
    base = poly_mod(F, base, m);
    while (k) {
        if (k & 1) r = poly_mulmod(F, r, base, m);
        base = poly_mulmod(F, base, base, m);
        k >>= 1;
    }
    return r;
}

inline Poly poly_pow(const Field& F, const Poly& base, unsigned k) {
    Poly r = Poly::one();
    for (unsigned i = 0; i < k; ++i) r = poly_mul(F, r, base);
    return r;
}

inline Elem poly_eval(const Field& F, const Poly& f, Elem x) {
    Elem r = 0;
    const auto c = f.coeffs();
    for (std::size_t i = c.size(); i-- > 0;) r = F.add(F.mul(r, x), c[i]);
    return r;
}

/// Base-q rank of the first `len` coefficients: sum c_i q^i. For a monic
/// polynomial of degree n with len = n this is its odometer position.
inline std::uint64_t poly_rank(const Poly& f, std::size_t len, std::uint32_t q) noexcept {
    std::uint64_t r = 0;
    for (std::size_t i = len; i-- > 0;) r = r * q + f[i];
    return r;
}

/// Polynomial whose first `len` coefficients are the base-q digits of `rank`,
/// optionally with a leading 1 at T^len (the monic polynomial of that rank).
inline Poly poly_from_rank(std::uint64_t rank, std::size_t len, std::uint32_t q, bool monic) {
    std::vector<Elem> c(len + (monic ? 1 : 0), 0);
    for (std::size_t i = 0; i < len; ++i) {
        c[i] = static_cast<Elem>(rank % q);
        rank /= q;
    }
    if (monic) c[len] = 1;
    return Poly(std::move(c));
}

/// Comma-separated coefficient codes, constant term first ("1,0,1" is T^2+1).
/// The zero polynomial is written "0".
inline std::string poly_to_string(const Poly& f) {
    if (f.is_zero()) return "0";
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(f[i]);
    }
    return s;
}

inline Poly poly_parse(const Field& F, std::string_view text) {
    std::vector<Elem> c;
    std::size_t pos = 0;
    auto trim = [](std::string_view v) {
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
        return v;
    };
    if (trim(text).empty()) throw std::invalid_argument("poly: empty coefficient list");
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string_view tok = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (tok.empty()) throw std::invalid_argument("poly: empty coefficient in '" + std::string(text) + "'");
        std::uint64_t v = 0;
        for (char ch : tok) {
            if (ch < '0' || ch > '9') throw std::invalid_argument("poly: bad coefficient '" + std::string(tok) + "'");
            v = v * 10 + static_cast<unsigned>(ch - '0');
            if (v >= F.q()) throw std::invalid_argument("poly: coefficient " + std::string(tok) + " outside F_" + std::to_string(F.q()));
        }
        c.push_back(static_cast<Elem>(v));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return Poly(std::move(c));
}

}  // namespace fflz
