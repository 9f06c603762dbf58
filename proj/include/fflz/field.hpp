#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fflz {

/// Field element code in [0, q). For q = p^e the base-p digits of the code are
/// the coefficients (constant term first) of the element in F_p[X]/(ext_modulus).
using Elem = std::uint32_t;

inline bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2) {
        if (n % d == 0) return false;
    }
    return true;
}

class Field;
inline Field field_make(std::uint32_t p, std::uint32_t e, std::optional<std::vector<Elem>> ext_modulus);

/// The finite field F_q. Immutable after construction; copies share tables.
class Field {
public:
    /// Largest q for which extension-field tables are built.
    static constexpr std::uint32_t kMaxTableOrder = 1024;

    static Field prime(std::uint32_t p) {
        if (!is_prime(p)) throw std::invalid_argument("field: characteristic " + std::to_string(p) + " is not prime");
        if (p >= (1u << 31)) throw std::invalid_argument("field: characteristic too large");
        return Field(p, 1, {});
    }

    [[nodiscard]] std::uint32_t p() const noexcept { return p_; }
    [[nodiscard]] std::uint32_t e() const noexcept { return e_; }
    [[nodiscard]] std::uint32_t q() const noexcept { return q_; }
    [[nodiscard]] bool is_prime_field() const noexcept { return e_ == 1; }
    /// Monic modulus over F_p, constant term first; empty for prime fields.
    [[nodiscard]] const std::vector<Elem>& ext_modulus() const noexcept { return modulus_; }

    [[nodiscard]] Elem add(Elem a, Elem b) const noexcept {
        if (e_ == 1) {
            const std::uint64_t s = std::uint64_t{a} + b;
            return static_cast<Elem>(s >= p_ ? s - p_ : s);
        }
        return tables_->add[a * q_ + b];
    }
    [[nodiscard]] Elem neg(Elem a) const noexcept {
        if (e_ == 1) return a == 0 ? 0 : p_ - a;
        return tables_->neg[a];
    }
    [[nodiscard]] Elem sub(Elem a, Elem b) const noexcept { return add(a, neg(b)); }
    [[nodiscard]] Elem mul(Elem a, Elem b) const noexcept {
        if (e_ == 1) return static_cast<Elem>((std::uint64_t{a} * b) % p_);
        return tables_->mul[a * q_ + b];
    }
    [[nodiscard]] Elem inv(Elem a) const {
        if (a == 0) throw std::domain_error("field: inverse of zero");
        if (e_ == 1) return pow(a, p_ - 2);
        return tables_->inv[a];
    }
    [[nodiscard]] Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }
    [[nodiscard]] Elem pow(Elem a, std::uint64_t k) const noexcept {
        Elem r = 1;
        while (k) {
            if (k & 1) r = mul(r, a);
            a = mul(a, a);
            k >>= 1;
        }
        return r;
    }

    friend bool operator==(const Field& a, const Field& b) noexcept {
        return a.p_ == b.p_ && a.e_ == b.e_ && a.modulus_ == b.modulus_;
    }

private:
    struct Tables {
        std::vector<std::uint16_t> add, mul;
        std::vector<std::uint16_t> neg, inv;
    };

    Field(std::uint32_t p, std::uint32_t e, std::vector<Elem> modulus)
        : p_(p), e_(e), q_(1), modulus_(std::move(modulus)) {
        for (std::uint32_t i = 0; i < e; ++i) q_ *= p;
        if (e > 1) build_tables();
    }

    friend inline Field field_make(std::uint32_t, std::uint32_t, std::optional<std::vector<Elem>>);

    void build_tables() {
        auto t = std::make_shared<Tables>();
        const std::uint32_t q = q_;
        auto digits = [&](Elem a) {
            std::vector<std::uint32_t> d(e_);
            for (std::uint32_t i = 0; i < e_; ++i) {
                d[i] = a % p_;
                a /= p_;
            }
            return d;
        };
        auto code = [&](const std::vector<std::uint32_t>& d) {
            Elem c = 0;
            for (std::uint32_t i = e_; i-- > 0;) c = c * p_ + d[i];
            return c;
        };
        t->add.resize(std::size_t{q} * q);
        t->mul.resize(std::size_t{q} * q);
        t->neg.resize(q);
        t->inv.resize(q);
        for (Elem a = 0; a < q; ++a) {
            const auto da = digits(a);
            std::vector<std::uint32_t> dn(e_);
            for (std::uint32_t i = 0; i < e_; ++i) dn[i] = (p_ - da[i]) % p_;
            t->neg[a] = static_cast<std::uint16_t>(code(dn));
            for (Elem b = 0; b < q; ++b) {
                const auto db = digits(b);
                std::vector<std::uint32_t> s(e_);
                for (std::uint32_t i = 0; i < e_; ++i) s[i] = (da[i] + db[i]) % p_;
                t->add[a * q + b] = static_cast<std::uint16_t>(code(s));
                // schoolbook product in F_p[X], then reduce by the monic modulus
                std::vector<std::uint64_t> prod(2 * e_ - 1, 0);
                for (std::uint32_t i = 0; i < e_; ++i)
                    for (std::uint32_t j = 0; j < e_; ++j) prod[i + j] = (prod[i + j] + std::uint64_t{da[i]} * db[j]) % p_;
                for (std::size_t k = prod.size(); k-- > e_;) {
                    const std::uint64_t c = prod[k];
                    if (c == 0) continue;
                    for (std::uint32_t i = 0; i <= e_; ++i) {
                        const std::size_t idx = k - e_ + i;
                        prod[idx] = (prod[idx] + (p_ - c) * modulus_[i]) % p_;
                    }
                }
                std::vector<std::uint32_t> r(e_);
                for (std::uint32_t i = 0; i < e_; ++i) r[i] = static_cast<std::uint32_t>(prod[i]);
                t->mul[a * q + b] = static_cast<std::uint16_t>(code(r));
            }
        }
        for (Elem a = 1; a < q; ++a) {
            for (Elem b = 1; b < q; ++b) {
                if (t->mul[a * q + b] == 1) {
                    t->inv[a] = static_cast<std::uint16_t>(b);
                    break;
                }
            }
        }
        tables_ = std::move(t);
    }

    std::uint32_t p_;
    std::uint32_t e_;
    std::uint32_t q_;
    std::vector<Elem> modulus_;
    std::shared_ptr<const Tables> tables_;
};

}  // namespace fflz
