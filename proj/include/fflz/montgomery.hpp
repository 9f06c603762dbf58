#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fflz/algebra.hpp"
#include "fflz/characters.hpp"
#include "fflz/errors.hpp"
#include "fflz/lfunction.hpp"
#include "fflz/summation.hpp"

namespace fflz {

/// Psi_q(n) = sum over monic f of degree n of Lambda(f), from the sieved
/// irreducible counts: sum_{m | n} m * #{irreducible of degree m}.
/// Throws InvariantViolation unless it equals q^n.
inline std::uint64_t psi_total(IrreducibleTable& primes, int n) {
    if (n < 0) throw std::invalid_argument("psi_total: negative degree");
    if (n == 0) return 0;
    std::uint64_t s = 0;
    for (unsigned m : divisors(static_cast<unsigned>(n))) s += m * primes.count(static_cast<int>(m));
    const std::uint64_t want = ipow_checked(primes.field().q(), static_cast<unsigned>(n));
    if (s != want) throw InvariantViolation("psi_total: sum of Lambda over degree " + std::to_string(n) + " is " + std::to_string(s) + ", not q^n");
    return s;
}

/// Psi_q(n; Q, a): sum of Lambda(g) over monic g of degree n with g = a mod Q,
/// enumerated as g = a_rep + Q h with h monic of degree n - d.
inline std::uint64_t psi_progression(const Field& F, const Poly& Q, const Poly& a, int n) {
    if (n < 0) throw std::invalid_argument("psi_progression: negative degree");
    const Poly rep = poly_mod(F, a, Q);
    if (!poly_gcd(F, rep, Q).is_one()) throw std::invalid_argument("psi_progression: residue not coprime to Q");
    const int d = Q.deg();
    if (n < d) return (rep.is_monic() && rep.deg() == n) ? static_cast<std::uint64_t>(von_mangoldt(F, rep)) : 0;
    std::uint64_t s = 0;
    for (const Poly& h : enumerate_monic(F, n - d)) s += static_cast<std::uint64_t>(von_mangoldt(F, poly_add(F, rep, poly_mul(F, Q, h))));
    return s;
}

/// Sum of Lambda(g) over monic g of degree n divisible by an irreducible Q of
/// degree d: only the powers Q^k qualify.
inline std::uint64_t psi_zero_class(int d, int n) { return (n > 0 && n % d == 0) ? static_cast<std::uint64_t>(d) : 0; }

/// Exact rational num/den, den > 0, in lowest terms.
struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    static Rational make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational: zero denominator");
        if (d < 0) n = -n, d = -d;
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) n /= a, d /= a;
        return {n, d};
    }
    [[nodiscard]] double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    [[nodiscard]] bool is_zero() const noexcept { return num == 0; }
    friend bool operator==(const Rational&, const Rational&) = default;
};

inline std::string int128_to_string(__int128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    std::string s;
    while (v != 0) {
        const int digit = static_cast<int>(v % 10);
        s.push_back(static_cast<char>('0' + (neg ? -digit : digit)));
        v /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

struct MontgomeryRow {
    int n = 0;
    std::uint64_t psi_progression = 0;   // Psi_q(n; Q, 1)
    std::uint64_t psi_total = 0;         // Psi_q(n)
    Rational psi_over_phi;               // Psi_q(n) / Phi_q(Q)
    Rational deviation;                  // D(n)
    std::optional<double> theta_hat;     // (n/2 - log_q |D|)/d, absent when D = 0
    double brun_titchmarsh = 0.0;        // Psi_q(n; Q, 1) q^{d - n}
    bool diagnostic = false;             // n < d
};

struct MontgomeryReport {
    std::vector<MontgomeryRow> rows;
    std::optional<double> theta_min;     // over rows with n >= d
    std::optional<double> theta_median;
};

inline MontgomeryRow montgomery_row(const Field& F, const Poly& Q, IrreducibleTable& primes, int n) {
    MontgomeryRow row;
    row.n = n;
    const int d = Q.deg();
    const std::uint64_t phi = ipow_checked(F.q(), static_cast<unsigned>(d)) - 1;
    row.psi_progression = psi_progression(F, Q, Poly::one(), n);
    row.psi_total = psi_total(primes, n);
    row.psi_over_phi = Rational::make(static_cast<__int128>(row.psi_total), static_cast<__int128>(phi));
    row.deviation = Rational::make(static_cast<__int128>(row.psi_progression) * phi - static_cast<__int128>(row.psi_total), static_cast<__int128>(phi));
    if (!row.deviation.is_zero()) {
        const double lq = std::log(static_cast<double>(F.q()));
        row.theta_hat = (0.5 * n - std::log(std::abs(row.deviation.to_double())) / lq) / d;
    }
    row.brun_titchmarsh = static_cast<double>(row.psi_progression) * std::pow(static_cast<double>(F.q()), d - n);
    row.diagnostic = n < d;
    return row;
}

/// D(n) and theta-hat(n) for n in [n_lo, n_hi]; rows with n < d are diagnostic.
inline MontgomeryReport deviation_and_theta(const Field& F, const Poly& Q, IrreducibleTable& primes, int n_lo, int n_hi) {
    if (n_lo < 0 || n_hi < n_lo) throw std::invalid_argument("deviation_and_theta: empty or negative n range");
    MontgomeryReport rep;
    std::vector<double> thetas;
    for (int n = n_lo; n <= n_hi; ++n) {
        rep.rows.push_back(montgomery_row(F, Q, primes, n));
        const auto& r = rep.rows.back();
        if (!r.diagnostic && r.theta_hat) thetas.push_back(*r.theta_hat);
    }
    if (!thetas.empty()) {
        std::sort(thetas.begin(), thetas.end());
        rep.theta_min = thetas.front();
        const std::size_t h = thetas.size() / 2;
        rep.theta_median = thetas.size() % 2 ? thetas[h] : 0.5 * (thetas[h - 1] + thetas[h]);
    }
    return rep;
}

/// sum over the family of sum_j e^{i n theta_j}, ascending character index.
inline cplx zero_sum(const std::vector<LData>& fam, int n) {
    CompensatedComplexSum s;
    for (const auto& L : fam) s.add(trace(L, n));
    return s.value();
}

/// (d-1)^{1 - theta1} q^{d (1 - theta2)}, the comparison scale for zero_sum.
inline double zero_sum_scale(int d, std::uint32_t q, double theta1, double theta2) {
    return std::pow(static_cast<double>(d - 1), 1.0 - theta1) * std::pow(static_cast<double>(q), d * (1.0 - theta2));
}

/// H[r] = sum of Lambda(f) over monic f of degree n with f mod Q of rank r.
inline std::vector<std::uint64_t> lambda_residue_histogram(const UnitGroupTable& table, int n) {
    std::vector<std::uint64_t> h(table.order() + 1, 0);
    for (const Poly& f : enumerate_monic(table.field(), n)) {
        const int lam = von_mangoldt(table.field(), f);
        if (lam) h[table.residue(f)] += static_cast<std::uint64_t>(lam);
    }
    return h;
}

struct PairSums {
    std::uint64_t C1 = 0;  // f1 = f2 != 0 mod Q
    std::uint64_t C2 = 0;  // f1 f2 = 1 mod Q
};

inline PairSums pair_sums(const UnitGroupTable& table, int n1, int n2) {
    if (n1 < 0 || n2 < 0) throw std::invalid_argument("pair_sums: negative degree");
    const auto h1 = lambda_residue_histogram(table, n1);
    const auto h2 = n2 == n1 ? h1 : lambda_residue_histogram(table, n2);
    PairSums out;
    for (std::uint64_t r = 1; r <= table.order(); ++r) {
        out.C1 += h1[r] * h2[r];
        out.C2 += h1[r] * h2[table.inv_residue(r)];
    }
    return out;
}

}  // namespace fflz
