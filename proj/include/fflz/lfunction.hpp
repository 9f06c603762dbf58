#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fflz/algebra.hpp"
#include "fflz/characters.hpp"
#include "fflz/errors.hpp"
#include "fflz/parallel.hpp"
#include "fflz/roots.hpp"
#include "fflz/summation.hpp"

namespace fflz {

struct LTolerances {
    double completion = 1e-9;     // remainder of the division by (1 - u)
    double rh = 1e-9;             // relative deviation of |alpha| from sqrt(q)
    double root_number = 1e-9;    // deviation of |epsilon| from 1
};

/// L-function data of one character.
struct LData {
    std::uint64_t chi_index = 0;
    bool even = false;
    std::vector<cplx> coeffs;            // a_0 .. a_{d-1}
    std::vector<cplx> completed;         // degree N = d - 1 - lambda_inf
    std::vector<cplx> inv_roots;         // alpha_j, |alpha_j| = sqrt(q)
    std::vector<double> eigenangles;     // sorted, in [-pi, pi)
    cplx root_number{1.0, 0.0};
    double rh_residual = 0.0;            // max | |alpha|/sqrt(q) - 1 |

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(completed.size()) - 1; }
    [[nodiscard]] int lambda_inf() const noexcept { return even ? 1 : 0; }
};

/// Per-modulus precomputation shared read-only by all characters of the family:
/// discrete logs of the monic polynomials of degree < d and, for each prime
/// degree m up to the enumeration cap, the transform
///   S_m[k] = sum_{deg P = m} chi_k(P).
class ModulusContext {
public:
    /// Prime sums are enumerated for degrees m with q^m <= max_prime_enumeration.
    static constexpr std::uint64_t kDefaultPrimeEnumeration = std::uint64_t{1} << 20;

    ModulusContext(std::shared_ptr<const UnitGroupTable> table, IrreducibleTable& primes,
                   std::uint64_t max_prime_enumeration = kDefaultPrimeEnumeration)
        : table_(std::move(table)) {
        const Field& F = table_->field();
        if (!(primes.field() == F)) throw std::invalid_argument("modulus context: prime table over a different field");
        const std::uint32_t q = F.q();
        const int d = table_->modulus().d;
        const std::uint64_t M = table_->order();

        monic_dlogs_.resize(static_cast<std::size_t>(d));
        std::uint64_t qn = 1;
        for (int n = 0; n < d; ++n, qn *= q) {
            // a monic f of degree n < d is its own residue: rank(f) = rank(low digits) + q^n
            auto& v = monic_dlogs_[static_cast<std::size_t>(n)];
            v.resize(qn);
            for (std::uint64_t r = 0; r < qn; ++r) v[r] = static_cast<std::uint32_t>(table_->dlog(r + qn));
        }

        prime_cap_ = 0;
        for (std::uint64_t qm = q; qm <= max_prime_enumeration; qm *= q) ++prime_cap_;
        const auto powT = powers_of_T(prime_cap_);
        prime_sums_.assign(static_cast<std::size_t>(prime_cap_) + 1, {});
        std::vector<std::uint64_t> hist(M);
        std::vector<std::uint64_t> acc(static_cast<std::size_t>(d));
        for (int m = 1; m <= prime_cap_; ++m) {
            std::fill(hist.begin(), hist.end(), 0);
            for (std::uint64_t rank : primes.ranks(m)) {
                const std::uint64_t res = residue_of_monic(F, powT, m, rank, acc);
                const std::int64_t e = table_->dlog(res);
                if (e >= 0) ++hist[static_cast<std::size_t>(e)];
            }
            auto& S = prime_sums_[static_cast<std::size_t>(m)];
            S.assign(M, 0.0);
            const auto& roots = table_->roots_of_unity();
            for (std::uint64_t e = 0; e < M; ++e) {
                if (hist[e] == 0) continue;
                const double h = static_cast<double>(hist[e]);
                std::uint64_t idx = 0;
                for (std::uint64_t k = 0; k < M; ++k) {
                    S[k] += h * roots[idx];
                    idx += e;
                    if (idx >= M) idx -= M;
                }
            }
        }
    }

    [[nodiscard]] const UnitGroupTable& table() const noexcept { return *table_; }
    [[nodiscard]] std::shared_ptr<const UnitGroupTable> table_ptr() const noexcept { return table_; }
    [[nodiscard]] std::uint32_t q() const noexcept { return table_->field().q(); }
    [[nodiscard]] int d() const noexcept { return table_->modulus().d; }
    /// Largest n for which c_chi(n) is a direct prime sum.
    [[nodiscard]] int prime_cap() const noexcept { return prime_cap_; }
    [[nodiscard]] const std::vector<std::uint32_t>& monic_dlogs(int n) const { return monic_dlogs_.at(static_cast<std::size_t>(n)); }
    /// S_m[k]; requires 1 <= m <= prime_cap().
    [[nodiscard]] const cplx& prime_sum(int m, std::uint64_t k) const { return prime_sums_.at(static_cast<std::size_t>(m))[k % table_->order()]; }

private:
    // T^i mod Q as digit vectors, i = 0 .. n
    [[nodiscard]] std::vector<std::vector<Elem>> powers_of_T(int n) const {
        const Field& F = table_->field();
        const Poly& Q = table_->modulus().Q;
        const auto d = static_cast<std::size_t>(table_->modulus().d);
        std::vector<std::vector<Elem>> out;
        Poly cur = Poly::one();
        for (int i = 0; i <= n; ++i) {
            std::vector<Elem> v(d);
            for (std::size_t j = 0; j < d; ++j) v[j] = cur[j];
            out.push_back(std::move(v));
            cur = poly_mulmod(F, cur, Poly::monomial(1, 1), Q);
        }
        return out;
    }

    // rank mod Q of the monic polynomial T^m + (digits of rank)
    [[nodiscard]] std::uint64_t residue_of_monic(const Field& F, const std::vector<std::vector<Elem>>& powT, int m, std::uint64_t rank,
                                                 std::vector<std::uint64_t>& acc) const {
        const std::uint32_t q = F.q();
        const std::size_t d = acc.size();
        const auto& top = powT[static_cast<std::size_t>(m)];
        if (F.is_prime_field()) {
            for (std::size_t j = 0; j < d; ++j) acc[j] = top[j];
            for (int i = 0; i < m; ++i, rank /= q) {
                const std::uint64_t c = rank % q;
                if (c == 0) continue;
                const auto& pw = powT[static_cast<std::size_t>(i)];
                for (std::size_t j = 0; j < d; ++j) acc[j] += c * pw[j];
            }
            for (std::size_t j = 0; j < d; ++j) acc[j] %= q;
        } else {
            for (std::size_t j = 0; j < d; ++j) acc[j] = top[j];
            for (int i = 0; i < m; ++i, rank /= q) {
                const auto c = static_cast<Elem>(rank % q);
                if (c == 0) continue;
                const auto& pw = powT[static_cast<std::size_t>(i)];
                for (std::size_t j = 0; j < d; ++j) acc[j] = F.add(static_cast<Elem>(acc[j]), F.mul(c, pw[j]));
            }
        }
        std::uint64_t r = 0;
        for (std::size_t j = d; j-- > 0;) r = r * q + acc[j];
        return r;
    }

    std::shared_ptr<const UnitGroupTable> table_;
    std::vector<std::vector<std::uint32_t>> monic_dlogs_;
    int prime_cap_ = 0;
    std::vector<std::vector<cplx>> prime_sums_;
};

/// a_n = sum over monic f of degree n of chi(f), n = 0 .. d-1.
inline std::vector<cplx> dirichlet_coefficients(const ModulusContext& ctx, const Character& chi) {
    if (chi.index == 0) throw std::invalid_argument("dirichlet coefficients: principal character rejected");
    const auto& roots = ctx.table().roots_of_unity();
    const std::uint64_t M = ctx.table().order();
    std::vector<cplx> a(static_cast<std::size_t>(ctx.d()));
    for (int n = 0; n < ctx.d(); ++n) {
        CompensatedComplexSum s;
        for (std::uint32_t e : ctx.monic_dlogs(n)) s.add(roots[(chi.index * e) % M]);
        a[static_cast<std::size_t>(n)] = s.value();
    }
    return a;
}

/// Removes the trivial factor (1 - u) for even characters by synthetic division.
inline std::vector<cplx> complete(const std::vector<cplx>& a, int lambda_inf, double tolerance = 1e-9) {
    if (lambda_inf == 0) return a;
    if (a.empty()) throw std::invalid_argument("complete: empty coefficient sequence");
    // a(u) = (1 - u) b(u): b_0 = a_0, b_i = a_i + b_{i-1}
    std::vector<cplx> b(a.size() - 1);
    cplx run = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        run += a[i];
        b[i] = run;
    }
    const cplx remainder = run + a.back();  // = a(1)
    if (std::abs(remainder) > tolerance) {
        std::ostringstream os;
        os << "complete: even L-function not divisible by (1 - u), remainder " << std::abs(remainder);
        throw InvariantViolation(os.str());
    }
    return b;
}

/// Maps an angle to [-pi, pi); the value pi goes to -pi.
inline double wrap_angle(double t) noexcept {
    constexpr double pi = std::numbers::pi;
    if (t >= pi) t -= 2 * pi;
    if (t < -pi) t += 2 * pi;
    if (t >= pi) t = -pi;
    return t;
}

struct SpectralData {
    std::vector<cplx> inv_roots;
    std::vector<double> eigenangles;
    double rh_residual = 0.0;
};

/// Inverse roots and sorted eigenangles of a completed L-polynomial in u.
/// The roots are found in z = sqrt(q) u, where they lie on the unit circle.
inline SpectralData eigenangles(const std::vector<cplx>& completed, std::uint32_t q, double rh_tolerance = 1e-9) {
    SpectralData out;
    if (completed.size() <= 1) return out;
    const double sq = std::sqrt(static_cast<double>(q));
    std::vector<cplx> scaled(completed.size());
    double f = 1.0;
    for (std::size_t i = 0; i < completed.size(); ++i, f /= sq) scaled[i] = completed[i] * f;
    const auto z = aberth_roots(scaled);
    for (const cplx& zj : z) {
        const cplx alpha = sq / zj;
        out.inv_roots.push_back(alpha);
        out.rh_residual = std::max(out.rh_residual, std::abs(std::abs(alpha) / sq - 1.0));
        out.eigenangles.push_back(wrap_angle(std::arg(alpha)));
    }
    std::sort(out.eigenangles.begin(), out.eigenangles.end());
    if (!(out.rh_residual < rh_tolerance)) {
        std::ostringstream os;
        os << "eigenangles: inverse root off the circle |alpha| = sqrt(q), relative deviation " << out.rh_residual;
        throw InvariantViolation(os.str());
    }
    return out;
}

inline LData compute_ldata(const ModulusContext& ctx, const Character& chi, const LTolerances& tol = {}) {
    LData L;
    L.chi_index = chi.index;
    L.even = chi.even;
    L.coeffs = dirichlet_coefficients(ctx, chi);
    L.completed = complete(L.coeffs, chi.lambda_inf(), tol.completion);
    auto spec = eigenangles(L.completed, ctx.q(), tol.rh);
    L.inv_roots = std::move(spec.inv_roots);
    L.eigenangles = std::move(spec.eigenangles);
    L.rh_residual = spec.rh_residual;
    const int N = L.degree();
    L.root_number = L.completed.back() / std::pow(static_cast<double>(ctx.q()), 0.5 * N);
    return L;
}

/// Tr(Theta^n) = sum_j e^{i n theta_j}.
inline cplx trace(const LData& L, int n) {
    CompensatedComplexSum s;
    for (double t : L.eigenangles) s.add(std::polar(1.0, static_cast<double>(n) * t));
    return s.value();
}

/// c_chi(n) for n = 0 .. n_max. Up to the context's prime cap each value is the
/// prime-power sum  sum_{m | n} m S_m[k n / m];  beyond it the values follow from
/// the log-derivative recurrence  n a_n = sum_{j=1}^{n} c(j) a_{n-j},  a_n = 0 for n >= d.
inline std::vector<cplx> c_coefficients(const ModulusContext& ctx, const Character& chi, const std::vector<cplx>& a, int n_max) {
    if (n_max < 0) throw std::invalid_argument("c coefficients: negative degree");
    std::vector<cplx> c(static_cast<std::size_t>(n_max) + 1, 0.0);
    const std::uint64_t M = ctx.table().order();
    auto coef = [&](int n) -> cplx { return n < static_cast<int>(a.size()) ? a[static_cast<std::size_t>(n)] : cplx{}; };
    for (int n = 1; n <= n_max; ++n) {
        if (n <= ctx.prime_cap()) {
            cplx s = 0.0;
            for (unsigned m : divisors(static_cast<unsigned>(n))) {
                const std::uint64_t k = (chi.index * static_cast<std::uint64_t>(n / static_cast<int>(m))) % M;
                s += static_cast<double>(m) * ctx.prime_sum(static_cast<int>(m), k);
            }
            c[static_cast<std::size_t>(n)] = s;
        } else {
            CompensatedComplexSum s;
            s.add(static_cast<double>(n) * coef(n));
            for (int j = 1; j < n; ++j) s.add(-c[static_cast<std::size_t>(j)] * coef(n - j));
            c[static_cast<std::size_t>(n)] = s.value();
        }
    }
    return c;
}

inline std::vector<cplx> c_coefficients(const ModulusContext& ctx, const Character& chi, int n_max) {
    return c_coefficients(ctx, chi, dirichlet_coefficients(ctx, chi), n_max);
}

/// sum over all monic f of degree n of Lambda(f) chi(f), by full enumeration.
inline cplx c_coefficient_bruteforce(const UnitGroupTable& table, const Character& chi, int n) {
    if (n < 0) throw std::invalid_argument("c coefficient: negative degree");
    CompensatedComplexSum s;
    for (const Poly& f : enumerate_monic(table.field(), n)) {
        const int lam = von_mangoldt(table.field(), f);
        if (lam) s.add(static_cast<double>(lam) * chi_eval(table, chi, f));
    }
    return s.value();
}

/// |c_chi(n) + q^{n/2} Tr(Theta^n) + lambda_inf|.
inline double newton_check(const LData& L, const cplx& c_n, int n, std::uint32_t q) {
    return std::abs(c_n + std::pow(static_cast<double>(q), 0.5 * n) * trace(L, n) + static_cast<double>(L.lambda_inf()));
}

/// Max over 32 points s = 1/2 + it, t in [-T_q/2, T_q/2), of
/// |L(s, chi) - eps (q^N)^{1/2 - s} L(1 - s, conj chi)| in the completed normalization.
inline double functional_equation_residual(const LData& L, const LData& Lbar, std::uint32_t q, double root_number_tolerance = 1e-9) {
    const int N = L.degree();
    if (N <= 0) return 0.0;
    if (Lbar.degree() != N) throw std::invalid_argument("functional equation: degree mismatch with conjugate");
    if (std::abs(std::abs(L.root_number) - 1.0) > root_number_tolerance) {
        std::ostringstream os;
        os << "functional equation: |root number| = " << std::abs(L.root_number) << " off the unit circle";
        throw InvariantViolation(os.str());
    }
    const double lq = std::log(static_cast<double>(q));
    const double Tq = 2 * std::numbers::pi / lq;
    const double r = 1.0 / std::sqrt(static_cast<double>(q));
    double worst = 0.0;
    for (int j = 0; j < 32; ++j) {
        const double t = -Tq / 2 + Tq * j / 32.0;
        const cplx u = std::polar(r, -t * lq);       // q^{-s}
        const cplx ubar = std::polar(r, t * lq);     // q^{-(1-s)}
        const cplx lhs = horner(L.completed, u);
        const cplx rhs = L.root_number * std::polar(1.0, -N * t * lq) * horner(Lbar.completed, ubar);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

/// LData for every character of the family, ascending index.
inline std::vector<LData> compute_family(const ModulusContext& ctx, unsigned threads = 0, const LTolerances& tol = {}) {
    const auto fam = family(ctx.table());
    std::vector<LData> out(fam.size());
    parallel_for(fam.size(), threads, [&](std::size_t i) { out[i] = compute_ldata(ctx, fam[i], tol); });
    return out;
}

}  // namespace fflz
