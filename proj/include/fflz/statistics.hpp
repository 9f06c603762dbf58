#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fflz/lfunction.hpp"
#include "fflz/montgomery.hpp"
#include "fflz/parallel.hpp"
#include "fflz/summation.hpp"

namespace fflz {

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

/// psi(s) = sum_{|n| <= N} psihat(n) e(n s), period 1.
class TestFunction1D {
public:
    TestFunction1D() : c_(1, 0.0) {}
    explicit TestFunction1D(int support) : N_(check_support(support)), c_(2 * static_cast<std::size_t>(support) + 1, 0.0) {}

    static TestFunction1D from_coefficients(const std::map<int, cplx>& coeffs) {
        int N = 0;
        for (const auto& [n, v] : coeffs) N = std::max(N, std::abs(n));
        TestFunction1D f(N);
        for (const auto& [n, v] : coeffs) f.set(n, v);
        return f;
    }
    static TestFunction1D delta(int n) { return from_coefficients({{n, 1.0}}); }
    /// psihat(n) = q^{-|n|/2} 2^{-|n|}
    static TestFunction1D geometric(std::uint32_t q, int support) {
        TestFunction1D f(support);
        for (int n = -support; n <= support; ++n) f.set(n, std::pow(static_cast<double>(q), -0.5 * std::abs(n)) * std::ldexp(1.0, -std::abs(n)));
        return f;
    }
    /// psihat(n) = q^{-|n|/2} / (1 + n^2)
    static TestFunction1D rational(std::uint32_t q, int support) {
        TestFunction1D f(support);
        for (int n = -support; n <= support; ++n) f.set(n, std::pow(static_cast<double>(q), -0.5 * std::abs(n)) / (1.0 + n * n));
        return f;
    }

    [[nodiscard]] int support() const noexcept { return N_; }
    [[nodiscard]] cplx hat(int n) const noexcept { return std::abs(n) > N_ ? cplx{} : c_[static_cast<std::size_t>(n + N_)]; }
    void set(int n, cplx v) {
        if (std::abs(n) > N_) throw std::out_of_range("test function: index outside support");
        c_[static_cast<std::size_t>(n + N_)] = v;
    }

    /// C(psi) = sum |psihat(n)| q^{|n|/2}
    [[nodiscard]] double c_value(std::uint32_t q) const {
        CompensatedSum s;
        for (int n = -N_; n <= N_; ++n) s.add(std::abs(hat(n)) * std::pow(static_cast<double>(q), 0.5 * std::abs(n)));
        return s.value();
    }
    /// sum psihat(n) q^{-|n|/2}
    [[nodiscard]] cplx gamma_sum(std::uint32_t q) const {
        CompensatedComplexSum s;
        for (int n = -N_; n <= N_; ++n) s.add(hat(n) * std::pow(static_cast<double>(q), -0.5 * std::abs(n)));
        return s.value();
    }

    /// psi(s)
    [[nodiscard]] cplx evaluate(double s) const { return at_angle(2 * std::numbers::pi * s); }
    /// psi(theta / 2 pi) = sum psihat(n) e^{i n theta}
    [[nodiscard]] cplx at_angle(double theta) const {
        CompensatedComplexSum s;
        for (int n = -N_; n <= N_; ++n) {
            const cplx h = hat(n);
            if (h != 0.0) s.add(h * std::polar(1.0, n * theta));
        }
        return s.value();
    }

    /// psihat recovered by the trapezoid rule on 4N + 4 equispaced points.
    [[nodiscard]] std::vector<cplx> numeric_coefficients() const {
        const int P = 4 * N_ + 4;
        std::vector<cplx> vals(static_cast<std::size_t>(P));
        for (int j = 0; j < P; ++j) vals[static_cast<std::size_t>(j)] = evaluate(static_cast<double>(j) / P);
        std::vector<cplx> out;
        for (int n = -N_; n <= N_; ++n) {
            CompensatedComplexSum s;
            for (int j = 0; j < P; ++j) s.add(vals[static_cast<std::size_t>(j)] * std::polar(1.0, -2 * std::numbers::pi * n * j / P));
            out.push_back(s.value() / static_cast<double>(P));
        }
        return out;
    }

private:
    static int check_support(int s) {
        if (s < 0) throw std::invalid_argument("test function: negative support");
        return s;
    }

    int N_ = 0;
    std::vector<cplx> c_;
};

/// Product test function psi(s1, s2) = psi1(s1) psi2(s2).
struct TestFunction2D {
    TestFunction1D psi1, psi2;

    [[nodiscard]] cplx hat(int n1, int n2) const { return psi1.hat(n1) * psi2.hat(n2); }
    [[nodiscard]] double c_value(std::uint32_t q) const { return psi1.c_value(q) * psi2.c_value(q); }
    [[nodiscard]] int support() const { return std::max(psi1.support(), psi2.support()); }
    /// psi_diag(s) = psi(s, s); coefficients are the convolution of the factors.
    [[nodiscard]] TestFunction1D diag() const {
        const int N = psi1.support() + psi2.support();
        TestFunction1D f(N);
        for (int m = -N; m <= N; ++m) {
            CompensatedComplexSum s;
            for (int n1 = -psi1.support(); n1 <= psi1.support(); ++n1) s.add(psi1.hat(n1) * psi2.hat(m - n1));
            f.set(m, s.value());
        }
        return f;
    }
};

// ---------------------------------------------------------------------------
// Per-character statistics
// ---------------------------------------------------------------------------

/// (1/(d-1)) sum_j psi(theta_j / 2 pi)
inline cplx f1(const LData& L, const TestFunction1D& psi, int d) {
    CompensatedComplexSum s;
    for (double t : L.eigenangles) s.add(psi.at_angle(t));
    return s.value() / static_cast<double>(d - 1);
}

/// Prime side of the explicit formula; c holds c_chi(0 .. n) with n >= support.
inline cplx explicit_rhs(const LData& L, const std::vector<cplx>& c, const TestFunction1D& psi, std::uint32_t q, int d) {
    const int N = psi.support();
    if (static_cast<int>(c.size()) <= N) throw std::invalid_argument("explicit_rhs: prime coefficients shorter than test-function support");
    const double dm1 = d - 1;
    CompensatedComplexSum s;
    s.add(psi.hat(0));
    s.add(-static_cast<double>(L.lambda_inf()) / dm1 * psi.gamma_sum(q));
    for (int n = 0; n <= N; ++n) {
        const auto& cn = c[static_cast<std::size_t>(n)];
        const double w = std::pow(static_cast<double>(q), -0.5 * n) / dm1;
        // c_{conj chi}(n) = conj c_chi(n)
        s.add(-w * (cn * psi.hat(n) + std::conj(cn) * psi.hat(-n)));
    }
    return s.value();
}

struct F2Value {
    cplx distinct_pairs;       // direct sum over j1 != j2
    cplx full_minus_diagonal;  // full double sum minus f1(psi_diag)/(d-1)
};

inline F2Value f2(const LData& L, const TestFunction2D& psi, int d) {
    const double norm = static_cast<double>(d - 1) * (d - 1);
    const std::size_t n = L.eigenangles.size();
    std::vector<cplx> v1(n), v2(n);
    for (std::size_t j = 0; j < n; ++j) {
        v1[j] = psi.psi1.at_angle(L.eigenangles[j]);
        v2[j] = psi.psi2.at_angle(L.eigenangles[j]);
    }
    CompensatedComplexSum direct, s1, s2;
    for (std::size_t a = 0; a < n; ++a) {
        s1.add(v1[a]);
        s2.add(v2[a]);
        for (std::size_t b = 0; b < n; ++b)
            if (a != b) direct.add(v1[a] * v2[b]);
    }
    F2Value out;
    out.distinct_pairs = direct.value() / norm;
    out.full_minus_diagonal = s1.value() * s2.value() / norm - f1(L, psi.diag(), d) / static_cast<double>(d - 1);
    return out;
}

// ---------------------------------------------------------------------------
// Family data and reports
// ---------------------------------------------------------------------------

/// L-data and prime coefficients c_chi(0 .. c_max) for every character of F_Q.
struct FamilySpectra {
    std::uint32_t q = 0;
    int d = 0;
    std::uint64_t family_size = 0;
    std::uint64_t even_count = 0;
    std::vector<LData> L;
    std::vector<std::vector<cplx>> c;
};

inline FamilySpectra build_family_spectra(const ModulusContext& ctx, int c_max, unsigned threads = 0, const LTolerances& tol = {}) {
    FamilySpectra fs;
    fs.q = ctx.q();
    fs.d = ctx.d();
    const auto fam = family(ctx.table());
    fs.family_size = fam.size();
    for (const auto& chi : fam) fs.even_count += chi.even ? 1 : 0;
    fs.L.resize(fam.size());
    fs.c.resize(fam.size());
    parallel_for(fam.size(), threads, [&](std::size_t i) {
        fs.L[i] = compute_ldata(ctx, fam[i], tol);
        fs.c[i] = c_coefficients(ctx, fam[i], fs.L[i].coeffs, c_max);
    });
    return fs;
}

struct FamilyReport {
    std::vector<std::uint64_t> index;
    std::vector<cplx> per_chi;
    cplx empirical_mean{};
    double empirical_variance = 0.0;
    cplx theory_main{};
    double error_scale = 0.0;
    double ratio = 0.0;  // |empirical - theory_main| / error_scale
    /// Further named quantities in output order (exact oracle, alternative terms, residuals).
    std::vector<std::pair<std::string, cplx>> extra;

    [[nodiscard]] std::optional<cplx> get(const std::string& key) const {
        for (const auto& [k, v] : extra)
            if (k == key) return v;
        return std::nullopt;
    }
};

/// Mean and variance E|F - EF|^2, reduced in stored (ascending index) order.
inline void aggregate(FamilyReport& r) {
    if (r.per_chi.empty()) throw std::invalid_argument("family report: empty family");
    CompensatedComplexSum m;
    for (const cplx& v : r.per_chi) m.add(v);
    r.empirical_mean = m.value() / static_cast<double>(r.per_chi.size());
    CompensatedSum var;
    for (const cplx& v : r.per_chi) var.add(std::norm(v - r.empirical_mean));
    r.empirical_variance = var.value() / static_cast<double>(r.per_chi.size());
}

inline void finish_ratio(FamilyReport& r) {
    const double dev = std::abs(r.empirical_mean - r.theory_main);
    r.ratio = r.error_scale > 0 ? dev / r.error_scale : (dev == 0 ? 0.0 : INFINITY);
}

/// Exact prime counts feeding the family expectation: Psi_q(n; Q, 1), Psi_q(n).
struct ProgressionCounts {
    int d = 0;
    std::vector<std::uint64_t> psi_one;    // index n
    std::vector<std::uint64_t> psi_total;  // index n
};

inline ProgressionCounts progression_counts(const Field& F, const Poly& Q, IrreducibleTable& primes, int n_max) {
    ProgressionCounts pc;
    pc.d = Q.deg();
    for (int n = 0; n <= n_max; ++n) {
        pc.psi_one.push_back(psi_progression(F, Q, Poly::one(), n));
        pc.psi_total.push_back(psi_total(primes, n));
    }
    return pc;
}

/// Exact family mean of F_1 from character orthogonality:
///   psihat(0) - (#even/#F)/(d-1) sum psihat(n) q^{-|n|/2}
///   - 1/(d-1) sum_n (Psi(n;Q,1) - (Psi(n) - Psi(n;Q,1) - Psi(n;Q,0))/#F)(psihat(n) + psihat(-n)) q^{-n/2}
inline cplx family_f1_exact_mean(const TestFunction1D& psi, std::uint32_t q, int d, std::uint64_t family_size, std::uint64_t even_count,
                                 const ProgressionCounts& pc) {
    const int N = psi.support();
    if (static_cast<int>(pc.psi_one.size()) <= N) throw std::invalid_argument("exact mean: prime counts shorter than support");
    const double dm1 = d - 1, nF = static_cast<double>(family_size);
    CompensatedComplexSum s;
    s.add(psi.hat(0));
    s.add(-(static_cast<double>(even_count) / nF) / dm1 * psi.gamma_sum(q));
    for (int n = 1; n <= N; ++n) {
        const auto one = static_cast<double>(pc.psi_one[static_cast<std::size_t>(n)]);
        const auto rest = static_cast<double>(pc.psi_total[static_cast<std::size_t>(n)] - pc.psi_one[static_cast<std::size_t>(n)] - psi_zero_class(d, n));
        const double w = (one - rest / nF) * std::pow(static_cast<double>(q), -0.5 * n) / dm1;
        s.add(-w * (psi.hat(n) + psi.hat(-n)));
    }
    return s.value();
}

/// psihat(0) - 1/((d-1)(q-1)) sum psihat(n) q^{-|n|/2}
inline cplx f1_theory_main(const TestFunction1D& psi, std::uint32_t q, int d) {
    return psi.hat(0) - psi.gamma_sum(q) / (static_cast<double>(d - 1) * (q - 1));
}

inline FamilyReport family_f1_report(const FamilySpectra& fs, const TestFunction1D& psi, const ProgressionCounts& pc) {
    if (fs.L.size() != fs.family_size || fs.family_size == 0) throw std::invalid_argument("family report: family incomplete");
    FamilyReport r;
    double worst_explicit = 0.0;
    for (std::size_t i = 0; i < fs.L.size(); ++i) {
        r.index.push_back(fs.L[i].chi_index);
        const cplx v = f1(fs.L[i], psi, fs.d);
        r.per_chi.push_back(v);
        worst_explicit = std::max(worst_explicit, std::abs(v - explicit_rhs(fs.L[i], fs.c[i], psi, fs.q, fs.d)));
    }
    aggregate(r);
    r.theory_main = f1_theory_main(psi, fs.q, fs.d);
    r.error_scale = psi.c_value(fs.q) / (fs.d * std::pow(static_cast<double>(fs.q), fs.d));
    finish_ratio(r);
    const cplx exact = family_f1_exact_mean(psi, fs.q, fs.d, fs.family_size, fs.even_count, pc);
    r.extra.emplace_back("exact_oracle", exact);
    r.extra.emplace_back("oracle_residual", std::abs(r.empirical_mean - exact));
    r.extra.emplace_back("even_fraction", static_cast<double>(fs.even_count) / static_cast<double>(fs.family_size));
    r.extra.emplace_back("max_explicit_residual", worst_explicit);
    return r;
}

inline FamilyReport family_f1_variance(const FamilySpectra& fs, const TestFunction1D& psi) {
    if (fs.L.size() != fs.family_size || fs.family_size == 0) throw std::invalid_argument("family report: family incomplete");
    FamilyReport r;
    for (const auto& L : fs.L) {
        r.index.push_back(L.chi_index);
        r.per_chi.push_back(f1(L, psi, fs.d));
    }
    aggregate(r);
    CompensatedSum th;
    for (int n = -psi.support(); n <= psi.support(); ++n) th.add(std::abs(n) * std::norm(psi.hat(n)));
    const double dm1 = fs.d - 1;
    r.theory_main = th.value() / (dm1 * dm1);
    const double C = psi.c_value(fs.q), dd = fs.d, qd = std::pow(static_cast<double>(fs.q), fs.d);
    r.error_scale = C * C / (dd * dd * qd) + C * C / (dd * qd * dd);
    // the report compares the variance, not the mean
    const double dev = std::abs(r.empirical_variance - r.theory_main.real());
    r.ratio = dev / r.error_scale;
    r.extra.emplace_back("variance_residual", dev);
    return r;
}

/// C_{2,Gamma}(psi)
inline cplx c2_gamma(const TestFunction2D& psi, std::uint32_t q, int d) {
    const double dm1 = d - 1;
    const int N = psi.support();
    CompensatedComplexSum a, b;
    for (int n = -N; n <= N; ++n) a.add((psi.hat(0, n) + psi.hat(n, 0)) * std::pow(static_cast<double>(q), -0.5 * std::abs(n)));
    for (int n1 = -N; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) b.add(psi.hat(n1, n2) * std::pow(static_cast<double>(q), -0.5 * (std::abs(n1) + std::abs(n2))));
    return -a.value() / dm1 + b.value() / (dm1 * dm1);
}

/// Two-level family report. theory_main subtracts E F_1(psi_diag)/(d-1), the
/// diagonal of the 1/(d-1)^2-normalized pair sum; the variant subtracting
/// E F_1(psi_diag) itself is reported as "theory_unscaled_diagonal".
inline FamilyReport family_f2_report(const FamilySpectra& fs, const TestFunction2D& psi, const ProgressionCounts& pc) {
    if (fs.L.size() != fs.family_size || fs.family_size == 0) throw std::invalid_argument("family report: family incomplete");
    FamilyReport r;
    std::vector<cplx> alt;
    double worst_route = 0.0;
    for (const auto& L : fs.L) {
        r.index.push_back(L.chi_index);
        const F2Value v = f2(L, psi, fs.d);
        r.per_chi.push_back(v.distinct_pairs);
        alt.push_back(v.full_minus_diagonal);
        worst_route = std::max(worst_route, std::abs(v.distinct_pairs - v.full_minus_diagonal));
    }
    aggregate(r);
    const TestFunction1D diag = psi.diag();
    const cplx ef1_diag = family_f1_exact_mean(diag, fs.q, fs.d, fs.family_size, fs.even_count, pc);
    const double dm1 = fs.d - 1;
    CompensatedComplexSum pair;
    for (int n = -psi.support(); n <= psi.support(); ++n) pair.add(static_cast<double>(std::abs(n)) * psi.hat(n, -n));
    const cplx c2g = c2_gamma(psi, fs.q, fs.d);
    const cplx common = psi.hat(0, 0) + pair.value() / (dm1 * dm1) + c2g / static_cast<double>(fs.q - 1);
    r.theory_main = -ef1_diag / dm1 + common;
    const double C1 = psi.psi1.c_value(fs.q), C2 = psi.psi2.c_value(fs.q), dd = fs.d, qd = std::pow(static_cast<double>(fs.q), fs.d);
    r.error_scale = (C1 + C2) / (dd * qd) + C1 * C2 / (dd * dd * qd);
    finish_ratio(r);
    CompensatedComplexSum am;
    for (const cplx& v : alt) am.add(v);
    r.extra.emplace_back("empirical_full_minus_diagonal", am.value() / static_cast<double>(alt.size()));
    r.extra.emplace_back("max_route_difference", worst_route);
    r.extra.emplace_back("exact_mean_f1_diag", ef1_diag);
    r.extra.emplace_back("c2_gamma", c2g);
    const cplx literal = -ef1_diag + common;
    r.extra.emplace_back("theory_unscaled_diagonal", literal);
    r.extra.emplace_back("ratio_unscaled_diagonal", std::abs(r.empirical_mean - literal) / r.error_scale);
    return r;
}

// ---------------------------------------------------------------------------
// Local regime
// ---------------------------------------------------------------------------

/// psihat(nu) = phihat(nu/(d-1))/(d-1) for |nu| <= radius*(d-1); values below
/// 1e-15 in magnitude are dropped.
inline TestFunction1D localize(const std::function<double(double)>& phi_hat, double radius, int d) {
    if (d < 2) throw std::invalid_argument("localize: degree must be >= 2");
    if (!(radius >= 0) || !std::isfinite(radius)) throw std::invalid_argument("localize: support radius must be finite");
    const double dm1 = d - 1;
    const int N = static_cast<int>(std::floor(radius * dm1 + 1e-12));
    TestFunction1D f(N);
    for (int nu = -N; nu <= N; ++nu) {
        const double v = phi_hat(nu / dm1);
        if (!std::isfinite(v)) throw std::invalid_argument("localize: transform not evaluable at " + std::to_string(nu / dm1));
        if (std::abs(v) >= 1e-15) f.set(nu, v / dm1);
    }
    return f;
}

inline TestFunction2D localize(const std::function<double(double)>& phi1, const std::function<double(double)>& phi2, double radius, int d) {
    return {localize(phi1, radius, d), localize(phi2, radius, d)};
}

/// W_n = (d-1)^n F_n
inline cplx local_statistic(cplx F_n, int d, int n) { return F_n * std::pow(static_cast<double>(d - 1), n); }

// ---------------------------------------------------------------------------
// Random matrix references
// ---------------------------------------------------------------------------

inline double ds_moment(int n, int N) {
    if (N < 1) throw std::invalid_argument("ds_moment: dimension must be >= 1");
    return n == 0 ? N : 0.0;
}

inline double ds_abs2(int n, int N) {
    if (N < 1) throw std::invalid_argument("ds_abs2: dimension must be >= 1");
    if (n == 0) return static_cast<double>(N) * N;
    return std::min(std::abs(n), N);
}

/// integral of Tr(A^j) Tr(A^{-k}) over U(N)
inline double ds_pair(int j, int k, int N) {
    if (N < 1) throw std::invalid_argument("ds_pair: dimension must be >= 1");
    if (j != k) return 0.0;
    return ds_abs2(k, N);
}

/// Eigenangles in [-pi, pi), sorted, of a Haar unitary: QR of a complex
/// Ginibre matrix with the columns rephased by the diagonal of R.
inline std::vector<double> haar_sample(int N, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("haar_sample: dimension must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd Z(N, N);
    for (int c = 0; c < N; ++c)
        for (int r = 0; r < N; ++r) {
            const double re = g(rng);
            const double im = g(rng);
            Z(r, c) = cplx(re, im);
        }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
    Eigen::MatrixXcd Qm = qr.householderQ() * Eigen::MatrixXcd::Identity(N, N);
    const Eigen::MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < N; ++c) {
        const cplx rd = R(c, c);
        const double a = std::abs(rd);
        Qm.col(c) *= a == 0 ? cplx(1.0) : rd / a;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Qm, false);
    std::vector<double> out;
    for (int i = 0; i < N; ++i) out.push_back(wrap_angle(std::arg(es.eigenvalues()(i))));
    std::sort(out.begin(), out.end());
    return out;
}

inline cplx trace_of_power(const std::vector<double>& angles, int n) {
    CompensatedComplexSum s;
    for (double t : angles) s.add(std::polar(1.0, static_cast<double>(n) * t));
    return s.value();
}

struct MonteCarloMoment {
    int n = 0;
    cplx mean_trace{};
    double se_trace = 0.0;     // standard error of |mean| per component, sqrt(E|Tr|^2 / M)
    double mean_abs2 = 0.0;
    double se_abs2 = 0.0;
};

/// Haar Monte Carlo for E Tr(A^n) and E|Tr(A^n)|^2; sample i uses seed + i.
inline std::vector<MonteCarloMoment> haar_trace_moments(int N, int samples, std::uint64_t seed, const std::vector<int>& ns, unsigned threads = 0) {
    if (samples < 2) throw std::invalid_argument("haar Monte Carlo: need at least 2 samples");
    std::vector<std::vector<double>> angles(static_cast<std::size_t>(samples));
    parallel_for(angles.size(), threads, [&](std::size_t i) { angles[i] = haar_sample(N, seed + i); });
    std::vector<MonteCarloMoment> out;
    const double M = samples;
    for (int n : ns) {
        MonteCarloMoment m;
        m.n = n;
        CompensatedComplexSum tr;
        CompensatedSum a2, a4;
        for (const auto& a : angles) {
            const cplx t = trace_of_power(a, n);
            tr.add(t);
            a2.add(std::norm(t));
            a4.add(std::norm(t) * std::norm(t));
        }
        m.mean_trace = tr.value() / M;
        m.mean_abs2 = a2.value() / M;
        m.se_trace = std::sqrt(std::max(0.0, m.mean_abs2 - std::norm(m.mean_trace)) / M);
        m.se_abs2 = std::sqrt(std::max(0.0, a4.value() / M - m.mean_abs2 * m.mean_abs2) / (M - 1));
        out.push_back(m);
    }
    return out;
}

/// Family averages of Tr(Theta^n), |Tr(Theta^n)|^2 and Tr(Theta^j) Tr(Theta^-k).
inline cplx family_trace_mean(const std::vector<LData>& fam, int n) {
    CompensatedComplexSum s;
    for (const auto& L : fam) s.add(trace(L, n));
    return s.value() / static_cast<double>(fam.size());
}
inline double family_trace_abs2(const std::vector<LData>& fam, int n) {
    CompensatedSum s;
    for (const auto& L : fam) s.add(std::norm(trace(L, n)));
    return s.value() / static_cast<double>(fam.size());
}
inline cplx family_trace_pair(const std::vector<LData>& fam, int j, int k) {
    CompensatedComplexSum s;
    for (const auto& L : fam) s.add(trace(L, j) * trace(L, -k));
    return s.value() / static_cast<double>(fam.size());
}

namespace detail {
template <class F>
double adaptive_trapezoid(const F& f, double a, double b, double fa, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (!std::isfinite(fm)) throw std::domain_error("quadrature: non-finite integrand");
    const double left = 0.5 * (m - a) * (fa + fm);
    const double right = 0.5 * (b - m) * (fm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 3 * tol) return left + right + (left + right - whole) / 3;
    return adaptive_trapezoid(f, a, m, fa, fm, left, tol / 2, depth - 1) + adaptive_trapezoid(f, m, b, fm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

/// sigma^2 = integral over [-radius, radius] of min(1, |t|) phihat(t)^2 dt by
/// adaptive trapezoid, split at 0, +-1 and the supplied breakpoints.
inline double rmt_variance_limit(const std::function<double(double)>& phi_hat, double radius, std::vector<double> breakpoints = {}, double tol = 1e-12) {
    if (!(radius > 0) || !std::isfinite(radius)) return 0.0;
    auto f = [&](double t) {
        const double v = phi_hat(t);
        return std::min(1.0, std::abs(t)) * v * v;
    };
    breakpoints.insert(breakpoints.end(), {-radius, radius, 0.0, -1.0, 1.0});
    std::vector<double> cuts;
    for (double b : breakpoints)
        if (b >= -radius && b <= radius) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    CompensatedSum s;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        // evaluate strictly inside each piece so one-sided limits are used at jumps
        const double a = cuts[i], b = cuts[i + 1];
        const double eps = 1e-14 * std::max(1.0, std::abs(b - a));
        const double fa = f(a + eps), fb = f(b - eps);
        if (!std::isfinite(fa) || !std::isfinite(fb)) throw std::domain_error("quadrature: non-finite integrand");
        s.add(detail::adaptive_trapezoid(f, a, b, fa, fb, 0.5 * (b - a) * (fa + fb), tol, 40));
    }
    return s.value();
}

struct CenteredMoment {
    int m = 0;
    double value = 0.0;
    double bootstrap_error = 0.0;
    double gaussian_prediction = 0.0;
};

inline double centered_moment_of(const std::vector<double>& x, int m) {
    CompensatedSum mean;
    for (double v : x) mean.add(v);
    const double mu = mean.value() / static_cast<double>(x.size());
    CompensatedSum s;
    for (double v : x) s.add(std::pow(v - mu, m));
    return s.value() / static_cast<double>(x.size());
}

/// m-th centered moment of W_1 = (d-1) F_1 over the family, with a bootstrap
/// error bar and the Gaussian value 0 or (m-1)!! sigma^m.
inline CenteredMoment centered_moment(const FamilyReport& f1_report, int d, int m, double sigma2, std::uint64_t seed = 1, int resamples = 200) {
    if (m < 1) throw std::invalid_argument("centered_moment: order must be >= 1");
    std::vector<double> w;
    for (const cplx& v : f1_report.per_chi) w.push_back((d - 1) * v.real());
    if (w.empty()) throw std::invalid_argument("centered_moment: empty family");
    CenteredMoment out;
    out.m = m;
    out.value = m == 1 ? 0.0 : centered_moment_of(w, m);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, w.size() - 1);
    CompensatedSum s1, s2;
    std::vector<double> boot(w.size());
    for (int b = 0; b < resamples; ++b) {
        for (double& v : boot) v = w[pick(rng)];
        const double mb = m == 1 ? 0.0 : centered_moment_of(boot, m);
        s1.add(mb);
        s2.add(mb * mb);
    }
    const double mb = s1.value() / resamples;
    out.bootstrap_error = std::sqrt(std::max(0.0, s2.value() / resamples - mb * mb));
    if (m % 2 == 0) {
        double df = 1.0;
        for (int k = m - 1; k > 1; k -= 2) df *= k;
        out.gaussian_prediction = df * std::pow(sigma2, m / 2.0);
    }
    return out;
}

/// Star discrepancy of {theta / 2 pi} against the uniform measure on [0, 1).
inline double discrepancy(const std::vector<double>& angles) {
    if (angles.empty()) throw std::invalid_argument("discrepancy: empty input");
    std::vector<double> x;
    x.reserve(angles.size());
    for (double t : angles) {
        double u = t / (2 * std::numbers::pi);
        u -= std::floor(u);
        x.push_back(u);
    }
    std::sort(x.begin(), x.end());
    const double N = static_cast<double>(x.size());
    double D = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        D = std::max(D, (i + 1) / N - x[i]);
        D = std::max(D, x[i] - i / N);
    }
    return D;
}

}  // namespace fflz
