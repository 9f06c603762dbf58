#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fflz/cache.hpp"
#include "fflz/config.hpp"
#include "fflz/lfunction.hpp"
#include "fflz/montgomery.hpp"
#include "fflz/report.hpp"
#include "fflz/statistics.hpp"

namespace fflz {

/// Files written by a command, in write order.
struct CommandOutput {
    std::vector<std::filesystem::path> files;
};

/// Shared state of one run: field, modulus, unit group (from cache when
/// possible) and lazily built prime tables.
class RunContext {
public:
    explicit RunContext(const RunConfig& rc)
        : rc_(rc), F_(*rc.field), mod_(make_modulus(F_, rc.Q)), key_(cache_key(F_, rc.Q)), primes_(F_) {
        if (!rc.cache_dir.empty()) cache_.emplace(rc.cache_dir);
        std::optional<UnitGroupTable> t;
        if (cache_) t = cache_->load_units(F_, mod_, key_);
        if (!t) {
            t.emplace(F_, mod_);
            if (cache_) cache_->store_units(*t, key_);
        }
        table_ = std::make_shared<const UnitGroupTable>(std::move(*t));
    }

    [[nodiscard]] const RunConfig& config() const noexcept { return rc_; }
    [[nodiscard]] const Field& field() const noexcept { return F_; }
    [[nodiscard]] const Poly& Q() const noexcept { return mod_.Q; }
    [[nodiscard]] int d() const noexcept { return mod_.d; }
    [[nodiscard]] std::uint32_t q() const noexcept { return F_.q(); }
    [[nodiscard]] const UnitGroupTable& table() const noexcept { return *table_; }
    IrreducibleTable& primes() noexcept { return primes_; }

    const ModulusContext& modulus_context() {
        if (!ctx_) ctx_ = std::make_unique<ModulusContext>(table_, primes_);
        return *ctx_;
    }

    /// Family L-data, read from the eigenangle cache or computed and stored.
    const std::vector<LData>& family_ldata() {
        if (fam_) return *fam_;
        if (cache_) fam_ = cache_->load_zeros(*table_, key_);
        if (!fam_) {
            fam_ = compute_family(modulus_context(), rc_.threads);
            if (cache_) cache_->store_zeros(*fam_, key_);
        }
        return *fam_;
    }

    /// Family spectra with prime coefficients c_chi(0 .. c_max); none when c_max < 0.
    FamilySpectra spectra(int c_max) {
        const auto& L = family_ldata();
        FamilySpectra fs;
        fs.q = q();
        fs.d = d();
        fs.family_size = L.size();
        for (const auto& x : L) fs.even_count += x.even ? 1 : 0;
        fs.L = L;
        fs.c.resize(L.size());
        if (c_max >= 0) {
            const ModulusContext& ctx = modulus_context();
            parallel_for(L.size(), rc_.threads, [&](std::size_t i) {
                fs.c[i] = c_coefficients(ctx, table_->character(L[i].chi_index), L[i].coeffs, c_max);
            });
        }
        return fs;
    }

    [[nodiscard]] std::filesystem::path out(const std::string& name) const { return std::filesystem::path(rc_.out_dir) / name; }

    [[nodiscard]] Json header(const std::string& command) const {
        Json j;
        j["command"] = command;
        j["q"] = q();
        j["p"] = F_.p();
        j["e"] = F_.e();
        j["Q"] = poly_to_string(mod_.Q);
        j["d"] = d();
        j["family_size"] = table_->order() - 1;
        return j;
    }

private:
    const RunConfig& rc_;
    Field F_;
    Modulus mod_;
    CacheKey key_;
    std::optional<Cache> cache_;
    std::shared_ptr<const UnitGroupTable> table_;
    IrreducibleTable primes_;
    std::unique_ptr<ModulusContext> ctx_;
    std::optional<std::vector<LData>> fam_;
};

inline void emit(CommandOutput& out, const std::filesystem::path& p, const std::string& text) {
    write_text_file(p, text);
    out.files.push_back(p);
}

/// Eigenangle table: one row per (character, angle), each carrying the
/// character's RH residual.
inline CommandOutput cmd_zeros(const RunConfig& rc) {
    RunContext run(rc);
    const auto& fam = run.family_ldata();
    const double lq = std::log(static_cast<double>(run.q()));
    CsvTable t({"character_index", "angle_index", "theta", "gamma", "rh_residual"});
    double worst = 0.0;
    for (const auto& L : fam) {
        worst = std::max(worst, L.rh_residual);
        for (std::size_t j = 0; j < L.eigenangles.size(); ++j)
            t.row({std::to_string(L.chi_index), std::to_string(j), fmt17(L.eigenangles[j]), fmt17(L.eigenangles[j] / lq), fmt17(L.rh_residual)});
    }
    Json s = run.header("zeros");
    s["rows"] = t.rows() - 1;
    s["max_rh_residual"] = json_number(worst);
    CommandOutput out;
    emit(out, run.out("zeros.csv"), t.str());
    emit(out, run.out("zeros_summary.json"), s.dump(2) + "\n");
    return out;
}

/// One-level statistic F_1: per-character values and the family mean and
/// variance against their exact and asymptotic predictions.
inline CommandOutput cmd_onelevel(const RunConfig& rc) {
    if (!rc.psi) throw std::invalid_argument("onelevel: missing 1-D test function (psi)");
    RunContext run(rc);
    const TestFunction1D& psi = *rc.psi;
    const int N = psi.support();
    const FamilySpectra fs = run.spectra(N);
    const ProgressionCounts pc = progression_counts(run.field(), run.Q(), run.primes(), N);
    const FamilyReport mean = family_f1_report(fs, psi, pc);
    const FamilyReport var = family_f1_variance(fs, psi);
    const double worst = mean.get("max_explicit_residual")->real();
    if (rc.explicit_check && !(worst < 1e-8))
        throw InvariantViolation("onelevel: explicit formula residual " + fmt17(worst) + " exceeds 1e-8");

    CsvTable t({"character_index", "statistic", "value_re", "value_im"});
    per_chi_rows(t, mean.index, "f1", mean.per_chi);
    if (rc.explicit_check) {
        std::vector<cplx> rhs, res;
        for (std::size_t i = 0; i < fs.L.size(); ++i) {
            rhs.push_back(explicit_rhs(fs.L[i], fs.c[i], psi, fs.q, fs.d));
            res.push_back(std::abs(mean.per_chi[i] - rhs.back()));
        }
        per_chi_rows(t, mean.index, "explicit_rhs", rhs);
        per_chi_rows(t, mean.index, "explicit_residual", res);
    }

    Json s = run.header("onelevel");
    s["even_count"] = fs.even_count;
    s["support"] = N;
    s["c_psi"] = json_number(psi.c_value(fs.q));
    s["mean"] = family_report_json(mean);
    s["variance"] = family_report_json(var);
    if (!rc.moments.empty()) {
        Json ms = Json::array();
        const double sigma2 = var.theory_main.real() * (fs.d - 1) * (fs.d - 1);
        for (int m : rc.moments) {
            const CenteredMoment cm = centered_moment(mean, fs.d, m, sigma2, rc.seed);
            ms.push_back(Json{{"m", m}, {"value", json_number(cm.value)}, {"bootstrap_error", json_number(cm.bootstrap_error)},
                              {"gaussian_prediction", json_number(cm.gaussian_prediction)}});
        }
        s["centered_moments"] = ms;
    }
    CommandOutput out;
    emit(out, run.out("onelevel_per_chi.csv"), t.str());
    emit(out, run.out("onelevel_summary.json"), s.dump(2) + "\n");
    return out;
}

/// Two-level statistic F_2 for a product test function, by both pair routes.
inline CommandOutput cmd_twolevel(const RunConfig& rc) {
    if (!rc.psi2) throw std::invalid_argument("twolevel: needs a 2-D product test function (psi1 and psi2)");
    RunContext run(rc);
    const TestFunction2D& psi = *rc.psi2;
    const FamilySpectra fs = run.spectra(-1);
    const ProgressionCounts pc = progression_counts(run.field(), run.Q(), run.primes(), psi.diag().support());
    const FamilyReport r = family_f2_report(fs, psi, pc);

    CsvTable t({"character_index", "statistic", "value_re", "value_im"});
    std::vector<cplx> full;
    for (const auto& L : fs.L) full.push_back(f2(L, psi, fs.d).full_minus_diagonal);
    per_chi_rows(t, r.index, "f2_distinct_pairs", r.per_chi);
    per_chi_rows(t, r.index, "f2_full_minus_diagonal", full);

    Json s = run.header("twolevel");
    s["even_count"] = fs.even_count;
    s["support"] = {psi.psi1.support(), psi.psi2.support()};
    s["two_level"] = family_report_json(r);
    CommandOutput out;
    emit(out, run.out("twolevel_per_chi.csv"), t.str());
    emit(out, run.out("twolevel_summary.json"), s.dump(2) + "\n");
    return out;
}

/// Prime deviations D(n), exponents theta-hat(n) and family zero sums S(n).
inline CommandOutput cmd_montgomery(const RunConfig& rc) {
    if (!rc.n_range_set) throw std::invalid_argument("montgomery: missing n_range");
    RunContext run(rc);
    const auto [lo, hi] = rc.n_range;
    const MontgomeryReport rep = deviation_and_theta(run.field(), run.Q(), run.primes(), lo, hi);
    CsvTable t({"n", "psi_progression", "psi_over_phi_num", "psi_over_phi_den", "deviation", "theta_hat", "diagnostic", "brun_titchmarsh"});
    for (const auto& r : rep.rows)
        t.row({std::to_string(r.n), std::to_string(r.psi_progression), int128_to_string(r.psi_over_phi.num), int128_to_string(r.psi_over_phi.den),
               fmt17(r.deviation.to_double()), r.theta_hat ? fmt17(*r.theta_hat) : "undefined", r.diagnostic ? "1" : "0", fmt17(r.brun_titchmarsh)});

    const auto& fam = run.family_ldata();
    const double scale = zero_sum_scale(run.d(), run.q(), rc.theta1, rc.theta2);
    CsvTable z({"n", "zero_sum_re", "zero_sum_im", "scale", "ratio"});
    double worst_imag = 0.0;
    for (int n = lo; n <= hi; ++n) {
        const cplx S = zero_sum(fam, n);
        worst_imag = std::max(worst_imag, std::abs(S.imag()));
        z.row({std::to_string(n), fmt17(S.real()), fmt17(S.imag()), fmt17(scale), fmt17(std::abs(S) / scale)});
    }

    Json s = run.header("montgomery");
    s["n_range"] = {lo, hi};
    s["theta_min"] = rep.theta_min ? json_number(*rep.theta_min) : Json("undefined");
    s["theta_median"] = rep.theta_median ? json_number(*rep.theta_median) : Json("undefined");
    s["theta1"] = rc.theta1;
    s["theta2"] = rc.theta2;
    s["max_zero_sum_imag"] = json_number(worst_imag);
    CommandOutput out;
    emit(out, run.out("montgomery.csv"), t.str());
    emit(out, run.out("zero_sums.csv"), z.str());
    emit(out, run.out("montgomery_summary.json"), s.dump(2) + "\n");
    return out;
}

/// Family trace moments against the Diaconis-Shahshahani closed forms and a
/// seeded Haar Monte Carlo.
inline CommandOutput cmd_rmt(const RunConfig& rc) {
    if (rc.rmt_n.empty()) throw std::invalid_argument("rmt: missing n list");
    RunContext run(rc);
    const auto& fam = run.family_ldata();
    const int N = run.d() - 1;
    const int Nmc = rc.mc_dimension.value_or(N);
    const auto mc = haar_trace_moments(Nmc, rc.mc_samples, rc.seed, rc.rmt_n, rc.threads);

    CsvTable t({"n", "family_trace_re", "family_trace_im", "family_abs2", "ds_trace", "ds_abs2", "mc_trace_re", "mc_trace_im", "mc_trace_se",
                "mc_abs2", "mc_abs2_se", "ds_trace_mc", "ds_abs2_mc"});
    for (std::size_t i = 0; i < rc.rmt_n.size(); ++i) {
        const int n = rc.rmt_n[i];
        const cplx m = family_trace_mean(fam, n);
        const auto& c = mc[i];
        t.row({std::to_string(n), fmt17(m.real()), fmt17(m.imag()), fmt17(family_trace_abs2(fam, n)), fmt17(ds_moment(n, N)), fmt17(ds_abs2(n, N)),
               fmt17(c.mean_trace.real()), fmt17(c.mean_trace.imag()), fmt17(c.se_trace), fmt17(c.mean_abs2), fmt17(c.se_abs2),
               fmt17(ds_moment(n, Nmc)), fmt17(ds_abs2(n, Nmc))});
    }
    CsvTable g({"j", "k", "family_re", "family_im", "ds"});
    for (int j : rc.rmt_n)
        for (int k : rc.rmt_n) {
            const cplx v = family_trace_pair(fam, j, k);
            g.row({std::to_string(j), std::to_string(k), fmt17(v.real()), fmt17(v.imag()), fmt17(ds_pair(j, k, N))});
        }

    Json s = run.header("rmt");
    s["matrix_size"] = N;
    s["mc_dimension"] = Nmc;
    s["mc_samples"] = rc.mc_samples;
    s["seed"] = rc.seed;
    CommandOutput out;
    emit(out, run.out("rmt.csv"), t.str());
    emit(out, run.out("rmt_pairs.csv"), g.str());
    emit(out, run.out("rmt_summary.json"), s.dump(2) + "\n");
    return out;
}

/// Status of the cache files for the configured (field, modulus).
inline std::string cmd_cache_info(const RunConfig& rc) {
    if (rc.cache_dir.empty()) throw std::invalid_argument("cache-info: no cache directory (set cache_dir or --cache-dir)");
    const CacheKey key = cache_key(*rc.field, rc.Q);
    const Cache cache(rc.cache_dir);
    std::ostringstream os;
    os << "key " << key.hex() << " (" << key.text << ")\n";
    for (const auto& info : {inspect_cache_file(cache.units_path(key), kUnitsMagic, kUnitsCacheVersion, key),
                             inspect_cache_file(cache.zeros_path(key), kZerosMagic, kZerosCacheVersion, key)}) {
        os << info.path.string() << ": " << info.status;
        if (info.status != "absent") os << ", version " << info.version << ", " << info.bytes << " bytes";
        os << '\n';
    }
    return os.str();
}

}  // namespace fflz
