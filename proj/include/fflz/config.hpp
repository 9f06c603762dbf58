#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fflz/algebra.hpp"
#include "fflz/statistics.hpp"

namespace fflz {

/// Line-oriented config: "key = value" pairs grouped under "[section]"
/// headers; '#' starts a comment. Keys before any header belong to section "".
/// Lines in a section that are not key=value are kept as raw data lines.
struct ConfigFile {
    struct Section {
        std::vector<std::pair<std::string, std::string>> values;
        std::vector<std::string> lines;
    };
    std::map<std::string, Section> sections;

    [[nodiscard]] std::optional<std::string> get(const std::string& section, const std::string& key) const {
        auto it = sections.find(section);
        if (it == sections.end()) return std::nullopt;
        std::optional<std::string> out;
        for (const auto& [k, v] : it->second.values)
            if (k == key) out = v;
        return out;
    }
    [[nodiscard]] bool has_section(const std::string& s) const { return sections.count(s) > 0; }
};

inline std::string trim(std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return std::string(v);
}

inline ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string line, section;
    cfg.sections[""];
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw std::invalid_argument("config line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            cfg.sections[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            cfg.sections[section].lines.push_back(t);
            continue;
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        cfg.sections[section].values.emplace_back(key, trim(std::string_view(t).substr(eq + 1)));
    }
    return cfg;
}

inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return parse_config(in);
}

inline long long parse_int(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": expected an integer, got '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument(what + ": expected an integer, got '" + s + "'");
    return v;
}

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0;
    const std::string t = trim(s);
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": expected a number, got '" + s + "'");
    }
    if (pos != t.size()) throw std::invalid_argument(what + ": expected a number, got '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

/// "lo:hi" or a single integer.
inline std::pair<int, int> parse_range(const std::string& s, const std::string& what) {
    const auto parts = split(s, ':');
    if (parts.size() == 1) {
        const int v = static_cast<int>(parse_int(parts[0], what));
        return {v, v};
    }
    if (parts.size() != 2) throw std::invalid_argument(what + ": expected lo:hi");
    const int lo = static_cast<int>(parse_int(parts[0], what)), hi = static_cast<int>(parse_int(parts[1], what));
    if (hi < lo) throw std::invalid_argument(what + ": empty range " + s);
    return {lo, hi};
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) {
        if (tok.find(':') != std::string::npos) {
            const auto [lo, hi] = parse_range(tok, what);
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else if (!tok.empty()) {
            out.push_back(static_cast<int>(parse_int(tok, what)));
        }
    }
    if (out.empty()) throw std::invalid_argument(what + ": empty list");
    return out;
}

/// Resolves q = p^e.
inline std::pair<std::uint32_t, std::uint32_t> split_prime_power(long long q) {
    if (q < 2 || q > (1LL << 31)) throw std::invalid_argument("field size q = " + std::to_string(q) + " out of range");
    for (long long p = 2; p <= q; ++p) {
        if (q % p) continue;
        std::uint32_t e = 0;
        long long r = q;
        while (r % p == 0) r /= p, ++e;
        if (r != 1) throw std::invalid_argument("field size q = " + std::to_string(q) + " is not a prime power");
        return {static_cast<std::uint32_t>(p), e};
    }
    throw std::invalid_argument("field size q = " + std::to_string(q) + " is not a prime power");
}

/// Test-function spec: a built-in name ("geometric:N", "rational:N",
/// "delta:n") or inline "n, re, im" data lines.
inline TestFunction1D parse_test_function(const std::string& spec, const std::vector<std::string>& lines, std::uint32_t q, const std::string& what) {
    if (!spec.empty()) {
        const auto parts = split(spec, ':');
        if (parts.size() != 2) throw std::invalid_argument(what + ": expected name:N, got '" + spec + "'");
        const int N = static_cast<int>(parse_int(parts[1], what));
        if (parts[0] == "geometric") return TestFunction1D::geometric(q, N);
        if (parts[0] == "rational") return TestFunction1D::rational(q, N);
        if (parts[0] == "delta") return TestFunction1D::delta(N);
        throw std::invalid_argument(what + ": unknown built-in family '" + parts[0] + "'");
    }
    std::map<int, cplx> coeffs;
    for (const auto& l : lines) {
        const auto f = split(l, ',');
        if (f.size() < 2 || f.size() > 3) throw std::invalid_argument(what + ": expected 'n, re, im', got '" + l + "'");
        const int n = static_cast<int>(parse_int(f[0], what));
        const double re = parse_double(f[1], what), im = f.size() == 3 ? parse_double(f[2], what) : 0.0;
        if (!std::isfinite(re) || !std::isfinite(im)) throw std::invalid_argument(what + ": non-finite coefficient");
        if (coeffs.count(n)) throw std::invalid_argument(what + ": coefficient " + std::to_string(n) + " given twice");
        coeffs[n] = {re, im};
    }
    if (coeffs.empty()) throw std::invalid_argument(what + ": no coefficients");
    return TestFunction1D::from_coefficients(coeffs);
}

/// Fully validated run configuration.
struct RunConfig {
    std::uint32_t p = 0, e = 1;
    std::optional<std::vector<Elem>> ext_modulus;
    std::string Q_spec;  // coefficient list or "search:d"
    std::optional<Field> field;
    Poly Q;

    std::optional<TestFunction1D> psi;                  // 1-D statistic
    std::optional<TestFunction2D> psi2;                 // 2-D statistic
    bool explicit_check = true;
    std::vector<int> moments;                           // centered moments for onelevel
    std::pair<int, int> n_range{0, 0};
    bool n_range_set = false;
    std::vector<int> rmt_n;
    int mc_samples = 2000;
    std::optional<int> mc_dimension;
    double theta1 = 0.0, theta2 = 0.5;

    std::string cache_dir;   // empty: no cache
    std::uint64_t seed = 1;
    unsigned threads = 0;    // 0: available parallelism
    std::string out_dir = ".";
};

/// Values given on the command line; each overrides the config file.
struct CliOverrides {
    std::optional<std::string> config_path, q, Q, cache_dir, out_dir;
    std::optional<long long> threads, seed;
};

inline Poly resolve_modulus(const Field& F, const std::string& spec) {
    if (spec.rfind("search:", 0) == 0) {
        const auto d = parse_int(spec.substr(7), "Q search degree");
        if (d < 2 || d > 64) throw std::invalid_argument("Q search degree must be in [2, 64]");
        return least_irreducible(F, static_cast<int>(d));
    }
    const Poly Q = poly_parse(F, spec);
    if (Q.is_zero() || Q.deg() < 2) throw std::invalid_argument("modulus Q must have degree >= 2");
    if (!Q.is_monic()) throw std::invalid_argument("modulus Q must be monic");
    if (!is_irreducible(F, Q)) throw std::invalid_argument("modulus Q = " + spec + " is reducible");
    return Q;
}

inline std::optional<TestFunction1D> section_test_function(const ConfigFile& cfg, const std::string& name, std::uint32_t q) {
    const auto spec = cfg.get("", name);
    const bool has_lines = cfg.has_section(name) && !cfg.sections.at(name).lines.empty();
    if (spec && has_lines) throw std::invalid_argument("test function '" + name + "' given both inline and as a section");
    if (spec) return parse_test_function(*spec, {}, q, name);
    if (has_lines) return parse_test_function("", cfg.sections.at(name).lines, q, name);
    return std::nullopt;
}

inline bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument(what + ": expected a boolean, got '" + s + "'");
}

/// Builds and validates a RunConfig for `command`; throws invalid_argument on
/// any usage error before computation starts.
inline RunConfig make_run_config(const ConfigFile& cfg, const CliOverrides& cli, const std::string& command) {
    RunConfig rc;
    auto val = [&](const char* key) { return cfg.get("", key); };

    if (cli.q) {
        std::tie(rc.p, rc.e) = split_prime_power(parse_int(*cli.q, "--q"));
    } else if (auto q = val("q")) {
        std::tie(rc.p, rc.e) = split_prime_power(parse_int(*q, "q"));
    } else if (auto p = val("p")) {
        rc.p = static_cast<std::uint32_t>(parse_int(*p, "p"));
        rc.e = static_cast<std::uint32_t>(parse_int(val("e").value_or("1"), "e"));
    } else {
        throw std::invalid_argument("missing field size: give q (or p and e)");
    }
    if (auto em = val("ext_modulus")) {
        std::vector<Elem> m;
        for (const auto& tok : split(*em, ',')) m.push_back(static_cast<Elem>(parse_int(tok, "ext_modulus")));
        rc.ext_modulus = m;
    }
    rc.field = field_make(rc.p, rc.e, rc.ext_modulus);
    const std::uint32_t q = rc.field->q();

    if (cli.Q) rc.Q_spec = *cli.Q;
    else if (auto Qs = val("Q")) rc.Q_spec = *Qs;
    else throw std::invalid_argument("missing modulus: give Q (coefficients or search:d)");
    rc.Q = resolve_modulus(*rc.field, rc.Q_spec);
    {
        // the unit group must fit the dlog table
        const std::uint64_t qd = ipow_checked(q, static_cast<unsigned>(rc.Q.deg()));
        if (qd - 1 > UnitGroupTable::kMaxGroupOrder) throw std::invalid_argument("modulus degree too large: q^d - 1 exceeds the dlog table limit");
    }

    rc.cache_dir = cli.cache_dir.value_or(val("cache_dir").value_or(""));
    rc.out_dir = cli.out_dir.value_or(val("out").value_or("."));
    if (cli.seed) rc.seed = static_cast<std::uint64_t>(*cli.seed);
    else if (auto s = val("seed")) rc.seed = static_cast<std::uint64_t>(parse_int(*s, "seed"));
    long long th = 0;
    if (cli.threads) th = *cli.threads;
    else if (auto t = val("threads")) th = parse_int(*t, "threads");
    if (th < 0 || th > 4096) throw std::invalid_argument("threads must be in [0, 4096]");
    rc.threads = static_cast<unsigned>(th);

    if (auto x = val("explicit_check")) rc.explicit_check = parse_bool(*x, "explicit_check");
    if (auto m = val("moments")) rc.moments = parse_int_list(*m, "moments");
    for (int m : rc.moments)
        if (m < 1) throw std::invalid_argument("moments must be >= 1");
    if (auto r = val("n_range")) {
        rc.n_range = parse_range(*r, "n_range");
        rc.n_range_set = true;
        if (rc.n_range.first < 0) throw std::invalid_argument("n_range must be nonnegative");
    }
    if (auto r = val("n")) rc.rmt_n = parse_int_list(*r, "n");
    if (auto s = val("samples")) rc.mc_samples = static_cast<int>(parse_int(*s, "samples"));
    if (auto s = val("dimension")) rc.mc_dimension = static_cast<int>(parse_int(*s, "dimension"));
    if (auto s = val("theta1")) rc.theta1 = parse_double(*s, "theta1");
    if (auto s = val("theta2")) rc.theta2 = parse_double(*s, "theta2");

    rc.psi = section_test_function(cfg, "psi", q);
    auto p1 = section_test_function(cfg, "psi1", q);
    auto p2 = section_test_function(cfg, "psi2", q);
    if (p1.has_value() != p2.has_value()) throw std::invalid_argument("2-D test function needs both psi1 and psi2");
    if (p1) rc.psi2 = TestFunction2D{*p1, *p2};

    if (command == "onelevel" && !rc.psi) throw std::invalid_argument("onelevel: missing 1-D test function (psi)");
    if (command == "twolevel" && !rc.psi2) throw std::invalid_argument("twolevel: needs a 2-D product test function (psi1 and psi2)");
    if (command == "montgomery") {
        if (!rc.n_range_set) throw std::invalid_argument("montgomery: missing n_range");
        // rows n < d are diagnostic; the range ends at 3d
        if (rc.n_range.second > 3 * rc.Q.deg()) throw std::invalid_argument("montgomery: n_range must end at or below 3d = " + std::to_string(3 * rc.Q.deg()));
    }
    if (command == "rmt") {
        if (rc.rmt_n.empty()) throw std::invalid_argument("rmt: missing n list");
        if (rc.mc_samples < 2) throw std::invalid_argument("rmt: samples must be >= 2");
        if (rc.mc_dimension && *rc.mc_dimension < 1) throw std::invalid_argument("rmt: dimension must be >= 1");
    }
    return rc;
}

}  // namespace fflz
