#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fflz/commands.hpp"

using namespace fflz;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fflz_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ConfigFile cfg_of(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

RunConfig run_config(const std::string& text, const std::string& command, const fs::path& out, const std::string& cache = "") {
    CliOverrides o;
    o.out_dir = out.string();
    if (!cache.empty()) o.cache_dir = cache;
    return make_run_config(cfg_of(text), o, command);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) rows.push_back(split(line, ','));
    return rows;
}

Json summary(const fs::path& p) { return Json::parse(slurp(p)); }

cplx json_cplx(const Json& j) { return {j["re"].get<double>(), j["im"].get<double>()}; }

}  // namespace

TEST(Config, SectionsCommentsAndDataLines) {
    const auto c = cfg_of("# header\nq = 3   # trailing\nQ=1,0,1\n[psi]\n0, 1\n 1, 0.5, -0.25\n[other]\nk = v\n");
    EXPECT_EQ(c.get("", "q").value(), "3");
    EXPECT_EQ(c.get("", "Q").value(), "1,0,1");
    ASSERT_TRUE(c.has_section("psi"));
    EXPECT_EQ(c.sections.at("psi").lines.size(), 2u);
    EXPECT_EQ(c.get("other", "k").value(), "v");
    EXPECT_FALSE(c.get("", "k").has_value());
    EXPECT_THROW(cfg_of("[broken\n"), std::invalid_argument);
    EXPECT_THROW(cfg_of(" = 3\n"), std::invalid_argument);
}

TEST(Config, FieldAndModulusResolution) {
    const auto out = scratch("resolve");
    const RunConfig a = run_config("q = 9\nQ = search:2\n", "zeros", out);
    EXPECT_EQ(a.p, 3u);
    EXPECT_EQ(a.e, 2u);
    EXPECT_EQ(a.Q, least_irreducible(*a.field, 2));
    const RunConfig b = run_config("p = 3\ne = 1\nQ = 1,0,1\n", "zeros", out);
    EXPECT_EQ(b.Q, Poly({1, 0, 1}));
    EXPECT_THROW(run_config("q = 6\nQ = 1,0,1\n", "zeros", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,1,1\n", "zeros", out), std::invalid_argument);   // (T+2)^2
    EXPECT_THROW(run_config("q = 3\nQ = 1,1\n", "zeros", out), std::invalid_argument);     // degree 1
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,2\n", "zeros", out), std::invalid_argument);   // not monic
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,3\n", "zeros", out), std::invalid_argument);   // digit outside F_3
    EXPECT_THROW(run_config("Q = 1,0,1\n", "zeros", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\n", "zeros", out), std::invalid_argument);
}

TEST(Config, CommandLineOverridesFile) {
    CliOverrides o;
    o.q = "5";
    o.Q = "search:3";
    o.threads = 2;
    o.seed = 17;
    const RunConfig rc = make_run_config(cfg_of("q = 3\nQ = 1,0,1\nthreads = 1\nseed = 4\n"), o, "zeros");
    EXPECT_EQ(rc.field->q(), 5u);
    EXPECT_EQ(rc.Q.deg(), 3);
    EXPECT_EQ(rc.threads, 2u);
    EXPECT_EQ(rc.seed, 17u);
}

TEST(Config, CommandSpecificValidation) {
    const auto out = scratch("validate");
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\n", "onelevel", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\npsi = geometric:3\n", "twolevel", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\npsi1 = delta:0\n", "twolevel", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\n", "montgomery", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\nn_range = 5:3\n", "montgomery", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\nn_range = 0:7\n", "montgomery", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\n", "rmt", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\nn = 1:3\nsamples = 1\n", "rmt", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\npsi = wavelet:3\n", "onelevel", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\npsi = delta:0\n[psi]\n0, 1\n", "onelevel", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\n[psi]\n0, x\n", "onelevel", out), std::invalid_argument);
    EXPECT_THROW(run_config("q = 3\nQ = 1,0,1\n[psi]\n1, 1\n1, 2\n", "onelevel", out), std::invalid_argument);

    const RunConfig rc = run_config("q = 3\nQ = 1,0,1\n[psi]\n0, 1\n-2, 0.5, 0.25\n", "onelevel", out);
    ASSERT_TRUE(rc.psi.has_value());
    EXPECT_EQ(rc.psi->support(), 2);
    EXPECT_EQ(rc.psi->hat(-2), cplx(0.5, 0.25));
    EXPECT_EQ(rc.psi->hat(1), cplx(0.0));
}

TEST(Report, SeventeenDigitsRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5261129449194057, 6.02214076e23, 2.2250738585072014e-308}) EXPECT_EQ(std::stod(fmt17(v)), v);
    EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}

TEST(Commands, ZerosRowsAndWarmCache) {
    const auto dir = scratch("zeros");
    const std::string text = "q = 3\nQ = 1,0,1\n";
    cmd_zeros(run_config(text, "zeros", dir / "cold", (dir / "cache").string()));
    const auto rows = csv(dir / "cold" / "zeros.csv");
    // 7 characters: 4 odd with one angle each, 3 even with none
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"character_index", "angle_index", "theta", "gamma", "rh_residual"}));
    const double lq = std::log(3.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(std::stoull(rows[i][0]) % 2, 1u);
        EXPECT_NEAR(std::stod(rows[i][3]), std::stod(rows[i][2]) / lq, 1e-15);
        EXPECT_LT(std::stod(rows[i][4]), 1e-9);
    }
    cmd_zeros(run_config(text, "zeros", dir / "warm", (dir / "cache").string()));
    EXPECT_EQ(slurp(dir / "cold" / "zeros.csv"), slurp(dir / "warm" / "zeros.csv"));
    EXPECT_EQ(slurp(dir / "cold" / "zeros_summary.json"), slurp(dir / "warm" / "zeros_summary.json"));
    cmd_zeros(run_config(text, "zeros", dir / "nocache"));
    EXPECT_EQ(slurp(dir / "cold" / "zeros.csv"), slurp(dir / "nocache" / "zeros.csv"));
}

TEST(Commands, CacheVersionMismatchRecomputes) {
    const auto dir = scratch("version");
    const std::string text = "q = 3\nQ = 1,2,0,1\n";
    cmd_zeros(run_config(text, "zeros", dir / "a", (dir / "cache").string()));
    const RunConfig rc = run_config(text, "zeros", dir / "b", (dir / "cache").string());
    const Cache cache(rc.cache_dir);
    const CacheKey key = cache_key(*rc.field, rc.Q);
    for (const auto& p : {cache.units_path(key), cache.zeros_path(key)}) {
        std::string bytes = slurp(p);
        bytes[8] = static_cast<char>(bytes[8] + 1);  // version field follows the 8-byte magic
        std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
    }
    EXPECT_NE(cmd_cache_info(rc).find("stale-version"), std::string::npos);
    cmd_zeros(rc);
    EXPECT_EQ(slurp(dir / "a" / "zeros.csv"), slurp(dir / "b" / "zeros.csv"));
    EXPECT_EQ(cmd_cache_info(rc).find("stale-version"), std::string::npos);
}

TEST(Commands, CorruptCacheIsReported) {
    const auto dir = scratch("corrupt");
    const std::string text = "q = 3\nQ = 1,2,0,1\n";
    const RunConfig rc = run_config(text, "zeros", dir / "a", (dir / "cache").string());
    cmd_zeros(rc);
    const Cache cache(rc.cache_dir);
    const CacheKey key = cache_key(*rc.field, rc.Q);
    const std::string good = slurp(cache.zeros_path(key));

    std::string flipped = good;
    flipped[flipped.size() - 3] ^= 0x40;
    std::ofstream(cache.zeros_path(key), std::ios::binary | std::ios::trunc) << flipped;
    EXPECT_THROW(cmd_zeros(rc), CacheCorruption);
    EXPECT_NE(cmd_cache_info(rc).find("corrupt"), std::string::npos);

    std::ofstream(cache.zeros_path(key), std::ios::binary | std::ios::trunc) << good.substr(0, good.size() / 2);
    EXPECT_THROW(cmd_zeros(rc), CacheCorruption);

    std::ofstream(cache.zeros_path(key), std::ios::binary | std::ios::trunc) << "NOTACACHEFILE....";
    EXPECT_THROW(cmd_zeros(rc), CacheCorruption);

    // a dlog table that is not a bijection
    fs::remove(cache.zeros_path(key));
    detail::ByteWriter w;
    const UnitGroupTable t(*rc.field, make_modulus(*rc.field, rc.Q));
    w.put(static_cast<std::uint32_t>(t.generator().size()));
    for (std::size_t i = 0; i < t.generator().size(); ++i) w.put(static_cast<std::uint32_t>(t.generator()[i]));
    auto dl = t.dlog_table();
    std::swap(dl[3], dl[4]);
    dl[5] = dl[3];
    w.put(static_cast<std::uint64_t>(dl.size()));
    for (auto v : dl) w.put(v);
    detail::atomic_write(cache.units_path(key), detail::frame(kUnitsMagic, kUnitsCacheVersion, key, w.bytes()));
    EXPECT_THROW(cmd_zeros(rc), CacheCorruption);
}

TEST(Commands, OneLevelDeltaAndExplicitCheck) {
    const auto dir = scratch("onelevel");
    cmd_onelevel(run_config("q = 3\nQ = 1,2,0,1\npsi = delta:0\n", "onelevel", dir / "delta"));
    const Json s = summary(dir / "delta" / "onelevel_summary.json");
    const double nF = 25, even = 12, d = 3;  // q^3 - 2 characters; (q^3 - 1)/(q - 1) - 1 even
    EXPECT_EQ(s["family_size"].get<int>(), 25);
    EXPECT_EQ(s["even_count"].get<int>(), 12);
    EXPECT_NEAR(json_cplx(s["mean"]["empirical"]).real(), 1.0 - (even / nF) / (d - 1), 1e-14);
    EXPECT_TRUE(s["mean"].contains("exact_oracle"));
    EXPECT_TRUE(s["mean"].contains("theory_main"));
    EXPECT_TRUE(s["mean"].contains("error_scale"));
    EXPECT_TRUE(s["mean"].contains("ratio"));

    cmd_onelevel(run_config("q = 3\nQ = 1,2,0,1\npsi = geometric:9\nexplicit_check = true\n", "onelevel", dir / "geo"));
    double worst = 0.0;
    std::size_t residual_rows = 0;
    for (const auto& r : csv(dir / "geo" / "onelevel_per_chi.csv")) {
        if (r[1] != "explicit_residual") continue;
        ++residual_rows;
        worst = std::max(worst, std::stod(r[2]));
    }
    EXPECT_EQ(residual_rows, 25u);
    EXPECT_LT(worst, 1e-8);
    EXPECT_LT(json_cplx(summary(dir / "geo" / "onelevel_summary.json")["mean"]["max_explicit_residual"]).real(), 1e-8);
}

TEST(Commands, OneLevelSummaryIndependentOfThreads) {
    const auto dir = scratch("threads");
    const std::string text = "q = 3\nQ = search:4\npsi = rational:8\nmoments = 2,4\n";
    CliOverrides o1, o3;
    o1.out_dir = (dir / "t1").string();
    o1.threads = 1;
    o3.out_dir = (dir / "t3").string();
    o3.threads = 3;
    cmd_onelevel(make_run_config(cfg_of(text), o1, "onelevel"));
    cmd_onelevel(make_run_config(cfg_of(text), o3, "onelevel"));
    EXPECT_EQ(slurp(dir / "t1" / "onelevel_summary.json"), slurp(dir / "t3" / "onelevel_summary.json"));
    EXPECT_EQ(slurp(dir / "t1" / "onelevel_per_chi.csv"), slurp(dir / "t3" / "onelevel_per_chi.csv"));
}

TEST(Commands, TwoLevelDeltaPairsAndRoutes) {
    const auto dir = scratch("twolevel");
    const RunConfig rc = run_config("q = 3\nQ = search:4\npsi1 = delta:0\npsi2 = delta:0\n", "twolevel", dir);
    cmd_twolevel(rc);
    // independent oracle: mean of D(D-1)/(d-1)^2 with D the number of zeros
    const UnitGroupTable t(*rc.field, make_modulus(*rc.field, rc.Q));
    double acc = 0.0;
    for (const auto& chi : family(t)) {
        const double D = 3 - chi.lambda_inf();
        acc += D * (D - 1) / 9.0;
    }
    const Json s = summary(dir / "twolevel_summary.json");
    EXPECT_NEAR(json_cplx(s["two_level"]["empirical"]).real(), acc / 79.0, 1e-14);
    EXPECT_TRUE(s["two_level"].contains("c2_gamma"));

    cmd_twolevel(run_config("q = 3\nQ = search:3\npsi1 = geometric:4\npsi2 = rational:3\n", "twolevel", dir / "g"));
    std::map<std::string, cplx> distinct, full;
    for (const auto& r : csv(dir / "g" / "twolevel_per_chi.csv")) {
        if (r[1] == "f2_distinct_pairs") distinct[r[0]] = {std::stod(r[2]), std::stod(r[3])};
        if (r[1] == "f2_full_minus_diagonal") full[r[0]] = {std::stod(r[2]), std::stod(r[3])};
    }
    ASSERT_EQ(distinct.size(), 25u);
    ASSERT_EQ(full.size(), 25u);
    for (const auto& [k, v] : distinct) EXPECT_LT(std::abs(v - full[k]), 1e-12) << k;
}

TEST(Commands, MontgomeryDiagnosticRowsAndZeroSums) {
    const auto dir = scratch("montgomery");
    cmd_montgomery(run_config("q = 3\nQ = 1,2,0,1\nn_range = 0:9\n", "montgomery", dir));
    const auto rows = csv(dir / "montgomery.csv");
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0][0], "n");
    for (int n = 0; n < 3; ++n) {
        const auto& r = rows[static_cast<std::size_t>(n) + 1];
        EXPECT_EQ(r[1], "0");
        // D(n) = -q^n / (q^3 - 1) exactly: num/den of Psi/Phi is q^n / 26 in lowest terms
        const auto qn = static_cast<long long>(std::pow(3, n));
        EXPECT_EQ(std::stoll(r[2]), n == 0 ? 0 : qn);
        EXPECT_EQ(std::stoll(r[3]), n == 0 ? 1 : 26);
        // Psi_q(0) = 0, so the zero row has no deviation
        EXPECT_DOUBLE_EQ(std::stod(r[4]), n == 0 ? 0.0 : -static_cast<double>(qn) / 26.0);
        EXPECT_EQ(r[6], "1");
    }
    for (std::size_t i = 4; i < rows.size(); ++i) {
        ASSERT_NE(rows[i][5], "undefined");
        EXPECT_GT(std::stod(rows[i][5]), 0.0);
    }
    const auto z = csv(dir / "zero_sums.csv");
    ASSERT_EQ(z.size(), 11u);
    // n = 0: sum of degrees over the family
    EXPECT_NEAR(std::stod(z[1][1]), 25.0 * 2 - 12, 1e-12);
    for (std::size_t i = 1; i < z.size(); ++i) EXPECT_LT(std::abs(std::stod(z[i][2])), 1e-9);
}

TEST(Commands, RmtClosedFormsAndSeed) {
    const auto dir = scratch("rmt");
    const std::string text = "q = 3\nQ = search:4\nn = 1:5\nsamples = 300\nseed = 11\n";
    cmd_rmt(run_config(text, "rmt", dir / "a"));
    cmd_rmt(run_config(text, "rmt", dir / "b"));
    EXPECT_EQ(slurp(dir / "a" / "rmt.csv"), slurp(dir / "b" / "rmt.csv"));
    const auto rows = csv(dir / "a" / "rmt.csv");
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const int n = std::stoi(rows[i][0]);
        EXPECT_EQ(std::stod(rows[i][4]), 0.0);
        EXPECT_EQ(std::stod(rows[i][5]), std::min(n, 3));
    }
    for (const auto& r : csv(dir / "a" / "rmt_pairs.csv")) {
        if (r[0] == "j" || r[0] == r[1]) continue;
        EXPECT_EQ(std::stod(r[4]), 0.0);
    }
    cmd_rmt(run_config(text + "seed = 12\n", "rmt", dir / "c"));
    EXPECT_NE(slurp(dir / "a" / "rmt.csv"), slurp(dir / "c" / "rmt.csv"));
}

#ifdef FFLZ_TOOL_PATH
namespace {
int run_tool(const std::string& args) {
    const int status = std::system((std::string(FFLZ_TOOL_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}
}  // namespace

TEST(Tool, ExitCodes) {
    const auto dir = scratch("tool");
    EXPECT_EQ(run_tool("zeros --q 3 --Q 1,0,1 --out " + (dir / "o").string() + " --cache-dir " + (dir / "c").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "o" / "zeros.csv"));
    EXPECT_EQ(run_tool("zeros --q 3 --Q 1,1,1"), 2);
    EXPECT_EQ(run_tool("onelevel --q 3 --Q 1,0,1"), 2);
    EXPECT_EQ(run_tool("zeros --q 3 --Q 1,0,1 --bogus"), 2);
    EXPECT_EQ(run_tool(""), 2);
    for (const auto& e : fs::directory_iterator(dir / "c"))
        if (e.path().filename().string().rfind("zeros-", 0) == 0) std::ofstream(e.path(), std::ios::binary | std::ios::trunc) << "garbage";
    EXPECT_EQ(run_tool("zeros --q 3 --Q 1,0,1 --out " + (dir / "o").string() + " --cache-dir " + (dir / "c").string()), 4);
    EXPECT_EQ(run_tool("onelevel --q 3 --Q 1,0,1 --set psi=delta:0 --out " + (dir / "p").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "p" / "onelevel_summary.json"));
}
#endif
