#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fflz/commands.hpp"

namespace {

struct CommonFlags {
    std::string config, q, Q, cache_dir, out;
    long long threads = -1, seed = -1;
    std::vector<std::string> sets;
};

void add_common(CLI::App& sub, CommonFlags& f) {
    sub.add_option("--config", f.config, "configuration file");
    sub.add_option("--q", f.q, "field size q = p^e");
    sub.add_option("--Q", f.Q, "modulus: coefficients low to high (\"1,0,1\") or search:d");
    sub.add_option("--cache-dir", f.cache_dir, "cache directory");
    sub.add_option("--threads", f.threads, "worker threads (0 = available parallelism)");
    sub.add_option("--seed", f.seed, "Monte Carlo and bootstrap seed");
    sub.add_option("--out", f.out, "output directory");
    sub.add_option("--set", f.sets, "extra config line key=value (repeatable)");
}

fflz::ConfigFile read_config(const CommonFlags& f) {
    std::ostringstream text;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw std::invalid_argument("config: cannot open " + f.config);
        text << in.rdbuf() << '\n';
    }
    // --set lines land in the top-level section
    std::ostringstream merged;
    for (const auto& s : f.sets) {
        if (s.find('=') == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        merged << s << '\n';
    }
    merged << text.str();
    std::istringstream in(merged.str());
    fflz::ConfigFile cfg = fflz::parse_config(in);
    return cfg;
}

fflz::CliOverrides overrides(const CommonFlags& f) {
    fflz::CliOverrides o;
    if (!f.q.empty()) o.q = f.q;
    if (!f.Q.empty()) o.Q = f.Q;
    if (!f.cache_dir.empty()) o.cache_dir = f.cache_dir;
    if (!f.out.empty()) o.out_dir = f.out;
    if (f.threads >= 0) o.threads = f.threads;
    if (f.seed >= 0) o.seed = f.seed;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"L-functions of Dirichlet characters over F_q(T): zeros, zero statistics, prime sums"};
    app.require_subcommand(1);
    CommonFlags flags;
    const std::vector<std::string> names = {"zeros", "onelevel", "twolevel", "montgomery", "rmt", "cache-info"};
    const std::vector<std::string> help = {"eigenangles of every character of the family", "one-level statistic F_1 and its family mean and variance",
                                           "two-level statistic F_2 for a product test function", "prime-sum deviations and family zero sums",
                                           "family trace moments against unitary-group predictions", "status of the cache files"};
    for (std::size_t i = 0; i < names.size(); ++i) add_common(*app.add_subcommand(names[i], help[i]), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        const fflz::ConfigFile cfg = read_config(flags);
        const fflz::RunConfig rc = fflz::make_run_config(cfg, overrides(flags), cmd);
        if (cmd == "cache-info") {
            std::cout << fflz::cmd_cache_info(rc);
            return 0;
        }
        fflz::CommandOutput out;
        if (cmd == "zeros") out = fflz::cmd_zeros(rc);
        else if (cmd == "onelevel") out = fflz::cmd_onelevel(rc);
        else if (cmd == "twolevel") out = fflz::cmd_twolevel(rc);
        else if (cmd == "montgomery") out = fflz::cmd_montgomery(rc);
        else out = fflz::cmd_rmt(rc);
        for (const auto& p : out.files) std::cout << "wrote " << p.string() << '\n';
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const fflz::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const fflz::CacheCorruption& e) {
        std::cerr << "cache corruption: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
