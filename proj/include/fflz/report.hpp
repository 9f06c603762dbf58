#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fflz/statistics.hpp"

namespace fflz {

/// 17 significant digits: round-trip exact for doubles.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comma-separated table; fields are written verbatim.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : width_(header.size()) { line(header); }

    void row(const std::vector<std::string>& fields) {
        if (fields.size() != width_) throw std::logic_error("csv: row width differs from header");
        line(fields);
    }
    [[nodiscard]] std::string str() const { return os_.str(); }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }

private:
    void line(const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) os_ << (i ? "," : "") << f[i];
        os_ << '\n';
        ++rows_;
    }
    std::size_t width_;
    std::size_t rows_ = 0;
    std::ostringstream os_;
};

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

using Json = nlohmann::ordered_json;

/// Non-finite values become the strings "inf", "-inf", "nan".
inline Json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline Json json_complex(cplx z) { return Json{{"re", json_number(z.real())}, {"im", json_number(z.imag())}}; }

/// Summary block with the fields empirical, theory_main, error_scale, ratio
/// followed by the report's extra quantities.
inline Json family_report_json(const FamilyReport& r) {
    Json j;
    j["empirical"] = json_complex(r.empirical_mean);
    j["empirical_variance"] = json_number(r.empirical_variance);
    j["theory_main"] = json_complex(r.theory_main);
    j["error_scale"] = json_number(r.error_scale);
    j["ratio"] = json_number(r.ratio);
    for (const auto& [k, v] : r.extra) j[k] = json_complex(v);
    return j;
}

/// Per-character CSV rows (character_index, statistic, value_re, value_im).
inline void per_chi_rows(CsvTable& t, const std::vector<std::uint64_t>& index, const std::string& statistic, const std::vector<cplx>& values) {
    for (std::size_t i = 0; i < index.size(); ++i) t.row({std::to_string(index[i]), statistic, fmt17(values[i].real()), fmt17(values[i].imag())});
}

}  // namespace fflz
