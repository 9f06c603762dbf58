#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "fflz/errors.hpp"

namespace fflz {

using cplx = std::complex<double>;

/// p(z) and p'(z) by Horner; coefficients constant term first.
inline std::pair<cplx, cplx> horner_with_derivative(const std::vector<cplx>& c, cplx z) {
    cplx p = c.back(), dp = 0.0;
    for (std::size_t i = c.size() - 1; i-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[i];
    }
    return {p, dp};
}

inline cplx horner(const std::vector<cplx>& c, cplx z) {
    cplx p = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) p = p * z + c[i];
    return p;
}

struct AberthOptions {
    double radius = 1.0;  // starting circle
    double tolerance = 1e-13;
    int max_iterations = 300;
    /// Iterates closer than this (relative) are treated as one multiple root.
    double cluster_radius = 1e-5;
};

inline std::vector<cplx> derivative(const std::vector<cplx>& c) {
    std::vector<cplx> out;
    for (std::size_t i = 1; i < c.size(); ++i) out.push_back(static_cast<double>(i) * c[i]);
    return out;
}

/// Replaces each cluster of m iterates by one root of multiplicity m: the
/// cluster mean refined by Newton on p^{(m-1)}, for which the root is simple.
inline void refine_clusters(const std::vector<cplx>& c, std::vector<cplx>& z, double radius) {
    const std::size_t N = z.size();
    std::vector<std::size_t> label(N);
    for (std::size_t i = 0; i < N; ++i) label[i] = i;
    auto find = [&](std::size_t i) {
        while (label[i] != i) i = label[i] = label[label[i]];
        return i;
    };
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            if (std::abs(z[i] - z[j]) < radius * std::max(1.0, std::abs(z[i]))) label[find(j)] = find(i);
    for (std::size_t root = 0; root < N; ++root) {
        if (find(root) != root) continue;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < N; ++i)
            if (find(i) == root) members.push_back(i);
        if (members.size() < 2) continue;
        cplx mean = 0.0;
        for (std::size_t i : members) mean += z[i];
        mean /= static_cast<double>(members.size());
        std::vector<cplx> dc = c;
        for (std::size_t k = 1; k < members.size(); ++k) dc = derivative(dc);
        for (int it = 0; it < 8; ++it) {
            const auto [p, dp] = horner_with_derivative(dc, mean);
            if (dp == 0.0) break;
            const cplx step = p / dp;
            mean -= step;
            if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(mean))) break;
        }
        for (std::size_t i : members) z[i] = mean;
    }
}

/// Backward-error style residual |p(z)| / sum |c_i| |z|^i.
inline double relative_residual(const std::vector<cplx>& c, cplx z) {
    double scale = 0.0, zp = 1.0;
    for (const cplx& ci : c) {
        scale += std::abs(ci) * zp;
        zp *= std::abs(z);
    }
    return scale == 0.0 ? 0.0 : std::abs(horner(c, z)) / scale;
}

/// All roots of sum c_i z^i by Aberth-Ehrlich simultaneous iteration from
/// radius * e^{i(2 pi j / N + 1/2)}, followed by one Newton step per root.
/// Throws InvariantViolation if the corrections do not fall below tolerance.
inline std::vector<cplx> aberth_roots(const std::vector<cplx>& c, const AberthOptions& opt = {}) {
    if (c.empty()) return {};
    const std::size_t N = c.size() - 1;
    if (N == 0) return {};
    if (c.back() == 0.0) throw InvariantViolation("root finder: vanishing leading coefficient");
    if (N == 1) return {-c[0] / c[1]};

    std::vector<cplx> z(N);
    for (std::size_t j = 0; j < N; ++j) {
        z[j] = std::polar(opt.radius, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N) + 0.5);
    }
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iterations && !converged; ++it) {
        double worst = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            const auto [p, dp] = horner_with_derivative(c, z[j]);
            if (p == 0.0) continue;
            const cplx w = p / dp;
            cplx s = 0.0;
            for (std::size_t k = 0; k < N; ++k)
                if (k != j) s += 1.0 / (z[j] - z[k]);
            const cplx corr = w / (1.0 - w * s);
            // Gauss-Seidel update: later roots see the new value
            z[j] -= corr;
            worst = std::max(worst, std::abs(corr) / std::max(1.0, std::abs(z[j])));
        }
        converged = worst < opt.tolerance;
    }
    if (!converged) {
        std::ostringstream os;
        os.precision(3);
        os << "root finder: no convergence after " << it << " iterations; residuals";
        for (const cplx& r : z) os << ' ' << relative_residual(c, r);
        throw InvariantViolation(os.str());
    }
    for (cplx& r : z) {
        const auto [p, dp] = horner_with_derivative(c, r);
        if (dp != 0.0) {
            const cplx step = p / dp;
            // a polish step larger than the convergence scale means a multiple root; keep the iterate
            if (std::abs(step) < 1e-8) r -= step;
        }
    }
    refine_clusters(c, z, opt.cluster_radius);
    return z;
}

/// Coefficients of prod_j (1 - a_j u), constant term first.
inline std::vector<cplx> expand_from_inverse_roots(const std::vector<cplx>& a) {
    std::vector<cplx> out{1.0};
    for (const cplx& aj : a) {
        out.push_back(0.0);
        for (std::size_t i = out.size() - 1; i > 0; --i) out[i] -= aj * out[i - 1];
    }
    return out;
}

}  // namespace fflz
