#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scorecast/normal.hpp"
#include "scorecast/rng.hpp"
#include "scorecast/scoring.hpp"
#include "scorecast/stats.hpp"

namespace scorecast {

/// Conditional coverage test for a VaR hit sequence. The joint statistic is
/// by construction the sum of the unconditional coverage and independence
/// components; p-values are chi-square with 1, 1 and 2 degrees of freedom.
struct CoverageTestResult {
    std::size_t n = 0;
    std::size_t n_hits = 0;
    double hit_rate = 0.0;
    double lr_uc = 0.0;
    double p_uc = 1.0;
    double lr_ind = 0.0;
    double p_ind = 1.0;
    double lr_cc = 0.0;
    double p_cc = 1.0;
};

namespace detail {

// 0 * log(anything) == 0 by the likelihood convention.
inline double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

}  // namespace detail

inline CoverageTestResult christoffersen_cc(const std::vector<int>& hits, double p) {
    if (hits.size() < 2) throw std::invalid_argument("christoffersen_cc: need at least 2 hits");
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("christoffersen_cc: p must be in (0, 1)");
    }
    for (int h : hits) {
        if (h != 0 && h != 1) throw std::invalid_argument("christoffersen_cc: hits must be 0/1");
    }
    CoverageTestResult r;
    r.n = hits.size();
    for (int h : hits) r.n_hits += static_cast<std::size_t>(h);
    const double n = static_cast<double>(r.n);
    const double n1 = static_cast<double>(r.n_hits);
    const double n0 = n - n1;
    r.hit_rate = n1 / n;

    const double pi_hat = r.hit_rate;
    const double ll_null = detail::xlogy(n1, p) + detail::xlogy(n0, 1.0 - p);
    const double ll_alt = detail::xlogy(n1, pi_hat) + detail::xlogy(n0, 1.0 - pi_hat);
    r.lr_uc = -2.0 * (ll_null - ll_alt);
    r.p_uc = chi2_sf(r.lr_uc, 1.0);

    double n00 = 0.0, n01 = 0.0, n10 = 0.0, n11 = 0.0;
    for (std::size_t t = 1; t < hits.size(); ++t) {
        if (hits[t - 1] == 0) {
            (hits[t] == 0 ? n00 : n01) += 1.0;
        } else {
            (hits[t] == 0 ? n10 : n11) += 1.0;
        }
    }
    const double pi01 = n00 + n01 > 0.0 ? n01 / (n00 + n01) : 0.0;
    const double pi11 = n10 + n11 > 0.0 ? n11 / (n10 + n11) : 0.0;
    const double pi1 = (n01 + n11) / (n - 1.0);
    const double ll_markov = detail::xlogy(n00, 1.0 - pi01) + detail::xlogy(n01, pi01) +
                             detail::xlogy(n10, 1.0 - pi11) + detail::xlogy(n11, pi11);
    const double ll_pooled = detail::xlogy(n01 + n11, pi1) + detail::xlogy(n00 + n10, 1.0 - pi1);
    r.lr_ind = -2.0 * (ll_pooled - ll_markov);
    if (r.lr_ind < 0.0) r.lr_ind = 0.0;  // guards tiny negative round-off
    r.p_ind = chi2_sf(r.lr_ind, 1.0);

    r.lr_cc = r.lr_uc + r.lr_ind;
    r.p_cc = chi2_sf(r.lr_cc, 2.0);
    return r;
}

/// Unconditional test of equal predictive accuracy on two positively
/// oriented score series. The mean differential is studentized with a
/// Bartlett-kernel long-run variance, truncation floor(4 (n/100)^{2/9}),
/// and compared against the standard normal.
struct EpaTestResult {
    double mean_diff = 0.0;   // mean(score_a - score_b)
    double hac_se = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t lags = 0;
    std::size_t n = 0;
};

inline EpaTestResult gw_test(const std::vector<double>& score_a,
                             const std::vector<double>& score_b) {
    if (score_a.size() != score_b.size()) {
        throw std::invalid_argument("gw_test: score series lengths differ");
    }
    if (score_a.size() < 2) throw std::invalid_argument("gw_test: need at least 2 dates");
    const std::size_t n = score_a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(score_a[i]) || !std::isfinite(score_b[i])) {
            throw std::invalid_argument("gw_test: non-finite score");
        }
        d[i] = score_a[i] - score_b[i];
    }
    EpaTestResult r;
    r.n = n;
    r.mean_diff = mean(d);
    r.lags = static_cast<std::size_t>(
        std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));

    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = lag; t < n; ++t) {
            s += (d[t] - r.mean_diff) * (d[t - lag] - r.mean_diff);
        }
        return s / static_cast<double>(n);
    };
    double lrv = autocov(0);
    for (std::size_t l = 1; l <= r.lags && l < n; ++l) {
        const double w = 1.0 - static_cast<double>(l) / (static_cast<double>(r.lags) + 1.0);
        lrv += 2.0 * w * autocov(l);
    }
    if (lrv < autocov(0) * 1e-12) lrv = autocov(0);  // kernel can turn tiny lrv negative

    if (lrv <= 0.0) {
        // Zero-variance differential: identical scores carry no evidence, but a
        // constant nonzero gap is conclusive.
        r.hac_se = 0.0;
        if (r.mean_diff == 0.0) {
            r.statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.statistic = std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff);
            r.p_value = 0.0;
        }
        return r;
    }
    r.hac_se = std::sqrt(lrv / static_cast<double>(n));
    r.statistic = r.mean_diff / r.hac_se;
    r.p_value = 2.0 * norm_sf(std::fabs(r.statistic));
    return r;
}

/// Murphy diagram of two joint VaR/ES forecast paths: the mean elementary
/// score of each path on a grid of thresholds, their difference, and a
/// moving-block bootstrap confidence band for the difference.
struct MurphyOptions {
    std::size_t grid_size = 201;
    std::size_t bootstrap_reps = 1000;
    std::size_t block_length = 0;  // 0: ceil(n^(1/3))
    double ci_level = 0.95;
    std::uint64_t seed = 20240901;
};

struct MurphyCurve {
    std::vector<double> eta;
    std::vector<double> mean_a;
    std::vector<double> mean_b;
    std::vector<double> diff;      // mean_a - mean_b, exact antisymmetry under swap
    std::vector<double> ci_lower;  // percentile bootstrap band for diff
    std::vector<double> ci_upper;
};

/// Threshold grid spanning the realized sample, padded one standard
/// deviation below the minimum so the left tail of the elementary scores is
/// visible.
inline std::vector<double> murphy_eta_grid(const std::vector<double>& realized,
                                           std::size_t grid_size = 201) {
    if (realized.size() < 2) throw std::invalid_argument("murphy_eta_grid: need n >= 2");
    if (grid_size < 2) throw std::invalid_argument("murphy_eta_grid: need at least 2 points");
    const auto [mn, mx] = std::minmax_element(realized.begin(), realized.end());
    const double lo = *mn - sample_sd(realized);
    const double hi = *mx;
    std::vector<double> grid(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) {
        grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_size - 1);
    }
    return grid;
}

inline MurphyCurve murphy_diagram(const std::vector<VarEsPair>& fc_a,
                                  const std::vector<VarEsPair>& fc_b,
                                  const std::vector<double>& realized, double p,
                                  const MurphyOptions& options = {}) {
    const std::size_t n = realized.size();
    if (fc_a.size() != n || fc_b.size() != n) {
        throw std::invalid_argument("murphy_diagram: input lengths differ");
    }
    if (n < 2) throw std::invalid_argument("murphy_diagram: need at least 2 dates");
    if (!(options.ci_level > 0.0 && options.ci_level < 1.0)) {
        throw std::invalid_argument("murphy_diagram: ci_level must be in (0, 1)");
    }

    MurphyCurve out;
    out.eta = murphy_eta_grid(realized, options.grid_size);
    const std::size_t m = out.eta.size();
    out.mean_a.assign(m, 0.0);
    out.mean_b.assign(m, 0.0);
    out.diff.assign(m, 0.0);
    out.ci_lower.assign(m, 0.0);
    out.ci_upper.assign(m, 0.0);

    // d[k][t], laid out per threshold so bootstrap accumulation is linear.
    std::vector<std::vector<double>> d(m, std::vector<double>(n));
    for (std::size_t k = 0; k < m; ++k) {
        double sa = 0.0, sb = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double a = fz_joint_score(fc_a[t], realized[t], out.eta[k], p);
            const double b = fz_joint_score(fc_b[t], realized[t], out.eta[k], p);
            sa += a;
            sb += b;
            d[k][t] = a - b;
        }
        out.mean_a[k] = sa / static_cast<double>(n);
        out.mean_b[k] = sb / static_cast<double>(n);
        out.diff[k] = out.mean_a[k] - out.mean_b[k];
    }

    if (options.bootstrap_reps == 0) return out;

    std::size_t block = options.block_length;
    if (block == 0) block = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
    block = std::min(block, n);
    const std::size_t n_starts = n - block + 1;
    const std::size_t n_blocks = (n + block - 1) / block;

    // Prefix sums turn each resampled block into one subtraction per
    // threshold, so a replicate costs O(grid * n / block) instead of
    // O(grid * n).
    std::vector<std::vector<double>> prefix(m, std::vector<double>(n + 1, 0.0));
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t t = 0; t < n; ++t) prefix[k][t + 1] = prefix[k][t] + d[k][t];
    }

    Rng rng(options.seed);
    std::vector<std::pair<std::size_t, std::size_t>> segments(n_blocks);  // (start, length)
    std::vector<std::vector<double>> boot(m, std::vector<double>(options.bootstrap_reps));
    for (std::size_t rep = 0; rep < options.bootstrap_reps; ++rep) {
        std::size_t pos = 0;
        for (std::size_t bturn = 0; bturn < n_blocks; ++bturn) {
            const std::size_t start = rng.uniform_index(n_starts);
            const std::size_t len = std::min(block, n - pos);
            segments[bturn] = {start, len};
            pos += len;
        }
        for (std::size_t k = 0; k < m; ++k) {
            double s = 0.0;
            for (const auto& [start, len] : segments) {
                s += prefix[k][start + len] - prefix[k][start];
            }
            boot[k][rep] = s / static_cast<double>(n);
        }
    }
    const double tail = 0.5 * (1.0 - options.ci_level);
    for (std::size_t k = 0; k < m; ++k) {
        out.ci_lower[k] = empirical_quantile(boot[k], tail);
        out.ci_upper[k] = empirical_quantile(boot[k], 1.0 - tail);
    }
    return out;
}

}  // namespace scorecast
