#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "scorecast/garch.hpp"
#include "scorecast/predictive.hpp"

namespace scorecast {

/// HAR mean with GARCH(1,1) errors, for persistent level series such as
/// log-volatility indices:
///   ell_t = beta0 + beta1 ell_{t-1} + beta2 avg(ell_{t-5..t-1})
///         + beta3 avg(ell_{t-22..t-1}) + eps_t,
///   sigma^2_{t+1} = alpha0 + alpha1 eps_t^2 + alpha2 sigma^2_t.
struct HarGarchParams {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double beta3 = 0.0;
    double alpha0 = 1.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;

    bool valid() const {
        return std::isfinite(beta0) && std::isfinite(beta1) && std::isfinite(beta2) &&
               std::isfinite(beta3) && std::isfinite(alpha0) && std::isfinite(alpha1) &&
               std::isfinite(alpha2) && alpha0 > 0.0 && alpha1 >= 0.0 && alpha2 >= 0.0 &&
               alpha1 + alpha2 < 1.0;
    }

    double unconditional_variance() const { return alpha0 / (1.0 - alpha1 - alpha2); }
};

inline void require_valid(const HarGarchParams& p) {
    if (!p.valid()) {
        throw std::invalid_argument(
            "HarGarchParams: need alpha0 > 0, alpha1 >= 0, alpha2 >= 0, alpha1 + alpha2 < 1");
    }
}

/// Minimum history needed before the first HAR mean can be formed.
inline constexpr std::size_t kHarLags = 22;

/// One-step-ahead predictives for dates t = 23 .. n+1 given n >= 23
/// observations; out[i] is the forecast for date 23 + i (1-based), so the
/// vector has n - 21 entries and ends with the out-of-sample forecast.
///
/// The variance recursion starts at the unconditional level
/// alpha0 / (1 - alpha1 - alpha2) for date 23 and is advanced by realized
/// residuals thereafter.
inline std::vector<GaussianPredictive> har_garch_filter(const HarGarchParams& params,
                                                        const std::vector<double>& y) {
    require_valid(params);
    if (y.size() < kHarLags + 1) {
        throw std::invalid_argument("har_garch_filter: need at least 23 observations");
    }
    detail::require_finite_series(y, "har_garch_filter");

    const std::size_t n = y.size();
    // Rolling sums over the last 5 and 22 observations.
    double sum5 = 0.0, sum22 = 0.0;
    for (std::size_t i = kHarLags - 5; i < kHarLags; ++i) sum5 += y[i];
    for (std::size_t i = 0; i < kHarLags; ++i) sum22 += y[i];

    std::vector<GaussianPredictive> out;
    out.reserve(n - kHarLags + 1);
    double sigma2 = params.unconditional_variance();

    for (std::size_t t = kHarLags; t <= n; ++t) {
        // Forecast for date t+1 (1-based), using data through index t-1.
        const double mean = params.beta0 + params.beta1 * y[t - 1] +
                            params.beta2 * (sum5 / 5.0) + params.beta3 * (sum22 / 22.0);
        out.push_back({mean, std::sqrt(sigma2)});
        if (t == n) break;
        const double eps = y[t] - mean;
        sigma2 = params.alpha0 + params.alpha1 * eps * eps + params.alpha2 * sigma2;
        sum5 += y[t] - y[t - 5];
        sum22 += y[t] - y[t - 22];
    }
    return out;
}

}  // namespace scorecast
