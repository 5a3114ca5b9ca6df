#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "scorecast/predictive.hpp"

namespace scorecast {

/// GARCH(1,1) with constant mean:
///   y_t = mu + sigma_t eps_t,
///   sigma^2_{t+1} = alpha0 + alpha1 (y_t - mu)^2 + beta1 sigma^2_t.
struct GarchParams {
    double mu = 0.0;
    double alpha0 = 1.0;
    double alpha1 = 0.0;
    double beta1 = 0.0;

    bool valid() const {
        return std::isfinite(mu) && std::isfinite(alpha0) && std::isfinite(alpha1) &&
               std::isfinite(beta1) && alpha0 > 0.0 && alpha1 >= 0.0 && beta1 >= 0.0 &&
               alpha1 + beta1 < 1.0;
    }

    double unconditional_variance() const { return alpha0 / (1.0 - alpha1 - beta1); }
};

inline void require_valid(const GarchParams& p) {
    if (!p.valid()) {
        throw std::invalid_argument(
            "GarchParams: need alpha0 > 0, alpha1 >= 0, beta1 >= 0, alpha1 + beta1 < 1");
    }
}

namespace detail {

inline void require_finite_series(const std::vector<double>& y, const char* who) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) {
            throw std::invalid_argument(std::string(who) + ": non-finite value at index " +
                                        std::to_string(i));
        }
    }
}

}  // namespace detail

/// Conditional variance path sigma^2_1 .. sigma^2_{n+1} for a series of n
/// observations. The final entry is the one-step-ahead forecast variance.
///
/// sigma^2_1 is set to the sample variance of `y`; when that is unavailable
/// or non-positive (n < 2 or constant data) it falls back to the
/// unconditional level alpha0 / (1 - alpha1 - beta1), which keeps the path
/// strictly positive.
inline std::vector<double> garch_filter(const GarchParams& params, const std::vector<double>& y) {
    require_valid(params);
    if (y.empty()) throw std::invalid_argument("garch_filter: empty series");
    detail::require_finite_series(y, "garch_filter");

    const std::size_t n = y.size();
    double init = params.unconditional_variance();
    if (n >= 2) {
        double m = 0.0;
        for (double v : y) m += v;
        m /= static_cast<double>(n);
        double s = 0.0;
        for (double v : y) s += (v - m) * (v - m);
        s /= static_cast<double>(n - 1);
        if (s > 0.0 && std::isfinite(s)) init = s;
    }

    std::vector<double> sigma2(n + 1);
    sigma2[0] = init;
    for (std::size_t t = 0; t < n; ++t) {
        const double e = y[t] - params.mu;
        sigma2[t + 1] = params.alpha0 + params.alpha1 * e * e + params.beta1 * sigma2[t];
    }
    return sigma2;
}

/// Gaussian predictives N(mu, sigma^2_t) for t = 1 .. n+1, built on the
/// filtered variance path. predictives[t-1] is the forecast for date t made
/// at date t-1; the last entry is the out-of-sample forecast.
inline std::vector<GaussianPredictive> garch_predictives(const GarchParams& params,
                                                         const std::vector<double>& y) {
    std::vector<double> sigma2 = garch_filter(params, y);
    std::vector<GaussianPredictive> out(sigma2.size());
    for (std::size_t i = 0; i < sigma2.size(); ++i) {
        out[i] = {params.mu, std::sqrt(sigma2[i])};
    }
    return out;
}

}  // namespace scorecast
