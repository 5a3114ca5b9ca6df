#pragma once

#include <cmath>
#include <stdexcept>

#include "scorecast/normal.hpp"

namespace scorecast {

/// One-step-ahead Gaussian predictive distribution N(mean, sd^2).
struct GaussianPredictive {
    double mean = 0.0;
    double sd = 1.0;

    bool valid() const {
        return std::isfinite(mean) && std::isfinite(sd) && sd > 0.0;
    }
};

inline void require_valid(const GaussianPredictive& f) {
    if (!f.valid()) {
        throw std::invalid_argument("GaussianPredictive: sd must be finite and positive");
    }
}

inline double predictive_logpdf(const GaussianPredictive& f, double y) {
    const double z = (y - f.mean) / f.sd;
    return norm_logpdf(z) - std::log(f.sd);
}

inline double predictive_cdf(const GaussianPredictive& f, double y) {
    return norm_cdf((y - f.mean) / f.sd);
}

/// Value-at-Risk at level p: the p-quantile of the predictive, mean + sd * z_p.
inline double gaussian_var(const GaussianPredictive& f, double p) {
    require_valid(f);
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gaussian_var: p must be in (0, 1)");
    return f.mean + f.sd * norm_quantile(p);
}

/// Expected shortfall at level p, the tail mean E[Y | Y <= VaR_p]:
/// mean - sd * phi(z_p) / p in closed form.
inline double gaussian_es(const GaussianPredictive& f, double p) {
    require_valid(f);
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gaussian_es: p must be in (0, 1)");
    return f.mean - f.sd * norm_pdf(norm_quantile(p)) / p;
}

/// P(Y > b) under the predictive.
inline double prob_exceed(const GaussianPredictive& f, double b) {
    require_valid(f);
    if (std::isnan(b)) throw std::invalid_argument("prob_exceed: threshold is NaN");
    return norm_sf((b - f.mean) / f.sd);
}

}  // namespace scorecast
