#pragma once

#include <cmath>
#include <stdexcept>

#include "scorecast/normal.hpp"
#include "scorecast/quadrature.hpp"

namespace scorecast {

/// Owen's T function T(h, a) = (1/2pi) int_0^a exp(-h^2(1+x^2)/2)/(1+x^2) dx.
///
/// Arguments are first reduced with T(h,-a) = -T(h,a), T(-h,a) = T(h,a) and,
/// for a > 1,
///   T(h,a) = Phi(h)/2 + Phi(ah)/2 - Phi(h)Phi(ah) - T(ah, 1/a),
/// so the quadrature only ever runs on [0, a] with a <= 1, where 48-point
/// Gauss-Legendre resolves the integrand to near machine precision.
inline double owen_t(double h, double a) {
    if (!std::isfinite(h) || !std::isfinite(a)) {
        throw std::invalid_argument("owen_t: non-finite input");
    }
    if (a == 0.0) return 0.0;
    if (a < 0.0) return -owen_t(h, -a);
    h = std::fabs(h);
    if (a > 1.0) {
        const double ah = a * h;
        return 0.5 * (norm_cdf(h) + norm_cdf(ah)) - norm_cdf(h) * norm_cdf(ah) -
               owen_t(ah, 1.0 / a);
    }

    static const QuadratureRule rule = gauss_legendre(48, 0.0, 1.0);
    const double h2 = 0.5 * h * h;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = a * rule.nodes[i];
        const double t = 1.0 + x * x;
        sum += rule.weights[i] * std::exp(-h2 * t) / t;
    }
    return a * sum / (2.0 * M_PI);
}

/// Skew-normal distribution with location xi, scale omega and shape lambda:
/// density (2/omega) phi(z) Phi(lambda z), z = (x - xi)/omega.
struct SkewNormal {
    double xi = 0.0;
    double omega = 1.0;
    double lambda = 0.0;

    /// The member of the family with zero mean and unit variance for the
    /// given shape.
    static SkewNormal standardized(double shape) {
        const double delta = shape / std::sqrt(1.0 + shape * shape);
        const double mu = delta * std::sqrt(2.0 / M_PI);
        const double omega = 1.0 / std::sqrt(1.0 - mu * mu);
        return {-omega * mu, omega, shape};
    }

    double pdf(double x) const {
        const double z = (x - xi) / omega;
        return 2.0 / omega * norm_pdf(z) * norm_cdf(lambda * z);
    }

    double cdf(double x) const {
        const double z = (x - xi) / omega;
        return norm_cdf(z) - 2.0 * owen_t(z, lambda);
    }
};

/// Quantile of the skew-normal by safeguarded Newton iteration: steps that
/// would leave the current bracket fall back to bisection. Converges to
/// |cdf(x) - u| below ~1e-13.
inline double skew_normal_quantile(const SkewNormal& d, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("skew_normal_quantile: u must be in (0, 1)");
    }
    // The normal quantile at u brackets the answer after a few unit steps.
    double x = d.xi + d.omega * norm_quantile(u);
    double lo = x, hi = x;
    while (d.cdf(lo) > u) lo -= d.omega;
    while (d.cdf(hi) < u) hi += d.omega;

    for (int it = 0; it < 100; ++it) {
        const double f = d.cdf(x) - u;
        if (std::fabs(f) < 1e-14) return x;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double dens = d.pdf(x);
        double next = dens > 0.0 ? x - f / dens : x;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) < 1e-13 * (1.0 + std::fabs(x))) return next;
        x = next;
    }
    return x;
}

}  // namespace scorecast
