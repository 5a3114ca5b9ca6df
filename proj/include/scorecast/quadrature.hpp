#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace scorecast {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule (physicists' convention, weight exp(-x^2)); the
/// weights sum to sqrt(pi). Nodes are Newton-refined from the standard
/// asymptotic initial guesses, using the normalized Hermite recurrence so
/// that intermediate values stay bounded for large n.
inline QuadratureRule gauss_hermite(std::size_t n) {
    if (n < 2) throw std::invalid_argument("gauss_hermite: need n >= 2");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    const std::size_t m = (n + 1) / 2;
    const double pi_m4 = 0.75112554446494248286;  // pi^(-1/4)
    double z = 0.0;

    for (std::size_t i = 0; i < m; ++i) {
        // Asymptotic guesses; from the third root on, extrapolate from the
        // two previously found roots (z still holds the last one).
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }

        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pi_m4;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-14) break;
        }

        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

/// Gauss-Legendre rule on [a, b].
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n < 2) throw std::invalid_argument("gauss_legendre: need n >= 2");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    const std::size_t m = (n + 1) / 2;
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);

    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-14) break;
        }
        rule.nodes[i] = xm - xl * z;
        rule.nodes[n - 1 - i] = xm + xl * z;
        rule.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

}  // namespace scorecast
