#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "scorecast/normal.hpp"
#include "scorecast/quadrature.hpp"
#include "scorecast/rng.hpp"
#include "scorecast/skew_normal.hpp"

namespace scorecast {

/// Data-generating processes used by the simulation studies.
enum class Scenario {
    GaussianGarch,  // GARCH(1,1), sigma^2_t = 1 + 0.2 y^2_{t-1} + 0.7 sigma^2_{t-1}, Gaussian
    StudentTGarch,  // same variance recursion, unit-variance Student-t innovations
    SkewNormalSv,   // log-variance AR(1) with a skew-normal marginal transform
};

struct DgpSpec {
    Scenario scenario = Scenario::GaussianGarch;
    double nu = 12.0;     // StudentTGarch degrees of freedom (> 2)
    double shape = 0.0;   // SkewNormalSv marginal shape
    std::size_t length = 1000;
    std::uint64_t seed = 1;
    std::size_t burn_in = 1000;
};

/// True GARCH recursion shared by scenarios (GaussianGarch, StudentTGarch).
inline constexpr double kDgpGarchAlpha0 = 1.0;
inline constexpr double kDgpGarchAlpha1 = 0.2;
inline constexpr double kDgpGarchBeta1 = 0.7;

/// Log-variance AR(1) of the stochastic volatility scenario:
/// h_t = mu_h (1 - phi) + phi h_{t-1} + sigma_v eta_t.
inline constexpr double kSvMeanH = -0.4581;
inline constexpr double kSvPhi = 0.9;
inline constexpr double kSvSigmaV = 0.4172;

/// Marginal CDF of z_t = exp(h_t/2) eps_t under the stationary law of h:
/// a normal scale mixture, integrated with a 64-node Gauss-Hermite rule
/// whose weights are normalized so that F(0) = 0.5 exactly.
inline double sv_marginal_cdf(double z) {
    if (std::isnan(z)) throw std::invalid_argument("sv_marginal_cdf: NaN input");
    struct Mixture {
        std::vector<double> scale;   // exp(-h_i / 2) at the quadrature points
        std::vector<double> weight;  // normalized to sum to one
    };
    static const Mixture mix = [] {
        const QuadratureRule gh = gauss_hermite(64);
        const double sd_h = kSvSigmaV / std::sqrt(1.0 - kSvPhi * kSvPhi);
        Mixture m;
        double total = 0.0;
        for (double w : gh.weights) total += w;
        for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
            const double h = kSvMeanH + std::sqrt(2.0) * sd_h * gh.nodes[i];
            m.scale.push_back(std::exp(-0.5 * h));
            m.weight.push_back(gh.weights[i] / total);
        }
        return m;
    }();
    double f = 0.0;
    for (std::size_t i = 0; i < mix.scale.size(); ++i) {
        f += mix.weight[i] * norm_cdf(z * mix.scale[i]);
    }
    return f;
}

struct SimulationDetail {
    std::vector<double> y;
    /// Per-date latent state: the conditional variance sigma^2_t for the
    /// GARCH scenarios, the log variance h_t for the SV scenario.
    std::vector<double> state;
};

/// Simulates `spec.length` observations after discarding `spec.burn_in`
/// initial steps. Draw order is fixed (one state draw, then one innovation
/// draw per date where applicable), so a seed pins the exact path.
inline SimulationDetail simulate_detail(const DgpSpec& spec) {
    if (spec.length == 0) throw std::invalid_argument("simulate: length must be positive");
    if (spec.scenario == Scenario::StudentTGarch && !(spec.nu > 2.0)) {
        throw std::invalid_argument("simulate: Student-t scenario needs nu > 2");
    }
    Rng rng(spec.seed);
    SimulationDetail out;
    out.y.reserve(spec.length);
    out.state.reserve(spec.length);

    const std::size_t total = spec.burn_in + spec.length;

    if (spec.scenario == Scenario::SkewNormalSv) {
        const SkewNormal target = SkewNormal::standardized(spec.shape);
        double h = kSvMeanH;
        for (std::size_t t = 0; t < total; ++t) {
            h = kSvMeanH * (1.0 - kSvPhi) + kSvPhi * h + kSvSigmaV * rng.normal();
            const double z = std::exp(0.5 * h) * rng.normal();
            if (t < spec.burn_in) continue;
            const double u = sv_marginal_cdf(z);
            out.y.push_back(skew_normal_quantile(target, u));
            out.state.push_back(h);
        }
        return out;
    }

    double sigma2 = kDgpGarchAlpha0 / (1.0 - kDgpGarchAlpha1 - kDgpGarchBeta1);
    double prev_y = 0.0;
    bool first = true;
    for (std::size_t t = 0; t < total; ++t) {
        if (!first) {
            sigma2 = kDgpGarchAlpha0 + kDgpGarchAlpha1 * prev_y * prev_y +
                     kDgpGarchBeta1 * sigma2;
        }
        first = false;
        const double eps = spec.scenario == Scenario::GaussianGarch
                               ? rng.normal()
                               : rng.student_t_unit_variance(spec.nu);
        prev_y = std::sqrt(sigma2) * eps;
        if (t >= spec.burn_in) {
            out.y.push_back(prev_y);
            out.state.push_back(sigma2);
        }
    }
    return out;
}

inline std::vector<double> simulate(const DgpSpec& spec) { return simulate_detail(spec).y; }

}  // namespace scorecast
