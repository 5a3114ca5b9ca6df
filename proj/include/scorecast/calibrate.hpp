#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "scorecast/garch.hpp"
#include "scorecast/har_garch.hpp"
#include "scorecast/nelder_mead.hpp"
#include "scorecast/scoring.hpp"
#include "scorecast/stats.hpp"

namespace scorecast {

enum class ModelKind { Garch, HarGarch };

using ModelParams = std::variant<GarchParams, HarGarchParams>;

inline ModelKind model_kind(const ModelParams& p) {
    return std::holds_alternative<GarchParams>(p) ? ModelKind::Garch : ModelKind::HarGarch;
}

/// Additive lower bound on the variance intercept. Optimizing a degenerate
/// window (e.g. constant data) drives alpha0 onto this bound instead of
/// running off to -infinity in log space, so the search still terminates.
inline constexpr double kAlpha0Floor = 1e-12;

namespace detail {

inline double logit(double p, const char* who) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument(std::string(who) +
                                    ": parameters on or outside the constraint boundary");
    }
    return std::log(p / (1.0 - p));
}

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

inline double log_floor(double alpha0, const char* who) {
    if (!(alpha0 > kAlpha0Floor)) {
        throw std::invalid_argument(std::string(who) + ": alpha0 must exceed the lower bound");
    }
    return std::log(alpha0 - kAlpha0Floor);
}

}  // namespace detail

/// Maps constrained model parameters to an unconstrained vector:
/// alpha0 via log (above an additive floor), the persistence alpha1+beta1
/// and its alpha1 share via logit, mean parameters via identity. Parameters
/// exactly on a constraint boundary have no finite image and are rejected.
inline std::vector<double> transform_params(const ModelParams& params) {
    if (const auto* g = std::get_if<GarchParams>(&params)) {
        require_valid(*g);
        const double s = g->alpha1 + g->beta1;
        return {g->mu, detail::log_floor(g->alpha0, "transform_params"),
                detail::logit(s, "transform_params"),
                detail::logit(g->alpha1 / s, "transform_params")};
    }
    const auto& h = std::get<HarGarchParams>(params);
    require_valid(h);
    const double s = h.alpha1 + h.alpha2;
    return {h.beta0,
            h.beta1,
            h.beta2,
            h.beta3,
            detail::log_floor(h.alpha0, "transform_params"),
            detail::logit(s, "transform_params"),
            detail::logit(h.alpha1 / s, "transform_params")};
}

/// Inverse of transform_params. Total since every u maps into the closure
/// of the constraint set; saturation of the logistic at +-1 can land on the
/// persistence boundary, which the criterion rejects by penalty.
inline ModelParams untransform_params(ModelKind kind, const std::vector<double>& u) {
    if (kind == ModelKind::Garch) {
        if (u.size() != 4) throw std::invalid_argument("untransform_params: need 4 values");
        GarchParams g;
        g.mu = u[0];
        g.alpha0 = kAlpha0Floor + std::exp(u[1]);
        const double s = detail::logistic(u[2]);
        const double frac = detail::logistic(u[3]);
        g.alpha1 = s * frac;
        g.beta1 = s * (1.0 - frac);
        return g;
    }
    if (u.size() != 7) throw std::invalid_argument("untransform_params: need 7 values");
    HarGarchParams h;
    h.beta0 = u[0];
    h.beta1 = u[1];
    h.beta2 = u[2];
    h.beta3 = u[3];
    h.alpha0 = kAlpha0Floor + std::exp(u[4]);
    const double s = detail::logistic(u[5]);
    const double frac = detail::logistic(u[6]);
    h.alpha1 = s * frac;
    h.alpha2 = s * (1.0 - frac);
    return h;
}

namespace detail {

/// In-sample scored pairs: predictives, realizations and censoring
/// boundaries for the dates of `window` that have a genuine one-step-ahead
/// forecast (t = 2.. for GARCH, t = 23.. for HAR-GARCH).
struct ScoredSample {
    std::vector<GaussianPredictive> preds;
    std::vector<double> ys;
    std::vector<double> boundaries;
};

inline ScoredSample scored_sample(const ModelParams& params, const std::vector<double>& window,
                                  const ScoreSpec& spec, double tail_boundary) {
    ScoredSample s;
    const std::size_t skip = model_kind(params) == ModelKind::Garch ? 1 : kHarLags;
    if (window.size() < skip + 1) {
        throw std::invalid_argument("calibrate: window too short for the model");
    }
    if (const auto* g = std::get_if<GarchParams>(&params)) {
        std::vector<double> sigma2 = garch_filter(*g, window);
        s.preds.reserve(window.size() - 1);
        for (std::size_t j = 1; j < window.size(); ++j) {
            s.preds.push_back({g->mu, std::sqrt(sigma2[j])});
        }
    } else {
        const auto& h = std::get<HarGarchParams>(params);
        std::vector<GaussianPredictive> all = har_garch_filter(h, window);
        all.pop_back();  // drop the out-of-sample forecast
        s.preds = std::move(all);
    }
    s.ys.assign(window.begin() + static_cast<std::ptrdiff_t>(skip), window.end());
    if (spec.needs_boundary()) {
        s.boundaries.resize(s.ys.size());
        for (std::size_t i = 0; i < s.ys.size(); ++i) {
            s.boundaries[i] =
                spec.region == Region::AboveLag ? window[skip - 1 + i] : tail_boundary;
        }
    }
    return s;
}

/// Ordinary least squares for the HAR mean equation, used only to warm-start
/// the search. Normal equations with a small ridge so constant windows stay
/// solvable.
inline std::array<double, 4> har_ols(const std::vector<double>& y, double& resid_var) {
    const std::size_t n = y.size();
    double xtx[4][4] = {};
    double xty[4] = {};
    for (std::size_t t = kHarLags; t < n; ++t) {
        double avg5 = 0.0, avg22 = 0.0;
        for (std::size_t i = t - 5; i < t; ++i) avg5 += y[i];
        for (std::size_t i = t - kHarLags; i < t; ++i) avg22 += y[i];
        const double x[4] = {1.0, y[t - 1], avg5 / 5.0, avg22 / 22.0};
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) xtx[a][b] += x[a] * x[b];
            xty[a] += x[a] * y[t];
        }
    }
    for (int a = 0; a < 4; ++a) xtx[a][a] += 1e-10;

    // Gaussian elimination with partial pivoting on the 4x4 system.
    std::array<double, 4> beta = {0.0, 0.0, 0.0, 0.0};
    int piv[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int best = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::fabs(xtx[piv[r]][col]) > std::fabs(xtx[piv[best]][col])) best = r;
        }
        std::swap(piv[col], piv[best]);
        for (int r = col + 1; r < 4; ++r) {
            const double m = xtx[piv[r]][col] / xtx[piv[col]][col];
            for (int c = col; c < 4; ++c) xtx[piv[r]][c] -= m * xtx[piv[col]][c];
            xty[piv[r]] -= m * xty[piv[col]];
        }
    }
    for (int row = 3; row >= 0; --row) {
        double v = xty[piv[row]];
        for (int c = row + 1; c < 4; ++c) v -= xtx[piv[row]][c] * beta[c];
        beta[row] = v / xtx[piv[row]][row];
    }

    double ssr = 0.0;
    for (std::size_t t = kHarLags; t < n; ++t) {
        double avg5 = 0.0, avg22 = 0.0;
        for (std::size_t i = t - 5; i < t; ++i) avg5 += y[i];
        for (std::size_t i = t - kHarLags; i < t; ++i) avg22 += y[i];
        const double e =
            y[t] - beta[0] - beta[1] * y[t - 1] - beta[2] * avg5 / 5.0 - beta[3] * avg22 / 22.0;
        ssr += e * e;
    }
    resid_var = ssr / static_cast<double>(n - kHarLags);
    return beta;
}

}  // namespace detail

/// Default starting point: a mildly persistent variance process anchored at
/// the window's sample moments (GARCH) or at the OLS fit of the mean
/// equation (HAR-GARCH).
inline ModelParams default_initial_params(ModelKind kind, const std::vector<double>& window) {
    if (kind == ModelKind::Garch) {
        GarchParams g;
        g.mu = mean(window);
        g.alpha1 = 0.05;
        g.beta1 = 0.90;
        double v = window.size() >= 2 ? sample_variance(window) : 0.0;
        g.alpha0 = std::max(v, 1e-6) * (1.0 - g.alpha1 - g.beta1);
        return g;
    }
    if (window.size() < kHarLags + 2) {
        throw std::invalid_argument("default_initial_params: window too short for HAR-GARCH");
    }
    double resid_var = 0.0;
    auto beta = detail::har_ols(window, resid_var);
    HarGarchParams h;
    h.beta0 = beta[0];
    h.beta1 = beta[1];
    h.beta2 = beta[2];
    h.beta3 = beta[3];
    h.alpha1 = 0.05;
    h.alpha2 = 0.90;
    h.alpha0 = std::max(resid_var, 1e-8) * (1.0 - h.alpha1 - h.alpha2);
    return h;
}

struct CalibrationProblem {
    ModelKind model = ModelKind::Garch;
    ScoreSpec score = ScoreSpec::ls();
    std::vector<double> window;
    std::optional<ModelParams> initial;  // warm start; defaults are used when absent
    NelderMeadOptions search;
};

struct CalibrationResult {
    ModelParams params;
    double criterion = 0.0;  // average score at the optimum
    std::size_t iterations = 0;
    bool converged = false;
    bool boundary_warning = false;
};

/// Score-optimal parameter estimation: maximizes the in-sample average
/// score of one-step-ahead predictives over the window by Nelder-Mead in
/// the unconstrained parametrization.
///
/// Censoring boundaries for tail regions are the window's own empirical
/// quantile at the score's level, fixed before the search; above-lag
/// regions use the previous observation date by date.
inline CalibrationResult calibrate(const CalibrationProblem& problem) {
    const std::vector<double>& w = problem.window;
    const std::size_t min_len = problem.model == ModelKind::Garch ? 2 : kHarLags + 2;
    if (w.size() < min_len) throw std::invalid_argument("calibrate: window too short");
    detail::require_finite_series(w, "calibrate");

    double tail_boundary = 0.0;
    if (problem.score.needs_boundary() && problem.score.region != Region::AboveLag) {
        tail_boundary = empirical_quantile(w, problem.score.level);
    }

    ModelParams init = problem.initial ? *problem.initial
                                       : default_initial_params(problem.model, w);
    if (model_kind(init) != problem.model) {
        throw std::invalid_argument("calibrate: initial parameters are for a different model");
    }

    constexpr double kPenalty = 1e100;
    auto objective = [&](const std::vector<double>& u) {
        ModelParams p = untransform_params(problem.model, u);
        const bool ok = std::visit([](const auto& m) { return m.valid(); }, p);
        if (!ok) return kPenalty;
        try {
            detail::ScoredSample s = detail::scored_sample(p, w, problem.score, tail_boundary);
            const double avg = average_score(problem.score, s.preds, s.ys, s.boundaries);
            return std::isfinite(avg) ? -avg : kPenalty;
        } catch (const std::exception&) {
            // Overflowed variance paths make the predictive invalid; treat
            // the parameter point as infeasible.
            return kPenalty;
        }
    };

    std::vector<double> u0 = transform_params(init);
    if (objective(u0) >= kPenalty) {
        throw std::runtime_error("calibrate: criterion is degenerate at the initial parameters");
    }

    NelderMeadResult r = nelder_mead(objective, u0, problem.search);

    CalibrationResult out;
    out.params = untransform_params(problem.model, r.x);
    out.criterion = -r.fmin;
    out.iterations = r.iterations;
    out.converged = r.converged;

    const auto near_bounds = [](double alpha0, double persistence) {
        return alpha0 < 2.0 * kAlpha0Floor || persistence > 1.0 - 1e-10;
    };
    if (const auto* g = std::get_if<GarchParams>(&out.params)) {
        out.boundary_warning = near_bounds(g->alpha0, g->alpha1 + g->beta1);
    } else {
        const auto& h = std::get<HarGarchParams>(out.params);
        out.boundary_warning = near_bounds(h.alpha0, h.alpha1 + h.alpha2);
    }
    return out;
}

}  // namespace scorecast
