#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scorecast/normal.hpp"
#include "scorecast/predictive.hpp"

namespace scorecast {

/// log(1 - Phi(z)) without underflow. Exact path through erfc up to z = 20,
/// then the asymptotic expansion of the Mills ratio; the two agree to ~1e-10
/// at the switch point.
inline double log_norm_sf(double z) {
    if (z < 20.0) return std::log(norm_sf(z));
    const double zi2 = 1.0 / (z * z);
    const double series = 1.0 + zi2 * (-1.0 + zi2 * (3.0 + zi2 * (-15.0 + zi2 * 105.0)));
    return norm_logpdf(z) - std::log(z) + std::log(series);
}

inline double log_norm_cdf(double z) { return log_norm_sf(-z); }

/// Positively oriented scores: larger is better, forecasts are rewarded.

/// Log score: log predictive density at the realized value.
inline double log_score(const GaussianPredictive& f, double y) {
    require_valid(f);
    if (!std::isfinite(y)) throw std::invalid_argument("log_score: non-finite realization");
    return predictive_logpdf(f, y);
}

/// Region of interest for the censored log score.
enum class Region {
    LowerTail,  // A = (-inf, b], boundary from a lower quantile
    UpperTail,  // A = (b, +inf), boundary from an upper quantile
    AboveLag,   // A = (y_{t-1}, +inf), boundary is the previous observation
};

inline bool is_lower_region(Region r) { return r == Region::LowerTail; }

/// Censored log score: full density credit inside the region of interest A,
/// a single censored lump log P(A^c) outside it.
///
/// Lower regions are closed above (y == b lies inside A) and their
/// complement is the open upper piece; upper regions are the mirror image,
/// with A open below and the complement closed.
inline double censored_log_score(const GaussianPredictive& f, double y, double boundary,
                                 Region region) {
    require_valid(f);
    if (!std::isfinite(y) || !std::isfinite(boundary)) {
        throw std::invalid_argument("censored_log_score: non-finite input");
    }
    const double zb = (boundary - f.mean) / f.sd;
    if (is_lower_region(region)) {
        return y <= boundary ? predictive_logpdf(f, y) : log_norm_sf(zb);
    }
    return y > boundary ? predictive_logpdf(f, y) : log_norm_cdf(zb);
}

/// Quantile score for a VaR forecast at probability level p:
/// [I(y <= var) - p] * (y - var). Non-positive, zero only at y == var.
inline double quantile_score(double var_forecast, double y, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_score: p must be in (0, 1)");
    if (!std::isfinite(var_forecast) || !std::isfinite(y)) {
        throw std::invalid_argument("quantile_score: non-finite input");
    }
    const double indicator = y <= var_forecast ? 1.0 : 0.0;
    return (indicator - p) * (y - var_forecast);
}

/// Joint VaR/ES forecast pair at a common probability level.
struct VarEsPair {
    double var = 0.0;
    double es = 0.0;
};

/// Elementary joint VaR/ES score at threshold eta, the building block of
/// Murphy diagrams. Positively oriented like every score here: the true
/// (VaR, ES) pair maximizes the expectation at every threshold.
///   S = -I(eta <= es) [ (1/p) I(y <= var) (var - y) - (var - eta) ]
///       - I(eta <= y) (y - eta).
inline double fz_joint_score(const VarEsPair& fc, double y, double eta, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("fz_joint_score: p must be in (0, 1)");
    if (!std::isfinite(fc.var) || !std::isfinite(fc.es) || !std::isfinite(y) ||
        !std::isfinite(eta)) {
        throw std::invalid_argument("fz_joint_score: non-finite input");
    }
    double s = 0.0;
    if (eta <= fc.es) {
        const double hit = y <= fc.var ? 1.0 : 0.0;
        s -= hit * (fc.var - y) / p - (fc.var - eta);
    }
    if (eta <= y) s -= y - eta;
    return s;
}

enum class ScoreKind { LogScore, CensoredLogScore, QuantileScore };

/// A scoring rule together with its focus parameters. `level` is the
/// quantile level that locates the censoring boundary (CLS) or the VaR
/// probability (QS); it is unused for LS and for AboveLag regions.
struct ScoreSpec {
    ScoreKind kind = ScoreKind::LogScore;
    Region region = Region::LowerTail;
    double level = 0.0;

    static ScoreSpec ls() { return {ScoreKind::LogScore, Region::LowerTail, 0.0}; }

    static ScoreSpec cls(double level) {
        if (!(level > 0.0 && level < 1.0)) {
            throw std::invalid_argument("ScoreSpec::cls: level must be in (0, 1)");
        }
        Region r = level < 0.5 ? Region::LowerTail : Region::UpperTail;
        return {ScoreKind::CensoredLogScore, r, level};
    }

    static ScoreSpec cls_above_lag() {
        return {ScoreKind::CensoredLogScore, Region::AboveLag, 0.0};
    }

    static ScoreSpec qs(double p) {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::invalid_argument("ScoreSpec::qs: p must be in (0, 1)");
        }
        return {ScoreKind::QuantileScore, Region::LowerTail, p};
    }

    bool needs_boundary() const { return kind == ScoreKind::CensoredLogScore; }

    /// Compact identifier used in configs and report columns: LS, CLS10,
    /// CLS80, CLSlag, QS2.5, ...
    std::string name() const {
        auto pct = [](double level) {
            double v = level * 100.0;
            char buf[32];
            if (v == static_cast<double>(static_cast<long>(v))) {
                std::snprintf(buf, sizeof(buf), "%ld", static_cast<long>(v));
            } else {
                std::snprintf(buf, sizeof(buf), "%g", v);
            }
            return std::string(buf);
        };
        switch (kind) {
            case ScoreKind::LogScore: return "LS";
            case ScoreKind::CensoredLogScore:
                return region == Region::AboveLag ? "CLSlag" : "CLS" + pct(level);
            case ScoreKind::QuantileScore: return "QS" + pct(level);
        }
        return "?";
    }

    bool operator==(const ScoreSpec& o) const {
        return kind == o.kind && region == o.region && level == o.level;
    }
};

/// Inverse of ScoreSpec::name. CLS levels below 50 denote lower-tail
/// regions, levels of 50 and above upper-tail regions.
inline ScoreSpec parse_score(const std::string& name) {
    if (name == "LS") return ScoreSpec::ls();
    if (name == "CLSlag") return ScoreSpec::cls_above_lag();
    auto parse_pct = [&](std::size_t prefix_len) {
        std::size_t pos = 0;
        const std::string body = name.substr(prefix_len);
        double v = std::stod(body, &pos);
        if (pos != body.size()) throw std::invalid_argument("parse_score: bad level in " + name);
        return v / 100.0;
    };
    if (name.rfind("CLS", 0) == 0) return ScoreSpec::cls(parse_pct(3));
    if (name.rfind("QS", 0) == 0) return ScoreSpec::qs(parse_pct(2));
    throw std::invalid_argument("parse_score: unknown score " + name);
}

/// Per-observation score under `spec`. CLS needs the censoring boundary for
/// this date; LS and QS ignore it.
inline double score_one(const ScoreSpec& spec, const GaussianPredictive& f, double y,
                        double boundary = std::numeric_limits<double>::quiet_NaN()) {
    switch (spec.kind) {
        case ScoreKind::LogScore: return log_score(f, y);
        case ScoreKind::CensoredLogScore: return censored_log_score(f, y, boundary, spec.region);
        case ScoreKind::QuantileScore:
            return quantile_score(gaussian_var(f, spec.level), y, spec.level);
    }
    throw std::logic_error("score_one: unreachable");
}

/// Sample average of per-observation scores. `boundaries` must align with
/// `ys` when the spec censors; it may be empty otherwise.
inline double average_score(const ScoreSpec& spec, const std::vector<GaussianPredictive>& preds,
                            const std::vector<double>& ys,
                            const std::vector<double>& boundaries = {}) {
    if (preds.size() != ys.size()) {
        throw std::invalid_argument("average_score: predictive/realization length mismatch");
    }
    if (ys.empty()) throw std::invalid_argument("average_score: empty sample");
    if (spec.needs_boundary() && boundaries.size() != ys.size()) {
        throw std::invalid_argument("average_score: boundaries must align with realizations");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        total += score_one(spec, preds[i], ys[i],
                           spec.needs_boundary() ? boundaries[i]
                                                 : std::numeric_limits<double>::quiet_NaN());
    }
    return total / static_cast<double>(ys.size());
}

}  // namespace scorecast
