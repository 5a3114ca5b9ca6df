#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "scorecast/calibrate.hpp"
#include "scorecast/garch.hpp"
#include "scorecast/har_garch.hpp"
#include "scorecast/predictive.hpp"
#include "scorecast/scoring.hpp"
#include "scorecast/stats.hpp"

namespace scorecast {

struct BacktestConfig {
    ModelKind model = ModelKind::Garch;
    std::vector<ScoreSpec> calibration_scores = {ScoreSpec::ls()};
    /// Scores attached to every record for out-of-sample comparison; empty
    /// means the calibration set plus LS.
    std::vector<ScoreSpec> evaluation_scores;
    std::vector<double> var_levels = {0.01, 0.025, 0.05, 0.10};
    std::size_t initial_window = 1000;
    /// Number of out-of-sample forecast dates; 0 means the whole remainder
    /// of the series.
    std::size_t holdout = 0;
    std::size_t reestimation_stride = 1;
    NelderMeadOptions search;
};

struct BacktestRecord {
    std::size_t t = 0;  // 0-based index of the forecast target in the series
    double realized = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> var;  // aligned with var_levels
    std::vector<double> es;
    std::vector<double> eval_scores;  // aligned with evaluation_scores
    bool recalibrated = false;
    bool converged = false;
    bool boundary_warning = false;
    bool calibration_failed = false;
    /// False when no usable predictive exists for this date (calibration
    /// never succeeded, or the filtered variance overflowed). Invalid
    /// records are skipped by summaries and exceedance counts.
    bool valid = false;
};

/// One expanding-window forecast path per calibration score.
struct ScoreTrack {
    ScoreSpec score;
    std::vector<BacktestRecord> records;
    std::optional<ModelParams> final_params;
    std::vector<double> avg_eval_scores;  // over valid records
};

struct BacktestResult {
    BacktestConfig config;  // with evaluation_scores and holdout resolved
    std::vector<ScoreTrack> tracks;
};

/// Hit sequence for coverage tests: 1 when the realization is at or below
/// the VaR forecast at var_levels[level_index]. Invalid records are skipped.
inline std::vector<int> exceedances(const std::vector<BacktestRecord>& records,
                                    std::size_t level_index) {
    std::vector<int> hits;
    hits.reserve(records.size());
    for (const auto& r : records) {
        if (!r.valid) continue;
        if (level_index >= r.var.size()) {
            throw std::invalid_argument("exceedances: level index out of range");
        }
        hits.push_back(r.realized <= r.var[level_index] ? 1 : 0);
    }
    return hits;
}

inline double exceedance_rate(const std::vector<BacktestRecord>& records,
                              std::size_t level_index) {
    const std::vector<int> hits = exceedances(records, level_index);
    if (hits.empty()) throw std::invalid_argument("exceedance_rate: no valid records");
    double s = 0.0;
    for (int h : hits) s += h;
    return s / static_cast<double>(hits.size());
}

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

/// Pulls boundary-sitting warm starts strictly inside the constraint set so
/// they stay in the domain of transform_params.
inline ModelParams nudge_interior(ModelParams p) {
    auto fix = [](double& alpha0, double& a, double& b) {
        alpha0 = std::max(alpha0, kAlpha0Floor * 1.001);
        double s = a + b;
        if (s >= 1.0 - 1e-10) {
            const double shrink = (1.0 - 1e-9) / s;
            a *= shrink;
            b *= shrink;
            s = a + b;
        }
        if (s <= 1e-10) {
            a = b = 5e-11;
            return;
        }
        const double frac = std::clamp(a / s, 1e-9, 1.0 - 1e-9);
        a = s * frac;
        b = s * (1.0 - frac);
    };
    if (auto* g = std::get_if<GarchParams>(&p)) {
        fix(g->alpha0, g->alpha1, g->beta1);
    } else {
        auto& h = std::get<HarGarchParams>(p);
        fix(h.alpha0, h.alpha1, h.alpha2);
    }
    return p;
}

inline GaussianPredictive one_step_predictive(const ModelParams& params,
                                              const std::vector<double>& window) {
    if (const auto* g = std::get_if<GarchParams>(&params)) {
        return {g->mu, std::sqrt(garch_filter(*g, window).back())};
    }
    return har_garch_filter(std::get<HarGarchParams>(params), window).back();
}

inline void run_track(const BacktestConfig& cfg, const std::vector<double>& series,
                      ScoreTrack& track) {
    const std::size_t first = cfg.initial_window;
    std::optional<ModelParams> params;
    std::vector<double> eval_boundaries(cfg.evaluation_scores.size(),
                                        std::numeric_limits<double>::quiet_NaN());
    bool last_converged = false, last_boundary = false, last_failed = false;

    track.records.reserve(cfg.holdout);
    for (std::size_t i = 0; i < cfg.holdout; ++i) {
        const std::size_t t = first + i;
        const std::vector<double> window(series.begin(),
                                         series.begin() + static_cast<std::ptrdiff_t>(t));
        BacktestRecord rec;
        rec.t = t;
        rec.realized = series[t];
        rec.recalibrated = i % cfg.reestimation_stride == 0;

        if (rec.recalibrated) {
            std::vector<double> sorted(window);
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t j = 0; j < cfg.evaluation_scores.size(); ++j) {
                const ScoreSpec& es = cfg.evaluation_scores[j];
                if (es.needs_boundary() && es.region != Region::AboveLag) {
                    eval_boundaries[j] = quantile_sorted(sorted, es.level);
                }
            }
            CalibrationProblem problem;
            problem.model = cfg.model;
            problem.score = track.score;
            problem.window = window;
            problem.search = cfg.search;
            if (params) problem.initial = nudge_interior(*params);
            try {
                CalibrationResult res = calibrate(problem);
                params = res.params;
                last_converged = res.converged;
                last_boundary = res.boundary_warning;
                last_failed = false;
            } catch (const std::exception&) {
                // Keep the previous parameters; the date is flagged.
                last_failed = true;
            }
        }
        rec.converged = last_converged;
        rec.boundary_warning = last_boundary;
        rec.calibration_failed = last_failed;

        if (params) {
            GaussianPredictive pred{std::numeric_limits<double>::quiet_NaN(), 0.0};
            try {
                pred = one_step_predictive(*params, window);
            } catch (const std::exception&) {
            }
            if (pred.valid()) {
                rec.valid = true;
                rec.mean = pred.mean;
                rec.sd = pred.sd;
                rec.var.reserve(cfg.var_levels.size());
                rec.es.reserve(cfg.var_levels.size());
                for (double p : cfg.var_levels) {
                    rec.var.push_back(gaussian_var(pred, p));
                    rec.es.push_back(gaussian_es(pred, p));
                }
                rec.eval_scores.reserve(cfg.evaluation_scores.size());
                for (std::size_t j = 0; j < cfg.evaluation_scores.size(); ++j) {
                    const ScoreSpec& es = cfg.evaluation_scores[j];
                    const double b = es.region == Region::AboveLag ? series[t - 1]
                                                                   : eval_boundaries[j];
                    rec.eval_scores.push_back(score_one(es, pred, rec.realized, b));
                }
            }
        }
        track.records.push_back(std::move(rec));
    }

    track.final_params = params;
    track.avg_eval_scores.assign(cfg.evaluation_scores.size(), 0.0);
    std::size_t n_valid = 0;
    for (const auto& r : track.records) {
        if (!r.valid) continue;
        ++n_valid;
        for (std::size_t j = 0; j < track.avg_eval_scores.size(); ++j) {
            track.avg_eval_scores[j] += r.eval_scores[j];
        }
    }
    for (double& v : track.avg_eval_scores) {
        v = n_valid > 0 ? v / static_cast<double>(n_valid)
                        : std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace detail

/// Expanding-window backtest: for each calibration score, re-estimates the
/// model every `reestimation_stride` forecast dates on all data strictly
/// before the target date (warm-started from the previous solution) and
/// records the one-step-ahead predictive, VaR/ES bands and evaluation
/// scores for every holdout date.
///
/// Tracks are independent; `threads` > 1 distributes them across that many
/// worker threads with identical results.
inline BacktestResult run_backtest(const BacktestConfig& config, const std::vector<double>& series,
                                   std::size_t threads = 1) {
    BacktestConfig cfg = config;
    if (cfg.calibration_scores.empty()) {
        throw std::invalid_argument("run_backtest: no calibration scores");
    }
    const std::size_t min_window = cfg.model == ModelKind::Garch ? 2 : kHarLags + 2;
    if (cfg.initial_window < min_window) {
        throw std::invalid_argument("run_backtest: initial window too short for the model");
    }
    if (series.size() <= cfg.initial_window) {
        throw std::invalid_argument("run_backtest: series ends before the first forecast date");
    }
    for (double v : series) {
        if (std::isnan(v)) throw std::invalid_argument("run_backtest: NaN in series");
    }
    const std::size_t max_holdout = series.size() - cfg.initial_window;
    if (cfg.holdout == 0) cfg.holdout = max_holdout;
    if (cfg.holdout > max_holdout) {
        throw std::invalid_argument("run_backtest: holdout exceeds the available sample");
    }
    for (double p : cfg.var_levels) {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::invalid_argument("run_backtest: VaR levels must be in (0, 1)");
        }
    }
    if (cfg.reestimation_stride == 0) cfg.reestimation_stride = 1;
    if (cfg.evaluation_scores.empty()) {
        cfg.evaluation_scores.push_back(ScoreSpec::ls());
        for (const ScoreSpec& s : cfg.calibration_scores) {
            if (std::find(cfg.evaluation_scores.begin(), cfg.evaluation_scores.end(), s) ==
                cfg.evaluation_scores.end()) {
                cfg.evaluation_scores.push_back(s);
            }
        }
    }

    BacktestResult result;
    result.config = cfg;
    result.tracks.resize(cfg.calibration_scores.size());
    for (std::size_t k = 0; k < result.tracks.size(); ++k) {
        result.tracks[k].score = cfg.calibration_scores[k];
    }

    if (threads <= 1 || result.tracks.size() == 1) {
        for (auto& track : result.tracks) detail::run_track(cfg, series, track);
        return result;
    }
    const std::size_t n_workers = std::min(threads, result.tracks.size());
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t k = w; k < result.tracks.size(); k += n_workers) {
                detail::run_track(cfg, series, result.tracks[k]);
            }
        });
    }
    for (auto& th : workers) th.join();
    return result;
}

}  // namespace scorecast
