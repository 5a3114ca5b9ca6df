#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "scorecast/backtest.hpp"

namespace sc = scorecast;

namespace {

std::vector<double> garch_path(std::size_t n, std::uint64_t seed) {
    oracle::Rand rand(seed);
    const sc::GarchParams p{0.0, 1.0, 0.2, 0.7};
    std::vector<double> y;
    y.reserve(n);
    double s2 = p.unconditional_variance();
    double prev = 0.0;
    for (std::size_t t = 0; t < n + 200; ++t) {
        if (t > 0) s2 = p.alpha0 + p.alpha1 * prev * prev + p.beta1 * s2;
        prev = std::sqrt(s2) * rand.normal();
        if (t >= 200) y.push_back(prev);
    }
    return y;
}

void expect_records_equal(const sc::BacktestRecord& a, const sc::BacktestRecord& b) {
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.realized, b.realized);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.sd, b.sd);
    EXPECT_EQ(a.var, b.var);
    EXPECT_EQ(a.es, b.es);
    EXPECT_EQ(a.eval_scores, b.eval_scores);
    EXPECT_EQ(a.recalibrated, b.recalibrated);
    EXPECT_EQ(a.converged, b.converged);
    EXPECT_EQ(a.valid, b.valid);
}

}  // namespace

TEST(Backtest, RecordsAlignWithTargets) {
    const auto y = garch_path(160, 201);
    sc::BacktestConfig cfg;
    cfg.initial_window = 140;
    cfg.holdout = 20;
    cfg.reestimation_stride = 5;
    const auto res = sc::run_backtest(cfg, y);
    ASSERT_EQ(res.tracks.size(), 1u);
    const auto& recs = res.tracks[0].records;
    ASSERT_EQ(recs.size(), 20u);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(recs[i].t, 140 + i);
        EXPECT_EQ(recs[i].realized, y[140 + i]);
        EXPECT_EQ(recs[i].recalibrated, i % 5 == 0);
        EXPECT_TRUE(recs[i].valid);
        EXPECT_GT(recs[i].sd, 0.0);
    }
    EXPECT_TRUE(res.tracks[0].final_params.has_value());
}

TEST(Backtest, StrideBeyondHoldoutCalibratesOnce) {
    const auto y = garch_path(130, 203);
    sc::BacktestConfig cfg;
    cfg.initial_window = 110;
    cfg.holdout = 15;
    cfg.reestimation_stride = 50;
    const auto res = sc::run_backtest(cfg, y);
    const auto& recs = res.tracks[0].records;
    EXPECT_TRUE(recs[0].recalibrated);
    for (std::size_t i = 1; i < recs.size(); ++i) {
        EXPECT_FALSE(recs[i].recalibrated);
        EXPECT_TRUE(recs[i].valid);
    }
}

TEST(Backtest, NoLookAhead) {
    auto y = garch_path(260, 207);
    sc::BacktestConfig cfg;
    cfg.initial_window = 200;
    cfg.holdout = 60;
    cfg.reestimation_stride = 7;
    cfg.calibration_scores = {sc::ScoreSpec::ls()};
    const auto before = sc::run_backtest(cfg, y);

    // Perturbing a future observation must leave every earlier record
    // untouched, and the perturbed date's own predictive as well.
    const std::size_t bump = 230;
    y[bump] += 5.0;
    const auto after = sc::run_backtest(cfg, y);
    const auto& ra = before.tracks[0].records;
    const auto& rb = after.tracks[0].records;
    for (std::size_t i = 0; i + 200 < bump; ++i) {
        expect_records_equal(ra[i], rb[i]);
    }
    const auto& pa = ra[bump - 200];
    const auto& pb = rb[bump - 200];
    EXPECT_EQ(pa.mean, pb.mean);
    EXPECT_EQ(pa.sd, pb.sd);
    EXPECT_NE(pa.realized, pb.realized);
}

TEST(Backtest, EsSitsBelowVarEverywhere) {
    const auto y = garch_path(180, 211);
    sc::BacktestConfig cfg;
    cfg.initial_window = 150;
    cfg.holdout = 30;
    cfg.reestimation_stride = 3;
    const auto res = sc::run_backtest(cfg, y);
    for (const auto& r : res.tracks[0].records) {
        ASSERT_TRUE(r.valid);
        for (std::size_t k = 0; k < r.var.size(); ++k) {
            EXPECT_LT(r.es[k], r.var[k]);
        }
        // Levels are increasing, so the VaR forecasts are too.
        for (std::size_t k = 1; k < r.var.size(); ++k) {
            EXPECT_LT(r.var[k - 1], r.var[k]);
        }
    }
}

TEST(Backtest, ThreadedRunIsBitwiseIdentical) {
    const auto y = garch_path(200, 213);
    sc::BacktestConfig cfg;
    cfg.initial_window = 170;
    cfg.holdout = 30;
    cfg.reestimation_stride = 6;
    cfg.calibration_scores = {sc::ScoreSpec::ls(), sc::ScoreSpec::qs(0.05),
                              sc::ScoreSpec::cls(0.10)};
    const auto serial = sc::run_backtest(cfg, y, 1);
    const auto threaded = sc::run_backtest(cfg, y, 3);
    ASSERT_EQ(serial.tracks.size(), threaded.tracks.size());
    for (std::size_t k = 0; k < serial.tracks.size(); ++k) {
        const auto& ta = serial.tracks[k];
        const auto& tb = threaded.tracks[k];
        ASSERT_EQ(ta.records.size(), tb.records.size());
        for (std::size_t i = 0; i < ta.records.size(); ++i) {
            expect_records_equal(ta.records[i], tb.records[i]);
        }
        EXPECT_EQ(ta.avg_eval_scores, tb.avg_eval_scores);
    }
}

TEST(Backtest, AverageEvalScoresMatchManualAccumulation) {
    const auto y = garch_path(170, 217);
    sc::BacktestConfig cfg;
    cfg.initial_window = 140;
    cfg.holdout = 30;
    cfg.reestimation_stride = 4;
    cfg.calibration_scores = {sc::ScoreSpec::qs(0.05)};
    const auto res = sc::run_backtest(cfg, y);
    const auto& track = res.tracks[0];
    ASSERT_EQ(res.config.evaluation_scores.size(), track.avg_eval_scores.size());
    for (std::size_t j = 0; j < track.avg_eval_scores.size(); ++j) {
        double total = 0.0;
        std::size_t n = 0;
        for (const auto& r : track.records) {
            if (!r.valid) continue;
            total += r.eval_scores[j];
            ++n;
        }
        ASSERT_GT(n, 0u);
        EXPECT_DOUBLE_EQ(track.avg_eval_scores[j], total / static_cast<double>(n));
    }
}

TEST(Backtest, DefaultEvaluationSetIsLsPlusCalibrationScores) {
    const auto y = garch_path(130, 219);
    sc::BacktestConfig cfg;
    cfg.initial_window = 115;
    cfg.holdout = 10;
    cfg.reestimation_stride = 10;
    cfg.calibration_scores = {sc::ScoreSpec::qs(0.05), sc::ScoreSpec::ls()};
    const auto res = sc::run_backtest(cfg, y);
    ASSERT_EQ(res.config.evaluation_scores.size(), 2u);
    EXPECT_EQ(res.config.evaluation_scores[0].name(), "LS");
    EXPECT_EQ(res.config.evaluation_scores[1].name(), "QS5");
}

TEST(Backtest, OverflowingObservationInvalidatesLaterRecords) {
    auto y = garch_path(200, 223);
    y[150] = 1e160;  // finite, but squares to infinity inside the filter
    sc::BacktestConfig cfg;
    cfg.initial_window = 100;
    cfg.holdout = 80;
    cfg.reestimation_stride = 10;
    const auto res = sc::run_backtest(cfg, y);
    const auto& recs = res.tracks[0].records;
    ASSERT_EQ(recs.size(), 80u);

    for (std::size_t i = 0; i <= 50; ++i) {
        EXPECT_TRUE(recs[i].valid) << "t=" << recs[i].t;
        EXPECT_FALSE(recs[i].calibration_failed);
    }
    // Once the overflowing value enters the window no predictive is usable.
    for (std::size_t i = 51; i < recs.size(); ++i) {
        EXPECT_FALSE(recs[i].valid) << "t=" << recs[i].t;
    }
    // Re-estimation dates on the contaminated window are flagged, and the
    // last good parameters are carried.
    EXPECT_TRUE(recs[60].recalibrated);
    EXPECT_TRUE(recs[60].calibration_failed);
    EXPECT_TRUE(recs[70].calibration_failed);
    ASSERT_TRUE(res.tracks[0].final_params.has_value());

    // The carried parameters are exactly the last successful fit: the same
    // backtest truncated right after that fit ends with identical params.
    sc::BacktestConfig clean_cfg = cfg;
    clean_cfg.holdout = 51;
    const auto clean = sc::run_backtest(clean_cfg, std::vector<double>(y.begin(), y.begin() + 151));
    const auto& a = std::get<sc::GarchParams>(*res.tracks[0].final_params);
    const auto& b = std::get<sc::GarchParams>(*clean.tracks[0].final_params);
    EXPECT_EQ(a.mu, b.mu);
    EXPECT_EQ(a.alpha0, b.alpha0);
    EXPECT_EQ(a.alpha1, b.alpha1);
    EXPECT_EQ(a.beta1, b.beta1);

    // Summaries skip the invalid tail.
    const auto hits = sc::exceedances(recs, 0);
    EXPECT_EQ(hits.size(), 51u);
}

TEST(Backtest, ExceedanceCountsBoundaryHitAndSkipsInvalid) {
    std::vector<sc::BacktestRecord> recs(3);
    recs[0].valid = true;
    recs[0].var = {-1.0};
    recs[0].realized = -1.0;  // exactly at VaR: a hit
    recs[1].valid = true;
    recs[1].var = {-1.0};
    recs[1].realized = -0.999;
    recs[2].valid = false;
    recs[2].var = {-1.0};
    recs[2].realized = -50.0;
    const auto hits = sc::exceedances(recs, 0);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0], 1);
    EXPECT_EQ(hits[1], 0);
    EXPECT_DOUBLE_EQ(sc::exceedance_rate(recs, 0), 0.5);
    EXPECT_THROW(sc::exceedances(recs, 1), std::invalid_argument);
}

TEST(Backtest, ConfigValidation) {
    const auto y = garch_path(60, 227);
    sc::BacktestConfig cfg;
    cfg.initial_window = 60;
    EXPECT_THROW(sc::run_backtest(cfg, y), std::invalid_argument);  // nothing to forecast
    cfg.initial_window = 1;
    EXPECT_THROW(sc::run_backtest(cfg, y), std::invalid_argument);  // window too short
    cfg.initial_window = 40;
    cfg.holdout = 100;
    EXPECT_THROW(sc::run_backtest(cfg, y), std::invalid_argument);  // holdout too long
    cfg.holdout = 5;
    cfg.var_levels = {0.0};
    EXPECT_THROW(sc::run_backtest(cfg, y), std::invalid_argument);
    cfg.var_levels = {0.05};
    cfg.calibration_scores = {};
    EXPECT_THROW(sc::run_backtest(cfg, y), std::invalid_argument);
    cfg.calibration_scores = {sc::ScoreSpec::ls()};
    auto bad = y;
    bad[10] = std::nan("");
    EXPECT_THROW(sc::run_backtest(cfg, bad), std::invalid_argument);
}

TEST(Backtest, HarGarchTrackRuns) {
    oracle::Rand rand(229);
    std::vector<double> y;
    y.reserve(90);
    double prev = 3.0;
    for (int t = 0; t < 90; ++t) {
        prev = 0.3 + 0.9 * prev + 0.4 * rand.normal();
        y.push_back(prev);
    }
    sc::BacktestConfig cfg;
    cfg.model = sc::ModelKind::HarGarch;
    cfg.initial_window = 70;
    cfg.holdout = 20;
    cfg.reestimation_stride = 5;
    cfg.search.max_iterations = 1500;
    const auto res = sc::run_backtest(cfg, y);
    for (const auto& r : res.tracks[0].records) {
        EXPECT_TRUE(r.valid);
        EXPECT_GT(r.sd, 0.0);
        EXPECT_TRUE(std::isfinite(r.mean));
    }
}
