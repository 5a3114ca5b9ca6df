#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scorecast/predictive.hpp"
#include "scorecast/stats.hpp"

namespace scorecast {

/// Daily inputs of the volatility-hedged equity strategy. All vectors are
/// aligned by date: `vix` is the spot index close used by the signal rules,
/// `futures_open`/`futures_close` are same-day prices of the traded
/// contract, and the return columns are simple daily returns.
struct MarketData {
    std::vector<std::string> dates;
    std::vector<double> vix;
    std::vector<double> futures_open;
    std::vector<double> futures_close;
    std::vector<double> stock_return;
    std::vector<double> rf_return;

    std::size_t size() const { return vix.size(); }

    void validate() const {
        const std::size_t n = vix.size();
        if (n == 0) throw std::invalid_argument("MarketData: empty");
        if (futures_open.size() != n || futures_close.size() != n ||
            stock_return.size() != n || rf_return.size() != n ||
            (!dates.empty() && dates.size() != n)) {
            throw std::invalid_argument("MarketData: misaligned columns");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(std::isfinite(vix[i]) && vix[i] > 0.0) || !(futures_open[i] > 0.0) ||
                !(futures_close[i] > 0.0) || !std::isfinite(stock_return[i]) ||
                !std::isfinite(rf_return[i])) {
                throw std::invalid_argument("MarketData: bad value at row " + std::to_string(i));
            }
        }
    }
};

/// What the hedge weight earns on days without a volatility signal.
enum class NonSignalMode {
    Cash,       // (1-w) stock + w risk-free
    FullStock,  // entire portfolio in stock
};

struct StrategySpec {
    double hedge_weight = 0.05;
    double prob_threshold = 0.5;    // probability rule
    double percentile = 0.80;       // percentile rule: quantile of the predictive
    double level_threshold = 40.0;  // percentile rule: index level to clear
    NonSignalMode non_signal = NonSignalMode::Cash;
    double annualization = 252.0;
};

/// Probability rule: enter the hedge when the predictive assigns more than
/// `threshold` probability to the index closing above its current level.
/// The predictive is for the log index.
inline bool prob_up_signal(const GaussianPredictive& log_level_pred, double current_level,
                           double threshold = 0.5) {
    if (!(current_level > 0.0)) {
        throw std::invalid_argument("prob_up_signal: level must be positive");
    }
    return prob_exceed(log_level_pred, std::log(current_level)) > threshold;
}

/// Percentile rule: enter the hedge when the `percentile` quantile of the
/// predictive index level clears `level_threshold`.
inline bool percentile_level_signal(const GaussianPredictive& log_level_pred, double percentile,
                                    double level_threshold) {
    if (!(level_threshold > 0.0)) {
        throw std::invalid_argument("percentile_level_signal: threshold must be positive");
    }
    return std::exp(gaussian_var(log_level_pred, percentile)) > level_threshold;
}

/// Daily portfolio returns: on signal days the hedge weight w rides the
/// same-day futures return close/open - 1, otherwise it sits per
/// `spec.non_signal`; the remaining 1-w stays in stock.
inline std::vector<double> run_strategy(const MarketData& data, const std::vector<bool>& signals,
                                        const StrategySpec& spec) {
    data.validate();
    if (signals.size() != data.size()) {
        throw std::invalid_argument("run_strategy: signals misaligned with market data");
    }
    if (!(spec.hedge_weight >= 0.0 && spec.hedge_weight <= 1.0)) {
        throw std::invalid_argument("run_strategy: hedge weight must be in [0, 1]");
    }
    const double w = spec.hedge_weight;
    std::vector<double> out(data.size());
    for (std::size_t t = 0; t < data.size(); ++t) {
        if (signals[t]) {
            const double fut = data.futures_close[t] / data.futures_open[t] - 1.0;
            out[t] = (1.0 - w) * data.stock_return[t] + w * fut;
        } else if (spec.non_signal == NonSignalMode::Cash) {
            out[t] = (1.0 - w) * data.stock_return[t] + w * data.rf_return[t];
        } else {
            out[t] = data.stock_return[t];
        }
    }
    return out;
}

/// Annualized performance summary. The Sharpe ratio studentizes the mean
/// excess return over the risk-free leg; a flat return path has no defined
/// ratio and is flagged instead.
struct PortfolioStats {
    double annualized_return = 0.0;
    double annualized_vol = 0.0;
    double sharpe = 0.0;
    bool degenerate = false;  // zero return variance; sharpe is meaningless
};

inline PortfolioStats portfolio_stats(const std::vector<double>& returns,
                                      const std::vector<double>& rf_returns,
                                      double annualization = 252.0) {
    if (returns.size() < 2) throw std::invalid_argument("portfolio_stats: need n >= 2");
    if (rf_returns.size() != returns.size()) {
        throw std::invalid_argument("portfolio_stats: risk-free series misaligned");
    }
    if (!(annualization > 0.0)) {
        throw std::invalid_argument("portfolio_stats: annualization must be positive");
    }
    PortfolioStats s;
    const double m = mean(returns);
    const double sd = sample_sd(returns);
    std::vector<double> excess(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) excess[i] = returns[i] - rf_returns[i];
    const double m_ex = mean(excess);

    s.annualized_return = m * annualization;
    s.annualized_vol = sd * std::sqrt(annualization);
    if (sd > 0.0) {
        s.sharpe = m_ex * annualization / (sd * std::sqrt(annualization));
    } else {
        s.degenerate = true;
        s.sharpe = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

}  // namespace scorecast
