#pragma once

#include "scorecast/backtest.hpp"
#include "scorecast/calibrate.hpp"
#include "scorecast/dgp.hpp"
#include "scorecast/evaluation.hpp"
#include "scorecast/garch.hpp"
#include "scorecast/har_garch.hpp"
#include "scorecast/nelder_mead.hpp"
#include "scorecast/normal.hpp"
#include "scorecast/predictive.hpp"
#include "scorecast/quadrature.hpp"
#include "scorecast/rng.hpp"
#include "scorecast/scoring.hpp"
#include "scorecast/series_io.hpp"
#include "scorecast/skew_normal.hpp"
#include "scorecast/stats.hpp"
#include "scorecast/trading.hpp"
