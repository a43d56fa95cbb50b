#pragma once

#include <vector>

#include "lasmc/bench/config.hpp"
#include "lasmc/bench/csv.hpp"
#include "lasmc/bench/reference.hpp"

namespace lasmc::bench {

// Every repetition simulates data from data_seed(seed, rep) and filters with
// filter_seed(seed, rep); repetitions run in parallel and rows are ordered by
// repetition, so the table is independent of the thread count.
ResultTable run_experiment(const ExperimentConfig& cfg, const ReferenceCache* ref = nullptr);

// Per-repetition columns:
//   nonlinear: rmse1@L, rmse2@L (with a reference), mean_ess, mean_depth, resamples
//   tracking:  mae1@L, q50/q90/q99@L of |error|, mae2@L (with a reference), ...
//   qam:       ber@L, ...
// A pooled row is added for tracking: medians and quantiles over all
// repetitions and times.
ResultTable run_nonlinear(const ExperimentConfig& cfg, const ReferenceCache* ref);
ResultTable run_tracking(const ExperimentConfig& cfg, const ReferenceCache* ref);
ResultTable run_qam(const ExperimentConfig& cfg);

// Position estimates E(x_t | ...) for t = 1..T at every plan entry, from one
// repetition; used by the tracking driver and its reference.
struct LaggedSeries {
  std::vector<int> totals;
  std::vector<std::vector<double>> value;  // [l][t], index 0 unused
  double mean_ess = 0.0, mean_depth = 0.0;
  int resamples = 0;
};

LaggedSeries nonlinear_series(const ExperimentConfig& cfg, int rep, const StrategyConfig& strategy,
                              const ResampleConfig& resample, int m);
LaggedSeries tracking_series(const ExperimentConfig& cfg, int rep, const StrategyConfig& strategy,
                             const ResampleConfig& resample, int m);

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double p);

}  // namespace lasmc::bench
