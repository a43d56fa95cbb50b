#include <chrono>
#include <cmath>

#include "lasmc/bench/experiments.hpp"
#include "lasmc/bench/lagged.hpp"
#include "lasmc/models/nonlinear.hpp"

namespace lasmc::bench {

namespace {

NonlinearSample nonlinear_data(const ExperimentConfig& cfg, int rep) {
  Rng rng(data_seed(cfg.seed, rep));
  return simulate_nonlinear(cfg.nonlinear, cfg.T, rng);
}

double rms(const std::vector<double>& est, const auto& truth, int T) {
  double s = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double e = est[static_cast<std::size_t>(t)] - truth(t);
    s += e * e;
  }
  return std::sqrt(s / T);
}

}  // namespace

LaggedSeries nonlinear_series(const ExperimentConfig& cfg, int rep, const StrategyConfig& strategy,
                              const ResampleConfig& resample, int m) {
  const NonlinearSample data = nonlinear_data(cfg, rep);
  const ModelSpec model = make_nonlinear_model(cfg.nonlinear, data.y);
  const LagPlan plan = make_lag_plan(strategy, cfg.lookaheads);
  LaggedSeries out;
  out.totals = plan.totals;
  out.value.assign(static_cast<std::size_t>(plan.size()), std::vector<double>(static_cast<std::size_t>(cfg.T) + 1, 0.0));
  Rng rng(filter_seed(cfg.seed, rep));
  const FilterStats st = run_lagged(model, strategy, resample, m, rng, plan,
                                    [&](const ParticleSystem<ModelSpec>& sys, std::span<const double> w, int l, int s,
                                        const PilotBundle<StateVec>*) {
                                      out.value[l][s] =
                                          weighted_estimate(w, [&](int j) { return sys.state_at(j, s)(0); }).value;
                                    });
  out.mean_ess = st.mean_ess();
  out.mean_depth = st.mean_depth();
  out.resamples = st.resample_count();
  return out;
}

ResultTable run_nonlinear(const ExperimentConfig& cfg, const ReferenceCache* ref) {
  if (cfg.experiment != Experiment::nonlinear) throw ConfigError("run_nonlinear needs experiment = nonlinear");
  cfg.validate();
  if (ref) ref->check_covers(cfg);
  const LagPlan plan = make_lag_plan(cfg.strategy, cfg.lookaheads);
  ResultTable tab;
  tab.labels = {{"experiment", "nonlinear"}, {"strategy", to_string(cfg.strategy.kind)}};
  for (int L : plan.totals) tab.columns.push_back("rmse1@" + std::to_string(L));
  if (ref)
    for (int L : plan.totals) tab.columns.push_back("rmse2@" + std::to_string(L));
  for (const char* c : {"mean_ess", "mean_depth", "resamples"}) tab.columns.push_back(c);
  if (cfg.timing) tab.columns.push_back("wall_s");
  tab.rows.assign(static_cast<std::size_t>(cfg.reps), {});
  set_thread_count(cfg.threads);
  parallel_for(cfg.reps, [&](int r) {
    const auto start = std::chrono::steady_clock::now();
    const NonlinearSample data = nonlinear_data(cfg, r);
    const LaggedSeries s = nonlinear_series(cfg, r, cfg.strategy, cfg.resample, cfg.m);
    std::vector<double> row;
    for (int l = 0; l < plan.size(); ++l)
      row.push_back(rms(s.value[l], [&](int t) { return data.x[static_cast<std::size_t>(t)]; }, cfg.T));
    if (ref)
      for (int l = 0; l < plan.size(); ++l) {
        const int k = ref->total_index(plan.totals[l]);
        row.push_back(rms(s.value[l], [&](int t) { return ref->at(r, k, t); }, cfg.T));
      }
    row.push_back(s.mean_ess);
    row.push_back(s.mean_depth);
    row.push_back(s.resamples);
    if (cfg.timing)
      row.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    for (double v : row)
      if (!std::isfinite(v)) throw NumericalError("non-finite metric in repetition " + std::to_string(r));
    tab.rows[static_cast<std::size_t>(r)] = std::move(row);
  });
  return tab;
}

}  // namespace lasmc::bench
