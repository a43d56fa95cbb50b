#include <chrono>
#include <cmath>
#include <memory>

#include "lasmc/bench/experiments.hpp"
#include "lasmc/bench/lagged.hpp"
#include "lasmc/kalman/qam.hpp"

namespace lasmc::bench {

ResultTable run_qam(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::qam) throw ConfigError("run_qam needs experiment = qam");
  cfg.validate();
  QamConfig qc = cfg.qam;
  qc.frame = cfg.T;
  const QamConstellation con(qc.order);
  StrategyConfig strategy = cfg.strategy;
  if (strategy.kind == Strategy::multilevel && cfg.constellation_partition)
    strategy.partition = std::make_shared<const MultilevelPartition>(con.partition());
  const LagPlan plan = make_lag_plan(strategy, cfg.lookaheads);
  ResultTable tab;
  tab.labels = {{"experiment", "qam"}, {"strategy", to_string(strategy.kind)}};
  for (int L : plan.totals) tab.columns.push_back("ber@" + std::to_string(L));
  for (const char* c : {"snr_db", "mean_ess", "mean_depth", "resamples"}) tab.columns.push_back(c);
  if (cfg.timing) tab.columns.push_back("wall_s");
  tab.rows.assign(static_cast<std::size_t>(cfg.reps), {});
  set_thread_count(cfg.threads);
  parallel_for(cfg.reps, [&](int r) {
    const auto start = std::chrono::steady_clock::now();
    Rng drng(data_seed(cfg.seed, r));
    const QamData data = simulate_qam(qc, con, drng);
    const QamModel model(qc, con, data);
    // MAP symbol at every target time; time 0 is the known reference.
    std::vector<std::vector<int>> dec(static_cast<std::size_t>(plan.size()),
                                      std::vector<int>(static_cast<std::size_t>(cfg.T) + 1, kQamKnownSymbol));
    std::vector<double> mass(static_cast<std::size_t>(con.order()));
    Rng rng(filter_seed(cfg.seed, r));
    const FilterStats st = run_lagged(model, strategy, cfg.resample, cfg.m, rng, plan,
                                      [&](const ParticleSystem<QamModel>& sys, std::span<const double> w, int l, int s,
                                          const PilotBundle<int>*) {
                                        const std::vector<double> p = shifted_exp(w);
                                        std::fill(mass.begin(), mass.end(), 0.0);
                                        for (int j = 0; j < sys.size(); ++j)
                                          if (p[j] > 0.0) mass[static_cast<std::size_t>(sys.state_at(j, s))] += p[j];
                                        int best = 0;
                                        for (int i = 1; i < con.order(); ++i)
                                          if (mass[i] > mass[best]) best = i;
                                        dec[l][s] = best;
                                      });
    std::vector<double> row;
    const int bits_per_symbol = 2 * con.levels();
    for (int l = 0; l < plan.size(); ++l) {
      long errors = 0, bits = 0;
      for (int t = 1; t <= cfg.T; ++t) {
        const int info = data.info[static_cast<std::size_t>(t)];
        if (info < 0) continue;
        errors += con.bit_errors(con.diff_decode(dec[l][t - 1], dec[l][t]), info);
        bits += bits_per_symbol;
      }
      row.push_back(bits ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0);
    }
    row.push_back(qc.snr_db);
    row.push_back(st.mean_ess());
    row.push_back(st.mean_depth());
    row.push_back(st.resample_count());
    if (cfg.timing)
      row.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    for (double v : row)
      if (!std::isfinite(v)) throw NumericalError("non-finite metric in repetition " + std::to_string(r));
    tab.rows[static_cast<std::size_t>(r)] = std::move(row);
  });
  return tab;
}

ResultTable run_experiment(const ExperimentConfig& cfg, const ReferenceCache* ref) {
  switch (cfg.experiment) {
    case Experiment::nonlinear:
      return run_nonlinear(cfg, ref);
    case Experiment::tracking:
      return run_tracking(cfg, ref);
    case Experiment::qam:
      if (ref) throw ConfigError("the qam experiment has no reference estimator");
      return run_qam(cfg);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace lasmc::bench
