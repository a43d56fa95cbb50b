#include <algorithm>
#include <chrono>
#include <cmath>

#include "lasmc/bench/experiments.hpp"
#include "lasmc/bench/lagged.hpp"
#include "lasmc/kalman/tracking.hpp"

namespace lasmc::bench {

namespace {

constexpr double kQuantiles[] = {0.05, 0.25, 0.5, 0.75, 0.95};
constexpr const char* kQuantileNames[] = {"q05", "q25", "q50", "q75", "q95"};

TrackingData tracking_data(const ExperimentConfig& cfg, int rep) {
  Rng rng(data_seed(cfg.seed, rep));
  return simulate_tracking(cfg.tracking, cfg.T, rng);
}

// Pilot strategies look ahead through the selected pilot of each particle;
// recording its indicators lets the position estimate condition on them.
StrategyConfig with_paths(StrategyConfig s) {
  s.pilot.record_paths = s.kind == Strategy::pilot || s.kind == Strategy::adaptive;
  return s;
}

}  // namespace

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw PreconditionError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

LaggedSeries tracking_series(const ExperimentConfig& cfg, int rep, const StrategyConfig& strategy_in,
                             const ResampleConfig& resample, int m) {
  const StrategyConfig strategy = with_paths(strategy_in);
  const TrackingData data = tracking_data(cfg, rep);
  const TrackingModel model(cfg.tracking, data);
  const LagPlan plan = make_lag_plan(strategy, cfg.lookaheads);
  LaggedSeries out;
  out.totals = plan.totals;
  out.value.assign(static_cast<std::size_t>(plan.size()), std::vector<double>(static_cast<std::size_t>(cfg.T) + 1, 0.0));
  Rng rng(filter_seed(cfg.seed, rep));
  std::vector<int> ind;
  std::vector<double> joint;
  const FilterStats st = run_lagged(
      model, strategy, resample, m, rng, plan,
      [&](const ParticleSystem<TrackingModel>& sys, std::span<const double> w, int l, int s,
          const PilotBundle<int>* bundle) {
        const bool pilots = bundle && !bundle->paths.empty();
        auto pilot_index = [&](int j) {
          const std::size_t c = static_cast<std::size_t>(j) * bundle->n_candidates + bundle->selected[j];
          return std::pair{c, c * bundle->K};
        };
        if (pilots) {
          // The selected pilot path is proper jointly with x_{0:t} under
          // w^aux U / score; without smoothing the ratio is one.
          joint.assign(w.begin(), w.end());
          for (int j = 0; j < sys.size(); ++j) {
            const auto [c, q] = pilot_index(j);
            if (joint[j] > kNegInf) joint[j] += bundle->log_u[q] - bundle->log_score[c];
          }
        }
        out.value[l][s] = weighted_estimate(pilots ? std::span<const double>(joint) : w, [&](int j) {
                            const auto nodes = sys.lineage(j, s);
                            ind.clear();
                            for (std::size_t k = 1; k < nodes.size(); ++k) ind.push_back(nodes[k]->x);
                            if (pilots) {
                              const auto& path = bundle->paths[pilot_index(j).second];
                              ind.insert(ind.end(), path.begin(), path.end());
                            }
                            return model.fixed_lag_position(nodes.front()->carry, s, ind)(0);
                          }).value;
      });
  out.mean_ess = st.mean_ess();
  out.mean_depth = st.mean_depth();
  out.resamples = st.resample_count();
  return out;
}

ResultTable run_tracking(const ExperimentConfig& cfg, const ReferenceCache* ref) {
  if (cfg.experiment != Experiment::tracking) throw ConfigError("run_tracking needs experiment = tracking");
  cfg.validate();
  if (ref) ref->check_covers(cfg);
  const LagPlan plan = make_lag_plan(cfg.strategy, cfg.lookaheads);
  ResultTable tab;
  tab.labels = {{"experiment", "tracking"}, {"strategy", to_string(cfg.strategy.kind)}};
  for (int L : plan.totals) {
    const std::string sfx = "@" + std::to_string(L);
    tab.columns.push_back("mae1" + sfx);
    for (const char* q : kQuantileNames) tab.columns.push_back(std::string(q) + sfx);
    if (ref) tab.columns.push_back("mae2" + sfx);
  }
  for (const char* c : {"mean_ess", "mean_depth", "resamples"}) tab.columns.push_back(c);
  if (cfg.timing) tab.columns.push_back("wall_s");
  const std::size_t per_lag = 1 + std::size(kQuantiles) + (ref ? 1 : 0);
  tab.rows.assign(static_cast<std::size_t>(cfg.reps), {});
  // errors[r][l]: |error| for t = 1..T, kept for the pooled row.
  std::vector<std::vector<std::vector<double>>> err1(static_cast<std::size_t>(cfg.reps)), err2(err1.size());
  set_thread_count(cfg.threads);
  parallel_for(cfg.reps, [&](int r) {
    const auto start = std::chrono::steady_clock::now();
    const TrackingData data = tracking_data(cfg, r);
    const LaggedSeries s = tracking_series(cfg, r, cfg.strategy, cfg.resample, cfg.m);
    std::vector<double> row;
    auto& e1 = err1[static_cast<std::size_t>(r)];
    auto& e2 = err2[static_cast<std::size_t>(r)];
    for (int l = 0; l < plan.size(); ++l) {
      std::vector<double> a, b;
      for (int t = 1; t <= cfg.T; ++t) {
        a.push_back(std::abs(s.value[l][t] - data.truth[static_cast<std::size_t>(t)](0)));
        if (ref) b.push_back(std::abs(s.value[l][t] - ref->at(r, ref->total_index(plan.totals[l]), t)));
      }
      row.push_back(quantile(a, 0.5));
      for (double q : kQuantiles) row.push_back(quantile(a, q));
      if (ref) row.push_back(quantile(b, 0.5));
      e1.push_back(std::move(a));
      e2.push_back(std::move(b));
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
  std::vector<double> pooled(tab.columns.size(), std::nan(""));
  for (int l = 0; l < plan.size(); ++l) {
    std::vector<double> a, b;
    for (std::size_t r = 0; r < err1.size(); ++r) {
      a.insert(a.end(), err1[r][l].begin(), err1[r][l].end());
      b.insert(b.end(), err2[r][l].begin(), err2[r][l].end());
    }
    const std::size_t base = static_cast<std::size_t>(l) * per_lag;
    pooled[base] = quantile(a, 0.5);
    for (std::size_t q = 0; q < std::size(kQuantiles); ++q) pooled[base + 1 + q] = quantile(a, kQuantiles[q]);
    if (ref) pooled[base + per_lag - 1] = quantile(b, 0.5);
  }
  tab.extra.emplace_back("pooled", std::move(pooled));
  return tab;
}

}  // namespace lasmc::bench
