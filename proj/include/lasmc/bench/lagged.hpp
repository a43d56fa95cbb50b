#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "lasmc/lookahead/runner.hpp"

namespace lasmc::bench {

// Reported total lookaheads and the lag delta = L - lead at which each one is
// read from the particle paths. Totals below the lead are dropped.
struct LagPlan {
  int lead = 0;
  std::vector<int> totals;
  std::vector<int> lags;

  int max_lag() const { return lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end()); }
  int size() const { return static_cast<int>(totals.size()); }
};

inline LagPlan make_lag_plan(const StrategyConfig& cfg, const std::vector<int>& totals) {
  LagPlan p;
  p.lead = estimate_lead(cfg);
  for (int L : totals) {
    if (L < p.lead || std::find(p.totals.begin(), p.totals.end(), L) != p.totals.end()) continue;
    p.totals.push_back(L);
    p.lags.push_back(L - p.lead);
  }
  if (p.totals.empty()) throw ConfigError("no requested lookahead is reachable: the strategy already looks " +
                                          std::to_string(p.lead) + " steps ahead");
  return p;
}

// Runs the filter and calls consume(sys, logw, l, s, bundle) for every plan
// entry l and target time s in 1..T, exactly once per (l, s). Target s is read
// at frontier s + lag, or at the horizon when s + lag > T.
template <SequentialModel M, class Consume>
FilterStats run_lagged(const M& model, const StrategyConfig& cfg, const ResampleConfig& rcfg, int m, Rng& rng,
                       const LagPlan& plan, Consume&& consume) {
  using State = typename M::State;
  const int T = model.horizon();
  const Track track = estimate_track(cfg);
  const int retain = std::max(plan.max_lag(), cfg.delta) + 2;
  auto obs = [&](const ParticleSystem<M>& sys, const StepRecord& rec, const PilotBundle<State>* bundle) {
    const int t = rec.t;
    if (t < 1) return;
    const std::span<const double> w = sys.track(track);
    for (int l = 0; l < plan.size(); ++l) {
      const int d = plan.lags[l];
      if (t - d >= 1) consume(sys, w, l, t - d, bundle);
      if (t == T)
        for (int s = std::max(1, T - d + 1); s <= T; ++s) consume(sys, w, l, s, bundle);
    }
  };
  return run_filter(model, cfg, rcfg, m, rng, obs, retain);
}

}  // namespace lasmc::bench
