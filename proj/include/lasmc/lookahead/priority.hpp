#pragma once

#include <algorithm>
#include <vector>

#include "lasmc/engine.hpp"

namespace lasmc {

// Resampling scores b_j = w_j eta_j^{1/2}, where eta_j = K^{-1} sum_k U_jk^2
// and U_jk is the importance weight of a pilot x_{t+1:t+T_gap} drawn from the
// trial chain q_s (truncated at the horizon).
template <SequentialModel M>
std::vector<double> optimal_priority_scores(const ParticleSystem<M>& sys, const M& model, int T_gap, int K, Rng& rng,
                                            Track track = Track::concurrent) {
  if (T_gap < 1) throw PreconditionError("T_gap must be at least 1");
  if (K < 1) throw PreconditionError("pilot count K must be positive");
  const int t = sys.time();
  const int last = std::min(t + T_gap, model.horizon());
  const int m = sys.size();
  const auto w = sys.track(track);
  std::vector<double> score(static_cast<std::size_t>(m));
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    if (w[j] == kNegInf) {
      score[j] = kNegInf;
      return;
    }
    std::vector<double> lu2(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      typename M::Carry c = sys.frontier(j).carry;
      double lu = 0.0;
      for (int s = t + 1; s <= last && lu > kNegInf; ++s) {
        auto d = model.draw_trial(c, s, r);
        if (!(d.log_q > kNegInf)) throw NumericalError("improper trial: q_s is zero at the sampled state");
        auto a = model.advance(c, d.x, s);
        lu = finite_or_neg_inf(lu + a.log_target() - d.log_q);
        c = std::move(a.carry);
      }
      lu2[k] = 2.0 * lu;
    }
    score[j] = w[j] + 0.5 * log_mean_exp(lu2);
  });
  return score;
}

}  // namespace lasmc
