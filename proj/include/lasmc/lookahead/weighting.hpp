#pragma once

#include "lasmc/engine.hpp"

namespace lasmc {

// Paths are carried delta steps ahead of the estimation time: the frontier is
// t + delta and E_{pi_{t+delta}} h(x_t) reads the time-t prefix with the
// current weights.
template <SequentialModel M>
ParticleSystem<M> lookahead_weighting_initialize(const M& model, int m, int delta, Rng& rng, int retain_depth = 0) {
  if (delta < 0) throw PreconditionError("lookahead depth must be nonnegative");
  if (retain_depth > 0 && retain_depth <= delta) throw PreconditionError("retain depth must exceed the lookahead");
  ParticleSystem<M> sys = initialize(model, m, rng, retain_depth);
  for (int s = 1; s <= delta; ++s) sis_step(sys, model, rng);
  return sys;
}

template <SequentialModel M>
void lookahead_weighting_step(ParticleSystem<M>& sys, const M& model, int delta, Rng& rng) {
  if (delta < 0) throw PreconditionError("lookahead depth must be nonnegative");
  if (sys.time() + 1 > model.horizon())
    throw PreconditionError("horizon exceeded: lookahead weighting needs y_" + std::to_string(sys.time() + 1));
  sis_step(sys, model, rng);
}

// Weighted estimate of h at `lag` steps behind the frontier.
template <SequentialModel M, class H>
Estimate lagged_estimate(const ParticleSystem<M>& sys, int lag, H&& h, Track track = Track::concurrent) {
  const int s = sys.time() - lag;
  return weighted_estimate(sys.track(track), [&](int j) { return h(sys.state_at(j, s)); });
}

}  // namespace lasmc
