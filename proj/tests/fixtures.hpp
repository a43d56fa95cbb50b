#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lasmc/models/hmm.hpp"
#include "lasmc/oracle/oracle.hpp"

namespace lasmc::testing {

// Two-state chain shared by the proper-weighting, variance and
// information-loss checks. Same numbers as two_state_exact().
inline HmmParams two_state_params() {
  HmmParams p;
  p.init = Eigen::Vector2d(0.5, 0.5);
  p.trans.resize(2, 2);
  p.trans << 0.9, 0.1, 0.2, 0.8;
  p.emit.resize(2, 2);
  p.emit << 0.8, 0.2, 0.3, 0.7;
  return p;
}

template <class S>
TwoStateHmm<S> two_state_exact() {
  return TwoStateHmm<S>{S(1) / S(2), {S(9) / S(10), S(4) / S(5)}, {S(1) / S(5), S(7) / S(10)}};
}

inline ObservationSeq two_state_observations(int T) {
  const std::vector<double> y = {0, 1, 1, 0, 1, 1, 0, 0, 1, 0};
  return ObservationSeq::from_scalars(std::span<const double>(y.data(), static_cast<std::size_t>(T)));
}

inline ModelSpec two_state_model(int T, TrialKind trial = TrialKind::prior) {
  return make_hmm_model(two_state_params(), two_state_observations(T), trial);
}

inline double indicator(const StateVec& x, double v) { return x(0) == v ? 1.0 : 0.0; }

// |estimate - truth| in units of the Monte Carlo standard error.
inline double z_score(double estimate, double se, double truth) {
  return se > 0.0 ? std::abs(estimate - truth) / se : (estimate == truth ? 0.0 : INFINITY);
}

}  // namespace lasmc::testing
