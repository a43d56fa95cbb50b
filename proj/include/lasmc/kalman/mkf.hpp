#pragma once

#include <algorithm>

#include <Eigen/Dense>

#include "lasmc/kalman/kalman.hpp"
#include "lasmc/lookahead/runner.hpp"

namespace lasmc {

struct MkfStepInfo {
  int depth = 0;
  double min_eigenvalue = 0.0;  // smallest covariance eigenvalue before clamping
};

// Symmetrizes a belief covariance and lifts negative eigenvalues to zero.
template <class Mat>
double clamp_belief(Mat& cov) {
  Eigen::MatrixXd c = cov;
  const double lo = clamp_psd(c);
  cov = c;
  return lo;
}

// One mixture Kalman filter step: the discrete latent (symbol or indicator)
// moves by the configured lookahead strategy while each particle's Gaussian
// belief is updated exactly inside the model's advance. Beliefs at the new
// frontier are then clamped to symmetric PSD; the smallest eigenvalue seen
// before clamping is reported.
template <FiniteModel M>
  requires GaussianCarry<typename M::Carry>
MkfStepInfo mkf_step(ParticleSystem<M>& sys, const StrategyStepper<M>& stepper, Rng& rng,
                     PilotBundle<typename M::State>* bundle = nullptr) {
  MkfStepInfo info;
  info.depth = stepper.step(sys, rng, bundle);
  auto& layer = sys.frontier_layer_mut();
  std::vector<double> lo(layer.size(), 0.0);
  parallel_for(static_cast<int>(layer.size()), [&](int j) { lo[j] = clamp_belief(layer[j].carry.cov); });
  info.min_eigenvalue = lo.empty() ? 0.0 : *std::min_element(lo.begin(), lo.end());
  return info;
}

}  // namespace lasmc
