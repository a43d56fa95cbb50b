#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lasmc/errors.hpp"
#include "lasmc/logspace.hpp"

namespace lasmc {

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// z_t = F z_{t-1} + g u_t,  y_t = (h^H z_t) x_t + v_t.
// Complex systems are packed as real systems of twice the size: z -> [Re z; Im z],
// with u ~ CN(0, 1) and v ~ CN(0, obs_noise_var).
struct CDLMSpec {
  Eigen::MatrixXd F;
  Eigen::VectorXd g;
  Eigen::VectorXd h_obs;  // real coefficients
  double obs_noise_var = 1.0;
  bool complex = false;

  void validate() const;
  int state_dim() const { return static_cast<int>(F.rows()) * (complex ? 2 : 1); }
  int obs_dim() const { return complex ? 2 : 1; }
  Eigen::MatrixXd packed_F() const;
  Eigen::MatrixXd packed_Q() const;
  // Observation rows for control x = 1.
  Eigen::MatrixXd packed_H() const;
  Eigen::MatrixXd packed_R() const;
  // Mixing applied on the left of packed_H for control x.
  Eigen::MatrixXd control_matrix(std::complex<double> x) const;
};

// Stationary covariance of z_t = F z_{t-1} + w, w ~ N(0, Q); F must be stable.
Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q);

template <class V, class M, class FM, class QM>
void kf_predict(V& mean, M& cov, const FM& F, const QM& Q) {
  mean = (F * mean).eval();
  cov = (F * cov * F.transpose() + Q).eval();
}

// Measurement update in Joseph form; returns log N(y; H mean, H cov H' + R).
template <class V, class M, class HM, class RM, class YV>
double kf_update(V& mean, M& cov, const HM& H, const RM& R, const YV& y) {
  const auto S = (H * cov * H.transpose() + R).eval();
  const auto llt = S.llt();
  if (llt.info() != Eigen::Success || !(S.diagonal().minCoeff() > 0.0))
    throw NumericalError("Kalman breakdown: innovation covariance is not positive definite");
  const auto e = (y - H * mean).eval();
  const auto PHt = (cov * H.transpose()).eval();
  const auto Kt = llt.solve(PHt.transpose()).eval();  // K'
  mean = (mean + Kt.transpose() * e).eval();
  const auto IKH = (M::Identity(cov.rows(), cov.cols()) - Kt.transpose() * H).eval();
  cov = (IKH * cov * IKH.transpose() + Kt.transpose() * R * Kt).eval();
  cov = (0.5 * (cov + cov.transpose())).eval();
  const auto sol = llt.solve(e).eval();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < S.rows(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (static_cast<double>(S.rows()) * kLogTwoPi + logdet + e.dot(sol));
}

struct KfStep {
  GaussianBelief belief;
  double log_lik = 0.0;
};

// Predict then update with control x; x = 0 for a real system gives a pure
// prediction with zero likelihood contribution.
KfStep kf_step(const GaussianBelief& b, const CDLMSpec& spec, std::complex<double> x, const Eigen::VectorXd& y);

// One step of a fixed-lag pass: predict always, update only when observed.
struct KfInput {
  bool observed = false;
  std::complex<double> control = 1.0;
  Eigen::VectorXd y;
};

// E(z_{t-lag} | filtered belief at t-lag and the next `lag` inputs), by a
// filter on [z_s; z_{t-lag}].
Eigen::VectorXd fixed_lag_mean(const GaussianBelief& at_lag, const CDLMSpec& spec, std::span<const KfInput> inputs);

// Symmetrizes and lifts eigenvalues below zero; returns the most negative
// eigenvalue seen before clamping.
double clamp_psd(Eigen::MatrixXd& cov);

}  // namespace lasmc
