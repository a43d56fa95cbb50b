#include "lasmc/kalman/kalman.hpp"

#include <algorithm>

namespace lasmc {

void CDLMSpec::validate() const {
  if (F.rows() < 1 || F.rows() != F.cols()) throw PreconditionError("CDLM transition matrix must be square");
  if (g.size() != F.rows()) throw PreconditionError("CDLM noise loading has the wrong dimension");
  if (h_obs.size() != F.rows()) throw PreconditionError("CDLM observation loading has the wrong dimension");
  if (!(obs_noise_var > 0.0)) throw PreconditionError("CDLM observation noise variance must be positive");
}

Eigen::MatrixXd CDLMSpec::packed_F() const {
  const Eigen::Index n = F.rows();
  if (!complex) return F;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  P.topLeftCorner(n, n) = F;
  P.bottomRightCorner(n, n) = F;
  return P;
}

Eigen::MatrixXd CDLMSpec::packed_Q() const {
  const Eigen::Index n = F.rows();
  const Eigen::MatrixXd gg = g * g.transpose();
  if (!complex) return gg;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = 0.5 * gg;
  Q.bottomRightCorner(n, n) = 0.5 * gg;
  return Q;
}

Eigen::MatrixXd CDLMSpec::packed_H() const {
  const Eigen::Index n = F.rows();
  if (!complex) return h_obs.transpose();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2 * n);
  H.block(0, 0, 1, n) = h_obs.transpose();
  H.block(1, n, 1, n) = h_obs.transpose();
  return H;
}

Eigen::MatrixXd CDLMSpec::packed_R() const {
  if (!complex) return Eigen::MatrixXd::Constant(1, 1, obs_noise_var);
  return Eigen::MatrixXd::Identity(2, 2) * (0.5 * obs_noise_var);
}

Eigen::MatrixXd CDLMSpec::control_matrix(std::complex<double> x) const {
  if (!complex) return Eigen::MatrixXd::Constant(1, 1, x.real());
  Eigen::MatrixXd M(2, 2);
  M << x.real(), -x.imag(), x.imag(), x.real();
  return M;
}

Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd P = Q, A = F;
  for (int it = 0; it < 200; ++it) {
    const Eigen::MatrixXd next = P + A * P * A.transpose();
    A = (A * A).eval();
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (!P.allFinite()) break;
    if (change <= 1e-15 * std::max(1.0, P.cwiseAbs().maxCoeff()) && A.cwiseAbs().maxCoeff() < 1e-12) break;
  }
  if (!P.allFinite() || A.cwiseAbs().maxCoeff() > 1e-6)
    throw NumericalError("stationary covariance does not exist: transition matrix is not stable");
  return 0.5 * (P + P.transpose());
}

KfStep kf_step(const GaussianBelief& b, const CDLMSpec& spec, std::complex<double> x, const Eigen::VectorXd& y) {
  spec.validate();
  if (b.mean.size() != spec.state_dim() || b.cov.rows() != spec.state_dim() || b.cov.cols() != spec.state_dim())
    throw PreconditionError("belief dimension does not match the CDLM");
  KfStep r{b, 0.0};
  kf_predict(r.belief.mean, r.belief.cov, spec.packed_F(), spec.packed_Q());
  if (x == std::complex<double>(0.0, 0.0)) return r;
  if (y.size() != spec.obs_dim()) throw PreconditionError("observation dimension does not match the CDLM");
  const Eigen::MatrixXd H = spec.control_matrix(x) * spec.packed_H();
  r.log_lik = kf_update(r.belief.mean, r.belief.cov, H, spec.packed_R(), y);
  return r;
}

Eigen::VectorXd fixed_lag_mean(const GaussianBelief& at_lag, const CDLMSpec& spec, std::span<const KfInput> inputs) {
  spec.validate();
  const Eigen::Index n = spec.state_dim();
  if (at_lag.mean.size() != n) throw PreconditionError("belief dimension does not match the CDLM");
  if (inputs.empty()) return at_lag.mean;
  Eigen::VectorXd mean(2 * n);
  mean << at_lag.mean, at_lag.mean;
  Eigen::MatrixXd cov(2 * n, 2 * n);
  cov << at_lag.cov, at_lag.cov, at_lag.cov, at_lag.cov;
  Eigen::MatrixXd F = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  F.topLeftCorner(n, n) = spec.packed_F();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = spec.packed_Q();
  const Eigen::MatrixXd H0 = spec.packed_H();
  const Eigen::MatrixXd R = spec.packed_R();
  for (const KfInput& in : inputs) {
    kf_predict(mean, cov, F, Q);
    if (!in.observed) continue;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(H0.rows(), 2 * n);
    H.leftCols(n) = spec.control_matrix(in.control) * H0;
    kf_update(mean, cov, H, R, in.y);
  }
  return mean.tail(n);
}

double clamp_psd(Eigen::MatrixXd& cov) {
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < 0.0) {
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    cov = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  }
  return lo;
}

}  // namespace lasmc
