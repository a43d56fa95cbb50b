#include "lasmc/kalman/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace lasmc {

namespace {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;
using Row2 = Eigen::Matrix<double, 1, 2>;
using Row4 = Eigen::Matrix<double, 1, 4>;
using Mat1 = Eigen::Matrix<double, 1, 1>;

}  // namespace

void ClutterModel::validate() const {
  if (!(p_d > 0.0 && p_d <= 1.0)) throw ConfigError("p_d must lie in (0, 1]");
  if (!(clutter_rate > 0.0)) throw ConfigError("clutter_rate must be positive");
  if (!(window > 0.0)) throw ConfigError("window must be positive");
  if (!(obs_noise_var > 0.0)) throw ConfigError("obs_noise_var must be positive");
  if (!(accel_var > 0.0)) throw ConfigError("accel_var must be positive");
}

CDLMSpec ClutterModel::cdlm() const {
  CDLMSpec s;
  s.F = (Eigen::Matrix2d() << 1.0, 1.0, 0.0, 1.0).finished();
  s.g = Eigen::Vector2d(0.5, 1.0) * std::sqrt(accel_var);
  s.h_obs = Eigen::Vector2d(1.0, 0.0);
  s.obs_noise_var = obs_noise_var;
  return s;
}

TrackingData simulate_tracking(const ClutterModel& cm, int T, Rng& rng) {
  cm.validate();
  if (T < 1) throw ConfigError("tracking horizon must be positive");
  const CDLMSpec spec = cm.cdlm();
  const Eigen::Matrix2d F = spec.F;
  const Eigen::Vector2d g = spec.g;
  const Eigen::LLT<Eigen::Matrix2d> prior(cm.prior_cov);
  TrackingData d;
  d.truth.resize(static_cast<std::size_t>(T) + 1);
  d.scans.resize(static_cast<std::size_t>(T) + 1);
  d.true_indicator.assign(static_cast<std::size_t>(T) + 1, 0);
  d.truth[0] = cm.prior_mean + prior.matrixL() * Eigen::Vector2d(std_normal(rng), std_normal(rng));
  std::poisson_distribution<int> clutter_count(cm.clutter_rate * cm.window);
  const double r = std::sqrt(cm.obs_noise_var);
  for (int t = 1; t <= T; ++t) {
    const Eigen::Vector2d pred = F * d.truth[t - 1];
    d.truth[t] = pred + g * std_normal(rng);
    TrackingScan& s = d.scans[t];
    s.center = pred(0);
    const double lo = s.center - 0.5 * cm.window;
    std::vector<std::pair<double, bool>> det;
    if (uniform01(rng) < cm.p_d) {
      const double z = d.truth[t](0) + r * std_normal(rng);
      if (z >= lo && z <= lo + cm.window) det.emplace_back(z, true);
    }
    const int n = clutter_count(rng);
    for (int k = 0; k < n; ++k) det.emplace_back(lo + cm.window * uniform01(rng), false);
    std::sort(det.begin(), det.end());
    for (std::size_t k = 0; k < det.size(); ++k) {
      s.detections.push_back(det[k].first);
      if (det[k].second) d.true_indicator[t] = static_cast<int>(k) + 1;
    }
  }
  return d;
}

TrackingModel::TrackingModel(ClutterModel cm, const TrackingData& data)
    : cm_(std::move(cm)), spec_(cm_.cdlm()), scans_(data.scans) {
  cm_.validate();
  if (scans_.size() < 2) throw PreconditionError("tracking data needs at least one scan");
  F_ = spec_.F;
  Q_ = spec_.g * spec_.g.transpose();
  log_miss_ = std::log((1.0 - cm_.p_d) * cm_.clutter_rate);
  log_detect_ = std::log(cm_.p_d);
}

int TrackingModel::alphabet_size(int t) const {
  if (t == 0) return 1;
  return static_cast<int>(scan(t).detections.size()) + 1;
}

Advance<TrackCarry> TrackingModel::advance(const Carry& c, int I, int t) const {
  if (t != c.t + 1) throw PreconditionError("advance out of order");
  if (t > horizon()) throw PreconditionError("horizon exceeded at t=" + std::to_string(t));
  Advance<Carry> a;
  a.carry.t = t;
  if (t == 0) {
    if (I != 0) throw PreconditionError("indicator at t=0 must be 0");
    a.carry.mean = cm_.prior_mean;
    a.carry.cov = cm_.prior_cov;
    return a;
  }
  const auto& det = scan(t).detections;
  if (I < 0 || I > static_cast<int>(det.size())) throw PreconditionError("indicator outside 0..n_t");
  a.carry.mean = c.mean;
  a.carry.cov = c.cov;
  kf_predict(a.carry.mean, a.carry.cov, F_, Q_);
  if (I == 0) {
    a.log_transition = log_miss_;
    return a;
  }
  a.log_transition = log_detect_;
  const Row2 H(1.0, 0.0);
  const Mat1 R = Mat1::Constant(cm_.obs_noise_var);
  a.log_observation = kf_update(a.carry.mean, a.carry.cov, H, R, Mat1::Constant(det[static_cast<std::size_t>(I - 1)]));
  return a;
}

std::vector<double> TrackingModel::indicator_log_weights(const Carry& c, int t) const {
  if (t == 0) return {0.0};
  const auto& det = scan(t).detections;
  const Eigen::Vector2d m = F_ * c.mean;
  const Eigen::Matrix2d P = F_ * c.cov * F_.transpose() + Q_;
  const double S = P(0, 0) + cm_.obs_noise_var;
  std::vector<double> lw(det.size() + 1);
  lw[0] = log_miss_;
  for (std::size_t k = 0; k < det.size(); ++k) lw[k + 1] = log_detect_ + log_normal_pdf(det[k], m(0), S);
  return lw;
}

Draw<int> TrackingModel::draw_trial(const Carry& c, int t, Rng& rng) const {
  if (t == 0) return {0, 0.0};
  std::vector<double> lw = indicator_log_weights(c, t);
  const double z = log_sum_exp(lw);
  if (z == kNegInf) throw NumericalError("indicator posterior has no support at t=" + std::to_string(t));
  const int i = sample_log_categorical(lw, rng);
  return {i, lw[i] - z};
}

Eigen::Vector2d TrackingModel::fixed_lag_position(const Carry& at_lag, int s, std::span<const int> indicators) const {
  if (indicators.empty()) return at_lag.mean;
  if (s + static_cast<int>(indicators.size()) > horizon()) throw PreconditionError("fixed-lag window exceeds the horizon");
  Vec4 mean;
  mean << at_lag.mean, at_lag.mean;
  Mat4 cov;
  cov << at_lag.cov, at_lag.cov, at_lag.cov, at_lag.cov;
  Mat4 F = Mat4::Identity();
  F.topLeftCorner<2, 2>() = F_;
  Mat4 Q = Mat4::Zero();
  Q.topLeftCorner<2, 2>() = Q_;
  const Row4 H(1.0, 0.0, 0.0, 0.0);
  const Mat1 R = Mat1::Constant(cm_.obs_noise_var);
  for (std::size_t k = 0; k < indicators.size(); ++k) {
    kf_predict(mean, cov, F, Q);
    const int I = indicators[k];
    if (I == 0) continue;
    const auto& det = scan(s + 1 + static_cast<int>(k)).detections;
    kf_update(mean, cov, H, R, Mat1::Constant(det.at(static_cast<std::size_t>(I - 1))));
  }
  return mean.tail<2>();
}

}  // namespace lasmc
