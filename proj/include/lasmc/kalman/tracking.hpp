#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lasmc/kalman/kalman.hpp"
#include "lasmc/model.hpp"

namespace lasmc {

// Single target with random acceleration, detected with probability p_d,
// plus Poisson(clutter_rate * window) false detections uniform on a window
// centered at the predicted position.
struct ClutterModel {
  double p_d = 0.8;
  double clutter_rate = 0.1;
  double window = 100.0;
  double obs_noise_var = 1.0;  // r^2
  double accel_var = 0.1;      // sigma^2
  Eigen::Vector2d prior_mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d prior_cov = (Eigen::Matrix2d() << 1.0, 0.0, 0.0, 0.1).finished();

  void validate() const;
  CDLMSpec cdlm() const;  // position/velocity with observation of position
};

struct TrackingScan {
  std::vector<double> detections;
  double center = 0.0;
};

struct TrackingData {
  std::vector<Eigen::Vector2d> truth;  // x_0..x_T
  std::vector<TrackingScan> scans;     // index 0 unused
  std::vector<int> true_indicator;     // 0 missed, k = detection k (1-based); index 0 unused
  int horizon() const { return static_cast<int>(scans.size()) - 1; }
};

TrackingData simulate_tracking(const ClutterModel& cm, int T, Rng& rng);

struct TrackCarry {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  int t = -1;
};

// Mixture Kalman model over indicators I_t in {0..n_t}; the target state is
// marginalized. p(y_t, I_t | past) is proportional to (1 - p_d) lambda for
// I_t = 0 and p_d N(y_tk; predicted position, P11 + r^2) for I_t = k.
class TrackingModel {
 public:
  using State = int;
  using Carry = TrackCarry;

  TrackingModel(ClutterModel cm, const TrackingData& data);

  int horizon() const { return static_cast<int>(scans_.size()) - 1; }
  Carry initial_carry() const { return Carry{}; }
  Advance<Carry> advance(const Carry& c, int I, int t) const;
  Draw<int> draw_trial(const Carry& c, int t, Rng& rng) const;
  Draw<int> draw_pilot(const Carry& c, int t, Rng& rng) const { return draw_trial(c, t, rng); }
  int alphabet_size(int t) const;
  int symbol(int, int i) const { return i; }

  Eigen::VectorXd feature(const Carry& c, int) const { return c.mean; }
  double summary(const Carry& c, int) const { return c.mean(0); }
  bool smoothing_supported() const { return true; }

  const ClutterModel& clutter() const { return cm_; }
  const CDLMSpec& cdlm() const { return spec_; }
  const TrackingScan& scan(int t) const { return scans_.at(static_cast<std::size_t>(t)); }

  // log of p(y_t, I_t = i | past) up to a constant for every i.
  std::vector<double> indicator_log_weights(const Carry& c, int t) const;

  // E(x_{s} | indicators I_{s+1..s+k}, data) starting from the filtered
  // carry at s; indicators[k-1] belongs to time s + k.
  Eigen::Vector2d fixed_lag_position(const Carry& at_lag, int s, std::span<const int> indicators) const;

 private:
  ClutterModel cm_;
  CDLMSpec spec_;
  Eigen::Matrix2d F_, Q_;
  std::vector<TrackingScan> scans_;
  double log_miss_ = 0.0, log_detect_ = 0.0;
};

}  // namespace lasmc
