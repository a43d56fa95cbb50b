#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lasmc/kalman/kalman.hpp"
#include "lasmc/lookahead/multilevel.hpp"
#include "lasmc/model.hpp"

namespace lasmc {

// Square 4^L-QAM with per-axis levels +-1, +-3, ..., +-(2^L - 1). Symbol
// index i has L base-4 digits (most significant first); digit k is the phase
// index of the k-th QPSK component r_k = e^{i pi (1 + 2 digit) / 4}, and the
// symbol is sum_k 2^{L-1-k} sqrt(2) r_k. Rotating a symbol by pi/2 adds one
// to every digit, so componentwise differential coding is rotation invariant.
class QamConstellation {
 public:
  explicit QamConstellation(int order);

  int order() const { return order_; }
  int levels() const { return L_; }  // QPSK components per symbol
  std::complex<double> value(int i) const { return values_.at(static_cast<std::size_t>(i)); }
  int digit(int i, int k) const;
  int compose(std::span<const int> digits) const;
  double mean_energy() const;

  int diff_encode(int prev, int info) const;  // digits add mod 4
  int diff_decode(int prev, int cur) const;   // digits subtract mod 4
  // 2L bits of an information symbol; each digit is Gray coded.
  std::vector<int> bits(int info) const;
  int bit_errors(int a, int b) const;

  // Level l groups symbols by their first l digits; level L is singletons.
  MultilevelPartition partition() const;
  // Nearest member of `subset` to z; ties go to the lowest index.
  int nearest(std::complex<double> z, std::span<const int> subset) const;

 private:
  int order_ = 0, L_ = 0;
  std::vector<std::complex<double>> values_;
};

struct QamConfig {
  int order = 16;
  // xi_t + phi_1 xi_{t-1} + ... = theta_0 u_t + theta_1 u_{t-1} + ...
  std::vector<double> phi = {-2.37409, 1.92936, -0.53208};
  std::vector<double> theta = {0.89409e-2, 2.68227e-2, 2.68227e-2, 0.89409e-2};
  double snr_db = 20.0;  // E|xi|^2 E|x|^2 / sigma^2
  int known_period = 10; // x_t known when (t - 1) % period == 0
  int frame = 500;       // T
  // Receiver starts from the true channel state instead of the stationary law.
  bool known_channel_start = false;

  void validate() const;
  CDLMSpec cdlm() const;
  double channel_power() const;  // stationary E|xi_t|^2
  double noise_var() const;
  bool known(int t) const { return t >= 1 && known_period > 0 && (t - 1) % known_period == 0; }
};

struct QamData {
  std::vector<int> x;     // transmitted symbol indices, x[0] is the reference 0
  std::vector<int> info;  // information symbol at t, -1 where x_t is known
  std::vector<std::complex<double>> y;        // index 0 unused
  std::vector<std::complex<double>> channel;  // xi_t
  Eigen::VectorXcd initial_state;             // channel state at t = 0
  double noise_var = 0.0;
  int horizon() const { return static_cast<int>(x.size()) - 1; }
};

inline constexpr int kQamKnownSymbol = 0;

QamData simulate_qam(const QamConfig& cfg, const QamConstellation& con, Rng& rng);

struct QamCarry {
  using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 8, 1>;
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 8, 8>;
  Vec mean;
  Mat cov;
  int t = -1;
};

// Mixture Kalman model for symbol detection: the channel state is
// marginalized, x_t is uniform on the constellation except at known times.
class QamModel {
 public:
  using State = int;
  using Carry = QamCarry;

  QamModel(const QamConfig& cfg, const QamConstellation& con, const QamData& data);

  int horizon() const { return static_cast<int>(y_.size()) - 1; }
  Carry initial_carry() const { return Carry{}; }
  Advance<Carry> advance(const Carry& c, int i, int t) const;
  Draw<int> draw_trial(const Carry& c, int t, Rng& rng) const;  // one-step posterior
  Draw<int> draw_pilot(const Carry& c, int t, Rng& rng) const;  // prior
  int alphabet_size(int) const { return con_.order(); }
  int symbol(int, int i) const { return i; }
  double prior_log_prob(const Carry&, int t, int i) const;
  // Nearest symbol to y_t / predicted channel within the subset.
  int greedy_index(const Carry& c, int t, std::span<const int> subset) const;

  // log g_t f_t for every symbol, sharing one prediction.
  std::vector<double> symbol_log_weights(const Carry& c, int t) const;
  std::complex<double> predicted_channel(const Carry& c) const;

  const QamConstellation& constellation() const { return con_; }

 private:
  void predict(const Carry& c, Carry::Vec& m, Carry::Mat& P) const;

  QamConfig cfg_;
  QamConstellation con_;
  std::vector<std::complex<double>> y_;
  Carry::Mat F_, Q_;
  Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::ColMajor, 2, 8> H_;
  Carry::Vec m0_;
  Carry::Mat P0_;
  double noise_var_ = 0.0;
  double log_uniform_ = 0.0;
};

}  // namespace lasmc
