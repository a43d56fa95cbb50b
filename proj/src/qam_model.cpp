#include "lasmc/kalman/qam.hpp"

#include <cmath>
#include <string>

namespace lasmc {

namespace {

constexpr int kGray[4] = {0, 1, 3, 2};

// (Re, Im) of sqrt(2) e^{i pi (1 + 2d) / 4}.
std::complex<double> qpsk(int d) {
  static const std::complex<double> v[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  return v[d];
}

Eigen::Matrix2d mixing(std::complex<double> x) {
  Eigen::Matrix2d M;
  M << x.real(), -x.imag(), x.imag(), x.real();
  return M;
}

}  // namespace

QamConstellation::QamConstellation(int order) : order_(order) {
  int n = 1;
  while (n < order) {
    n *= 4;
    ++L_;
  }
  if (order < 4 || n != order) throw ConfigError("QAM order must be a power of 4 (got " + std::to_string(order) + ")");
  values_.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    std::complex<double> v = 0.0;
    for (int k = 0; k < L_; ++k) v += static_cast<double>(1 << (L_ - 1 - k)) * qpsk(digit(i, k));
    values_[static_cast<std::size_t>(i)] = v;
  }
}

int QamConstellation::digit(int i, int k) const {
  if (i < 0 || i >= order_ || k < 0 || k >= L_) throw PreconditionError("QAM digit out of range");
  int v = i;
  for (int s = L_ - 1; s > k; --s) v /= 4;
  return v % 4;
}

int QamConstellation::compose(std::span<const int> digits) const {
  if (static_cast<int>(digits.size()) != L_) throw PreconditionError("QAM digit count mismatch");
  int i = 0;
  for (int d : digits) {
    if (d < 0 || d > 3) throw PreconditionError("QAM digit out of range");
    i = 4 * i + d;
  }
  return i;
}

double QamConstellation::mean_energy() const {
  double e = 0.0;
  for (const auto& v : values_) e += std::norm(v);
  return e / static_cast<double>(order_);
}

int QamConstellation::diff_encode(int prev, int info) const {
  std::vector<int> d(static_cast<std::size_t>(L_));
  for (int k = 0; k < L_; ++k) d[k] = (digit(prev, k) + digit(info, k)) % 4;
  return compose(d);
}

int QamConstellation::diff_decode(int prev, int cur) const {
  std::vector<int> d(static_cast<std::size_t>(L_));
  for (int k = 0; k < L_; ++k) d[k] = (digit(cur, k) - digit(prev, k) + 4) % 4;
  return compose(d);
}

std::vector<int> QamConstellation::bits(int info) const {
  std::vector<int> b;
  for (int k = 0; k < L_; ++k) {
    const int g = kGray[digit(info, k)];
    b.push_back((g >> 1) & 1);
    b.push_back(g & 1);
  }
  return b;
}

int QamConstellation::bit_errors(int a, int b) const {
  const auto x = bits(a), y = bits(b);
  int e = 0;
  for (std::size_t i = 0; i < x.size(); ++i) e += x[i] != y[i] ? 1 : 0;
  return e;
}

MultilevelPartition QamConstellation::partition() const {
  std::vector<std::vector<std::vector<int>>> levels(static_cast<std::size_t>(L_) + 1);
  for (int l = 0; l <= L_; ++l) {
    int groups = 1;
    for (int k = 0; k < l; ++k) groups *= 4;
    const int size = order_ / groups;
    for (int g = 0; g < groups; ++g) {
      std::vector<int> s;
      for (int i = g * size; i < (g + 1) * size; ++i) s.push_back(i);
      levels[static_cast<std::size_t>(l)].push_back(std::move(s));
    }
  }
  return MultilevelPartition(std::move(levels), order_);
}

int QamConstellation::nearest(std::complex<double> z, std::span<const int> subset) const {
  if (subset.empty()) throw PreconditionError("nearest symbol over an empty subset");
  int best = subset.front();
  double bd = std::norm(z - value(best));
  for (int i : subset) {
    const double d = std::norm(z - value(i));
    if (d < bd || (d == bd && i < best)) {
      best = i;
      bd = d;
    }
  }
  return best;
}

void QamConfig::validate() const {
  QamConstellation check(order);
  if (phi.empty() || phi.size() > 3) throw ConfigError("ARMA order must be 1..3");
  if (theta.size() != phi.size() + 1) throw ConfigError("ARMA needs one more theta than phi");
  if (frame < 1) throw ConfigError("QAM frame length must be positive");
  if (known_period < 0) throw ConfigError("known_period must be nonnegative");
  if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
}

CDLMSpec QamConfig::cdlm() const {
  const int n = static_cast<int>(phi.size()) + 1;
  CDLMSpec s;
  s.F = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) s.F(0, k) = -phi[static_cast<std::size_t>(k)];
  for (int k = 1; k < n; ++k) s.F(k, k - 1) = 1.0;
  s.g = Eigen::VectorXd::Zero(n);
  s.g(0) = 1.0;
  s.h_obs = Eigen::Map<const Eigen::VectorXd>(theta.data(), n);
  s.obs_noise_var = 1.0;
  s.complex = true;
  return s;
}

double QamConfig::channel_power() const {
  const CDLMSpec s = cdlm();
  const Eigen::MatrixXd P = stationary_covariance(s.F, s.g * s.g.transpose());
  return s.h_obs.dot(P * s.h_obs);
}

double QamConfig::noise_var() const {
  const QamConstellation con(order);
  return channel_power() * con.mean_energy() / std::pow(10.0, snr_db / 10.0);
}

QamData simulate_qam(const QamConfig& cfg, const QamConstellation& con, Rng& rng) {
  cfg.validate();
  if (con.order() != cfg.order) throw PreconditionError("constellation does not match the config");
  const CDLMSpec s = cfg.cdlm();
  const Eigen::Index n = s.F.rows();
  const Eigen::MatrixXd P = stationary_covariance(s.F, s.g * s.g.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const double half = std::sqrt(0.5);
  auto cnormal = [&](Eigen::Index k) {
    Eigen::VectorXcd v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = {half * std_normal(rng), half * std_normal(rng)};
    return v;
  };
  QamData d;
  const int T = cfg.frame;
  d.noise_var = cfg.noise_var();
  d.x.assign(static_cast<std::size_t>(T) + 1, kQamKnownSymbol);
  d.info.assign(static_cast<std::size_t>(T) + 1, -1);
  d.y.assign(static_cast<std::size_t>(T) + 1, 0.0);
  d.channel.assign(static_cast<std::size_t>(T) + 1, 0.0);
  Eigen::VectorXcd z = root.cast<std::complex<double>>() * cnormal(n);
  d.initial_state = z;
  const Eigen::MatrixXcd F = s.F.cast<std::complex<double>>();
  const double sv = std::sqrt(d.noise_var);
  std::uniform_int_distribution<int> pick(0, cfg.order - 1);
  for (int t = 1; t <= T; ++t) {
    Eigen::VectorXcd u = cnormal(1);
    z = (F * z).eval();
    z(0) += u(0);
    const std::complex<double> xi = s.h_obs.cast<std::complex<double>>().dot(z);
    d.channel[t] = xi;
    if (cfg.known(t)) {
      d.x[t] = kQamKnownSymbol;
    } else {
      d.info[t] = pick(rng);
      d.x[t] = con.diff_encode(d.x[t - 1], d.info[t]);
    }
    const std::complex<double> v(sv * half * std_normal(rng), sv * half * std_normal(rng));
    d.y[t] = xi * con.value(d.x[t]) + v;
  }
  return d;
}

QamModel::QamModel(const QamConfig& cfg, const QamConstellation& con, const QamData& data)
    : cfg_(cfg), con_(con), y_(data.y), noise_var_(data.noise_var) {
  cfg.validate();
  if (con.order() != cfg.order) throw PreconditionError("constellation does not match the config");
  if (!(noise_var_ > 0.0)) throw PreconditionError("QAM noise variance must be positive");
  const CDLMSpec s = cfg.cdlm();
  F_ = s.packed_F();
  Q_ = s.packed_Q();
  H_ = s.packed_H();
  const Eigen::MatrixXd P = stationary_covariance(s.F, s.g * s.g.transpose());
  const Eigen::Index n = s.F.rows();
  P0_ = Carry::Mat::Zero(2 * n, 2 * n);
  P0_.topLeftCorner(n, n) = 0.5 * P;
  P0_.bottomRightCorner(n, n) = 0.5 * P;
  m0_ = Carry::Vec::Zero(2 * n);
  if (cfg.known_channel_start) {
    if (data.initial_state.size() != n) throw PreconditionError("known channel start needs the initial channel state");
    m0_ << data.initial_state.real(), data.initial_state.imag();
    P0_.setZero();
  }
  log_uniform_ = -std::log(static_cast<double>(con.order()));
}

double QamModel::prior_log_prob(const Carry&, int t, int i) const {
  if (t == 0 || cfg_.known(t)) return i == kQamKnownSymbol ? 0.0 : kNegInf;
  return log_uniform_;
}

void QamModel::predict(const Carry& c, Carry::Vec& m, Carry::Mat& P) const {
  m = F_ * c.mean;
  P = F_ * c.cov * F_.transpose() + Q_;
}

Advance<QamCarry> QamModel::advance(const Carry& c, int i, int t) const {
  if (t != c.t + 1) throw PreconditionError("advance out of order");
  if (t > horizon()) throw PreconditionError("horizon exceeded at t=" + std::to_string(t));
  if (i < 0 || i >= con_.order()) throw PreconditionError("symbol index outside the constellation");
  Advance<Carry> a;
  a.carry.t = t;
  a.log_transition = prior_log_prob(c, t, i);
  if (t == 0) {
    a.carry.mean = m0_;
    a.carry.cov = P0_;
    return a;
  }
  predict(c, a.carry.mean, a.carry.cov);
  if (a.log_transition == kNegInf) return a;
  const Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::ColMajor, 2, 8> H = mixing(con_.value(i)) * H_;
  const Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * (0.5 * noise_var_);
  const Eigen::Vector2d y(y_[t].real(), y_[t].imag());
  a.log_observation = kf_update(a.carry.mean, a.carry.cov, H, R, y);
  return a;
}

std::vector<double> QamModel::symbol_log_weights(const Carry& c, int t) const {
  const int n = con_.order();
  std::vector<double> lw(static_cast<std::size_t>(n), kNegInf);
  if (t == 0) {
    lw[kQamKnownSymbol] = 0.0;
    return lw;
  }
  Carry::Vec m;
  Carry::Mat P;
  predict(c, m, P);
  const Eigen::Vector2d hm = H_ * m;
  const Eigen::Matrix2d A = H_ * P * H_.transpose();
  const Eigen::Vector2d y(y_[t].real(), y_[t].imag());
  for (int i = 0; i < n; ++i) {
    const double lp = prior_log_prob(c, t, i);
    if (lp == kNegInf) continue;
    const Eigen::Matrix2d M = mixing(con_.value(i));
    const Eigen::Matrix2d S = M * A * M.transpose() + Eigen::Matrix2d::Identity() * (0.5 * noise_var_);
    const Eigen::Vector2d e = y - M * hm;
    const double det = S.determinant();
    if (!(det > 0.0)) throw NumericalError("Kalman breakdown: innovation covariance is not positive definite");
    lw[static_cast<std::size_t>(i)] = lp - 0.5 * (2.0 * kLogTwoPi + std::log(det) + e.dot(S.inverse() * e));
  }
  return lw;
}

Draw<int> QamModel::draw_trial(const Carry& c, int t, Rng& rng) const {
  std::vector<double> lw = symbol_log_weights(c, t);
  const double z = log_sum_exp(lw);
  if (z == kNegInf) throw NumericalError("symbol posterior has no support at t=" + std::to_string(t));
  const int i = sample_log_categorical(lw, rng);
  return {i, lw[static_cast<std::size_t>(i)] - z};
}

Draw<int> QamModel::draw_pilot(const Carry& c, int t, Rng& rng) const {
  if (t == 0 || cfg_.known(t)) return {kQamKnownSymbol, 0.0};
  (void)c;
  std::uniform_int_distribution<int> pick(0, con_.order() - 1);
  return {pick(rng), log_uniform_};
}

std::complex<double> QamModel::predicted_channel(const Carry& c) const {
  const Eigen::Vector2d hm = H_ * (F_ * c.mean);
  return {hm(0), hm(1)};
}

int QamModel::greedy_index(const Carry& c, int t, std::span<const int> subset) const {
  if (subset.empty()) throw PreconditionError("greedy choice over an empty subset");
  if (t == 0 || cfg_.known(t)) {
    for (int i : subset)
      if (i == kQamKnownSymbol) return i;
    return subset.front();
  }
  const std::complex<double> xi = predicted_channel(c);
  const std::complex<double> z = std::abs(xi) > 0.0 ? y_[t] / xi : std::complex<double>(0.0, 0.0);
  return con_.nearest(z, subset);
}

}  // namespace lasmc
