#include "lasmc/models/nonlinear.hpp"

#include <cmath>

namespace lasmc {

void NonlinearParams::validate() const {
  if (!(sigma > 0.0) || !(eta > 0.0)) throw ConfigError("nonlinear noise scales sigma and eta must be positive");
  if (!(x0_var > 0.0)) throw ConfigError("nonlinear x0_var must be positive");
  if (!std::isfinite(x0_mean)) throw ConfigError("nonlinear x0_mean must be finite");
}

double nonlinear_drift(double x_prev, int t) {
  return 0.5 * x_prev + 25.0 * x_prev / (1.0 + x_prev * x_prev) + 8.0 * std::cos(1.2 * (t - 1));
}

NonlinearSample simulate_nonlinear(const NonlinearParams& p, int T, Rng& rng) {
  p.validate();
  if (T < 1) throw ConfigError("nonlinear horizon must be positive");
  NonlinearSample s;
  s.x.resize(static_cast<std::size_t>(T) + 1);
  s.y.y.resize(static_cast<std::size_t>(T) + 1);
  s.x[0] = p.x0_mean + std::sqrt(p.x0_var) * std_normal(rng);
  for (int t = 1; t <= T; ++t) {
    s.x[t] = nonlinear_drift(s.x[t - 1], t) + p.sigma * std_normal(rng);
    s.y.y[t] = Eigen::VectorXd::Constant(1, s.x[t] * s.x[t] / 20.0 + p.eta * std_normal(rng));
  }
  return s;
}

ModelSpec make_nonlinear_model(const NonlinearParams& p, ObservationSeq y) {
  p.validate();
  const double sv = p.sigma * p.sigma, ov = p.eta * p.eta;
  ModelSpec m;
  m.state_dim = 1;
  m.markovian = true;
  m.transition.sample = [p](History h, int t, Rng& rng) {
    if (h.empty()) return scalar_state(p.x0_mean + std::sqrt(p.x0_var) * std_normal(rng));
    return scalar_state(nonlinear_drift(h.back()(0), t) + p.sigma * std_normal(rng));
  };
  m.transition.log_density = [p, sv](History h, const StateVec& x, int t) {
    if (h.empty()) return log_normal_pdf(x(0), p.x0_mean, p.x0_var);
    return log_normal_pdf(x(0), nonlinear_drift(h.back()(0), t), sv);
  };
  m.log_observation = [ov](History, const StateVec& x, const Eigen::VectorXd& yt, int) {
    return log_normal_pdf(yt(0), x(0) * x(0) / 20.0, ov);
  };
  m.observations = std::move(y);
  m.validate();
  return m;
}

}  // namespace lasmc
