#pragma once

#include <vector>

#include "lasmc/model.hpp"

namespace lasmc {

// x_t = 0.5 x_{t-1} + 25 x_{t-1} / (1 + x_{t-1}^2) + 8 cos(1.2 (t - 1)) + u_t,
// y_t = x_t^2 / 20 + v_t, u_t ~ N(0, sigma^2), v_t ~ N(0, eta^2).
struct NonlinearParams {
  double sigma = 1.0;
  double eta = 1.0;
  double x0_mean = 0.0;
  double x0_var = 1.0;  // x_0 ~ N(x0_mean, x0_var)

  void validate() const;
};

double nonlinear_drift(double x_prev, int t);

struct NonlinearSample {
  std::vector<double> x;  // x_0..x_T
  ObservationSeq y;
};

NonlinearSample simulate_nonlinear(const NonlinearParams& p, int T, Rng& rng);

// Trial and pilot are the prior dynamics.
ModelSpec make_nonlinear_model(const NonlinearParams& p, ObservationSeq y);

}  // namespace lasmc
