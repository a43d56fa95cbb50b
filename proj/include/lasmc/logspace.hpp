#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "lasmc/errors.hpp"
#include "lasmc/rng.hpp"

namespace lasmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

inline double log_sum_exp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double mx = std::max(a, b);
  return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

inline double log_mean_exp(std::span<const double> v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

// exp(v - max v); throws when every entry is -inf.
inline std::vector<double> shifted_exp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf || std::isnan(mx)) throw NumericalError("degenerate population: all log-weights are -inf");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i] - mx);
  return out;
}

inline std::vector<double> normalize_log(std::span<const double> v) {
  std::vector<double> p = shifted_exp(v);
  double s = 0.0;
  for (double x : p) s += x;
  for (double& x : p) x /= s;
  return p;
}

// Index drawn with probability proportional to exp(logp[i]); ties in the
// cumulative sum resolve to the lowest index.
inline int sample_log_categorical(std::span<const double> logp, Rng& rng) {
  double mx = kNegInf;
  for (double x : logp) mx = std::max(mx, x);
  if (mx == kNegInf) throw NumericalError("categorical draw from all-zero weights");
  double total = 0.0;
  for (double x : logp) total += std::exp(x - mx);
  const double u = uniform01(rng) * total;
  double c = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < logp.size(); ++i) {
    if (logp[i] == kNegInf) continue;
    c += std::exp(logp[i] - mx);
    last = static_cast<int>(i);
    if (u < c) return last;
  }
  return last;
}

inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

}  // namespace lasmc
