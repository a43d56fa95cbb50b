#include "lasmc/resampling.hpp"

#include <algorithm>
#include <cmath>

#include "lasmc/errors.hpp"
#include "lasmc/logspace.hpp"

namespace lasmc {

ResampleScheme parse_resample_scheme(std::string_view name) {
  if (name == "multinomial") return ResampleScheme::multinomial;
  if (name == "residual") return ResampleScheme::residual;
  if (name == "stratified") return ResampleScheme::stratified;
  if (name == "optimal_finite" || name == "optimal-finite") return ResampleScheme::optimal_finite;
  throw ConfigError("unknown resampling scheme '" + std::string(name) + "'");
}

std::string to_string(ResampleScheme s) {
  switch (s) {
    case ResampleScheme::multinomial: return "multinomial";
    case ResampleScheme::residual: return "residual";
    case ResampleScheme::stratified: return "stratified";
    case ResampleScheme::optimal_finite: return "optimal_finite";
  }
  return "?";
}

double ess(std::span<const double> logw) {
  const std::vector<double> w = shifted_exp(logw);
  double s = 0.0, s2 = 0.0;
  for (double x : w) {
    s += x;
    s2 += x * x;
  }
  return s * s / s2;
}

namespace {

// Inverse-CDF lookup for sorted points in [0, total).
void select_sorted(const std::vector<double>& w, std::span<const double> points, std::vector<int>& out) {
  std::size_t i = 0;
  double c = w[0];
  const std::size_t last = w.size() - 1;
  for (double u : points) {
    while (u >= c && i < last) c += w[++i];
    while (w[i] == 0.0 && i > 0) --i;  // rounding at the top edge
    out.push_back(static_cast<int>(i));
  }
}

std::vector<int> multinomial(const std::vector<double>& w, double total, int n, Rng& rng) {
  // Sorted uniforms via normalized exponential spacings.
  std::vector<double> pts(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    acc += -std::log1p(-uniform01(rng));
    pts[k] = acc;
  }
  acc += -std::log1p(-uniform01(rng));
  for (double& p : pts) p = p / acc * total;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  select_sorted(w, pts, out);
  return out;
}

std::vector<int> stratified(const std::vector<double>& w, double total, int n, Rng& rng) {
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pts[k] = (k + uniform01(rng)) / n * total;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  select_sorted(w, pts, out);
  return out;
}

std::vector<int> residual(const std::vector<double>& w, double total, int n, Rng& rng) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  std::vector<double> rest(w.size());
  double rest_total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double e = w[i] / total * n;
    const int copies = static_cast<int>(std::floor(e));
    for (int c = 0; c < copies; ++c) out.push_back(static_cast<int>(i));
    rest[i] = e - copies;
    rest_total += rest[i];
  }
  const int remaining = n - static_cast<int>(out.size());
  if (remaining > 0) {
    const std::vector<int> extra = multinomial(rest, rest_total, remaining, rng);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

}  // namespace

std::vector<int> resample_indices(std::span<const double> log_scores, int n, ResampleScheme scheme, Rng& rng) {
  if (n < 1) throw PreconditionError("resample size must be positive");
  const std::vector<double> w = shifted_exp(log_scores);
  double total = 0.0;
  for (double x : w) total += x;
  switch (scheme) {
    case ResampleScheme::multinomial: return multinomial(w, total, n, rng);
    case ResampleScheme::residual: return residual(w, total, n, rng);
    case ResampleScheme::stratified: return stratified(w, total, n, rng);
    case ResampleScheme::optimal_finite: break;
  }
  throw PreconditionError("optimal_finite selection changes weights; use optimal_finite_select");
}

FcSelection optimal_finite_select(std::span<const double> logw, int n, Rng& rng) {
  if (n < 1) throw PreconditionError("selection size must be positive");
  const std::vector<double> w = shifted_exp(logw);
  double mx = kNegInf;
  for (double x : logw) mx = std::max(mx, x);
  double total = 0.0;
  int support = 0;
  for (double x : w) {
    total += x;
    if (x > 0.0) ++support;
  }
  FcSelection sel;
  if (support <= n) {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] > 0.0) {
        sel.index.push_back(static_cast<int>(i));
        sel.logw.push_back(logw[i]);
      }
    sel.threshold = std::numeric_limits<double>::infinity();
    return sel;
  }
  std::vector<double> p(w.size());
  double pmin = 1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    p[i] = w[i] / total;
    if (p[i] > 0.0) pmin = std::min(pmin, p[i]);
  }
  auto filled = [&](double c) {
    double s = 0.0;
    for (double x : p) s += std::min(c * x, 1.0);
    return s;
  };
  // filled(c) is nondecreasing; solve filled(c) = n.
  double lo = 0.0, hi = 1.0 / pmin;
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (filled(mid) < n) lo = mid;
    else hi = mid;
  }
  double c = hi;
  std::vector<char> kept(p.size(), 0);
  int n_kept = 0;
  double rest_mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (c * p[i] >= 1.0) {
      kept[i] = 1;
      ++n_kept;
    } else {
      rest_mass += p[i];
    }
  }
  const int draws = n - n_kept;
  if (draws > 0) c = draws / rest_mass;  // exact given the kept set
  sel.threshold = c;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (kept[i]) {
      sel.index.push_back(static_cast<int>(i));
      sel.logw.push_back(logw[i]);
    }
  if (draws > 0) {
    const double step = 1.0 / c;
    const double log_new = std::log(step * total) + mx;
    double u = uniform01(rng) * step;
    double cum = 0.0;
    int taken = 0;
    for (std::size_t i = 0; i < p.size() && taken < draws; ++i) {
      if (kept[i] || p[i] == 0.0) continue;
      cum += p[i];
      if (cum > u) {
        sel.index.push_back(static_cast<int>(i));
        sel.logw.push_back(log_new);
        u += step;
        ++taken;
      }
    }
    if (taken < draws) {
      // Rounding left the last stratum unfilled; take the heaviest unselected entry.
      std::vector<char> used(p.size(), 0);
      for (int i : sel.index) used[static_cast<std::size_t>(i)] = 1;
      int best = -1;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (!used[i] && p[i] > 0.0 && (best < 0 || p[i] > p[static_cast<std::size_t>(best)])) best = static_cast<int>(i);
      if (best >= 0) {
        sel.index.push_back(best);
        sel.logw.push_back(log_new);
      }
    }
  }
  return sel;
}

}  // namespace lasmc
