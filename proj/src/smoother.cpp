#include "lasmc/lookahead/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lasmc/errors.hpp"
#include "lasmc/logspace.hpp"

namespace lasmc {

bool PiecewiseConstantSmoother::cell_key(const Eigen::VectorXd& f, std::uint64_t& key) const {
  if (f.size() != lo_.size()) throw PreconditionError("smoother feature dimension mismatch");
  std::uint64_t k = 0;
  for (Eigen::Index d = 0; d < f.size(); ++d) {
    const std::int64_t n = cells_[static_cast<std::size_t>(d)];
    std::int64_t c;
    if (cfg_.bins_per_dim > 0) {
      const double span = hi_(d) - lo_(d);
      c = span > 0.0 ? static_cast<std::int64_t>(std::floor((f(d) - lo_(d)) / span * cfg_.bins_per_dim)) : 0;
      if (c == n) c = n - 1;  // the maximum belongs to the last cell
    } else {
      c = static_cast<std::int64_t>(std::floor((f(d) - lo_(d)) / cfg_.bin_width));
    }
    if (c < 0 || c >= n) return false;
    k = k * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(c);
  }
  key = k;
  return true;
}

void PiecewiseConstantSmoother::fit(std::span<const Eigen::VectorXd> features, std::span<const double> log_v) {
  if (features.size() != log_v.size()) throw PreconditionError("smoother input size mismatch");
  if (features.empty()) throw PreconditionError("smoother needs at least one point");
  if (cfg_.bins_per_dim <= 0 && !(cfg_.bin_width > 0.0)) throw ConfigError("smoother bin width must be positive");
  const Eigen::Index dim = features[0].size();
  lo_ = features[0];
  hi_ = features[0];
  for (const auto& f : features) {
    if (f.size() != dim) throw PreconditionError("smoother feature dimension mismatch");
    if (!f.allFinite()) throw NumericalError("smoother feature is not finite");
    lo_ = lo_.cwiseMin(f);
    hi_ = hi_.cwiseMax(f);
  }
  cells_.assign(static_cast<std::size_t>(dim), 1);
  double total_cells = 1.0;
  for (Eigen::Index d = 0; d < dim; ++d) {
    const std::int64_t n = cfg_.bins_per_dim > 0
                               ? cfg_.bins_per_dim
                               : static_cast<std::int64_t>(std::floor((hi_(d) - lo_(d)) / cfg_.bin_width)) + 1;
    cells_[static_cast<std::size_t>(d)] = n;
    total_cells *= static_cast<double>(n);
  }
  if (total_cells > 1.8e19) throw ConfigError("smoother grid too fine for the feature range");

  const std::size_t n = features.size();
  double mx = kNegInf;
  for (double v : log_v) mx = std::max(mx, v);
  std::vector<std::uint64_t> key(n);
  for (std::size_t i = 0; i < n; ++i) cell_key(features[i], key[i]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  keys_.clear();
  log_mean_.clear();
  fitted_.assign(n, kNegInf);
  double pooled = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t e = i;
    double s = 0.0;
    while (e < n && key[order[e]] == key[order[i]]) {
      if (mx > kNegInf) s += std::exp(log_v[order[e]] - mx);
      ++e;
    }
    pooled += s;
    const double lm = s > 0.0 ? std::log(s / static_cast<double>(e - i)) + mx : kNegInf;
    keys_.push_back(key[order[i]]);
    log_mean_.push_back(lm);
    for (std::size_t k = i; k < e; ++k) fitted_[order[k]] = lm;
    i = e;
  }
  log_pooled_ = pooled > 0.0 ? std::log(pooled / static_cast<double>(n)) + mx : kNegInf;
}

double PiecewiseConstantSmoother::log_predict(const Eigen::VectorXd& feature) const {
  if (keys_.empty()) throw PreconditionError("smoother used before fit");
  std::uint64_t k = 0;
  if (!cell_key(feature, k)) return log_pooled_;
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
  if (it == keys_.end() || *it != k) return log_pooled_;
  return log_mean_[static_cast<std::size_t>(it - keys_.begin())];
}

}  // namespace lasmc
