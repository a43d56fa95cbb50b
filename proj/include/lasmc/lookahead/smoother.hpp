#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lasmc {

struct SmootherConfig {
  double bin_width = 0.5;  // per coordinate, bins anchored at the data minimum
  int bins_per_dim = 0;    // > 0: split [min, max] of each coordinate into this many equal cells instead
};

// Piecewise-constant regression of V = exp(log_v) on a feature vector,
// computed on the exp scale with a global shift. Queries that land in a cell
// without data get the pooled mean.
class PiecewiseConstantSmoother {
 public:
  explicit PiecewiseConstantSmoother(SmootherConfig cfg = {}) : cfg_(cfg) {}

  void fit(std::span<const Eigen::VectorXd> features, std::span<const double> log_v);
  double log_predict(const Eigen::VectorXd& feature) const;
  // Fitted log values at the training points, in input order.
  const std::vector<double>& fitted() const { return fitted_; }
  int cell_count() const { return static_cast<int>(keys_.size()); }

 private:
  bool cell_key(const Eigen::VectorXd& f, std::uint64_t& key) const;

  SmootherConfig cfg_;
  Eigen::VectorXd lo_, hi_;
  std::vector<std::int64_t> cells_;  // per-dimension cell counts
  std::vector<std::uint64_t> keys_;  // sorted
  std::vector<double> log_mean_;     // per key
  double log_pooled_ = 0.0;
  std::vector<double> fitted_;
};

}  // namespace lasmc
