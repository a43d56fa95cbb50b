#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lasmc/rng.hpp"

namespace lasmc {

enum class ResampleScheme { multinomial, residual, stratified, optimal_finite };

ResampleScheme parse_resample_scheme(std::string_view name);
std::string to_string(ResampleScheme s);

// m / (1 + v) with v the squared coefficient of variation of the weights.
double ess(std::span<const double> logw);

// n indices drawn with probability proportional to exp(log_scores). Not valid
// for optimal_finite, which changes weights as well as indices.
std::vector<int> resample_indices(std::span<const double> log_scores, int n, ResampleScheme scheme, Rng& rng);

// Fearnhead-Clifford selection of n distinct entries out of logw.size():
// entries with c*w >= 1 are kept with their weight, the rest are thinned by
// systematic sampling and given weight 1/c (on the scale of the input).
struct FcSelection {
  std::vector<int> index;
  std::vector<double> logw;
  double threshold = 0.0;  // c, relative to normalized weights
};
FcSelection optimal_finite_select(std::span<const double> logw, int n, Rng& rng);

}  // namespace lasmc
