#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lasmc/bench/config.hpp"

namespace lasmc::bench {

// Large-m lookahead-weighting estimates of E_{pi_{t+L}}(x_t) for every
// repetition of an experiment, keyed by the data seed of each repetition.
struct ReferenceCache {
  Experiment experiment = Experiment::nonlinear;
  int T = 0;
  int m = 0;
  std::string model;  // model parameters the data were simulated with
  std::vector<int> totals;
  std::vector<std::uint64_t> data_seeds;  // per repetition
  std::vector<double> values;             // [(rep * totals + l) * T + t - 1]

  int reps() const { return static_cast<int>(data_seeds.size()); }
  int total_index(int L) const;  // -1 when absent
  double at(int rep, int l, int t) const;
  // Throws ConfigError unless every repetition and lookahead of cfg is covered
  // with matching data.
  void check_covers(const ExperimentConfig& cfg) const;
};

ReferenceCache build_reference(const ExperimentConfig& cfg);
void save_reference(const ReferenceCache& ref, const std::string& path);
ReferenceCache load_reference(const std::string& path);

}  // namespace lasmc::bench
