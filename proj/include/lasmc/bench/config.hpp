#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lasmc/kalman/qam.hpp"
#include "lasmc/kalman/tracking.hpp"
#include "lasmc/lookahead/runner.hpp"
#include "lasmc/models/nonlinear.hpp"

namespace lasmc::bench {

enum class Experiment { nonlinear, tracking, qam };

Experiment parse_experiment(std::string_view name);
std::string to_string(Experiment e);

struct ReferenceConfig {
  int m = 50000;
  std::string path;  // cache file; empty disables RMSE2 / MAE2
};

struct ExperimentConfig {
  Experiment experiment = Experiment::nonlinear;
  StrategyConfig strategy;
  // Multilevel QAM: descend the constellation's digit hierarchy instead of a
  // flat one-level partition.
  bool constellation_partition = false;
  ResampleConfig resample;
  // Total lookahead delta + Delta (or delta + Delta') at which estimates are
  // reported; entries below the strategy's own lead are skipped.
  std::vector<int> lookaheads = {0, 1, 2, 3, 5, 7};
  int m = 3000;
  int reps = 200;
  int T = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  bool timing = false;  // adds a wall-time column, which is not reproducible
  ReferenceConfig reference;
  NonlinearParams nonlinear;
  ClutterModel tracking;
  QamConfig qam;

  void validate() const;
};

// Defaults of the given experiment before any JSON field is applied.
ExperimentConfig default_config(Experiment e);

// Missing fields keep the experiment defaults; unknown keys are errors.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

// Seeds of repetition r: the data seed is shared by every strategy so that
// references and paired comparisons see the same simulated data.
std::uint64_t data_seed(std::uint64_t seed, int rep);
std::uint64_t filter_seed(std::uint64_t seed, int rep);

}  // namespace lasmc::bench
