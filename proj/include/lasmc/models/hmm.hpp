#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lasmc/model.hpp"

namespace lasmc {

// Finite-state hidden Markov model with categorical emissions. States are the
// scalars 0..n-1; an observation is a category index, or NaN for "missing"
// (f_t = 1).
struct HmmParams {
  Eigen::VectorXd init;   // g_0
  Eigen::MatrixXd trans;  // trans(a, b) = g_t(b | a)
  Eigen::MatrixXd emit;   // emit(a, y) = f_t(y | a)

  void validate() const;
  int states() const { return static_cast<int>(init.size()); }
  int categories() const { return static_cast<int>(emit.cols()); }
};

// Rows drawn uniformly from the simplex.
HmmParams random_hmm(int states, int categories, Rng& rng);

struct HmmSample {
  std::vector<int> x;  // x_0..x_T
  ObservationSeq y;
};

HmmSample simulate_hmm(const HmmParams& p, int T, Rng& rng);

ModelSpec make_hmm_model(const HmmParams& p, ObservationSeq y, TrialKind trial = TrialKind::prior,
                         TrialKind pilot = TrialKind::prior);

// State index of a scalar HMM state, -1 when it is not one of 0..n-1.
int hmm_state_index(const StateVec& x, int states);

}  // namespace lasmc
