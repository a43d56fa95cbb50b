#include "lasmc/models/hmm.hpp"

#include <cmath>
#include <string>

namespace lasmc {

namespace {

void check_stochastic(const Eigen::MatrixXd& m, const char* what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if ((m.row(r).array() < 0.0).any() || !m.row(r).allFinite())
      throw PreconditionError(std::string(what) + " has a negative or non-finite entry");
    if (std::abs(m.row(r).sum() - 1.0) > 1e-9) throw PreconditionError(std::string(what) + " rows must sum to 1");
  }
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

int draw_row(const Eigen::MatrixXd& m, Eigen::Index r, Rng& rng) {
  const double u = uniform01(rng);
  double c = 0.0;
  int last = 0;
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (m(r, k) <= 0.0) continue;
    c += m(r, k);
    last = static_cast<int>(k);
    if (u < c) return last;
  }
  return last;
}

}  // namespace

void HmmParams::validate() const {
  const Eigen::Index n = init.size();
  if (n < 1) throw PreconditionError("HMM needs at least one state");
  if (trans.rows() != n || trans.cols() != n) throw PreconditionError("HMM transition matrix must be n x n");
  if (emit.rows() != n || emit.cols() < 1) throw PreconditionError("HMM emission matrix must have n rows");
  check_stochastic(init.transpose(), "HMM initial distribution");
  check_stochastic(trans, "HMM transition matrix");
  check_stochastic(emit, "HMM emission matrix");
}

int hmm_state_index(const StateVec& x, int states) {
  if (x.size() != 1 || !std::isfinite(x(0))) return -1;
  const double r = std::round(x(0));
  if (r != x(0) || r < 0.0 || r >= states) return -1;
  return static_cast<int>(r);
}

HmmParams random_hmm(int states, int categories, Rng& rng) {
  if (states < 1 || categories < 1) throw PreconditionError("HMM dimensions must be positive");
  std::exponential_distribution<double> e(1.0);
  auto simplex = [&](Eigen::Index k) {
    Eigen::RowVectorXd v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = e(rng);
    return Eigen::RowVectorXd(v / v.sum());
  };
  HmmParams p;
  p.init = simplex(states).transpose();
  p.trans.resize(states, states);
  p.emit.resize(states, categories);
  for (int a = 0; a < states; ++a) {
    p.trans.row(a) = simplex(states);
    p.emit.row(a) = simplex(categories);
  }
  return p;
}

HmmSample simulate_hmm(const HmmParams& p, int T, Rng& rng) {
  p.validate();
  if (T < 0) throw PreconditionError("horizon must be nonnegative");
  HmmSample s;
  s.x.resize(static_cast<std::size_t>(T) + 1);
  s.y.y.resize(static_cast<std::size_t>(T) + 1);
  const Eigen::MatrixXd init = p.init.transpose();
  s.x[0] = draw_row(init, 0, rng);
  for (int t = 1; t <= T; ++t) {
    s.x[t] = draw_row(p.trans, s.x[t - 1], rng);
    s.y.y[t] = Eigen::VectorXd::Constant(1, draw_row(p.emit, s.x[t], rng));
  }
  return s;
}

ModelSpec make_hmm_model(const HmmParams& p, ObservationSeq y, TrialKind trial, TrialKind pilot) {
  p.validate();
  const int n = p.states();
  for (int t = 1; t <= y.horizon(); ++t) {
    const Eigen::VectorXd& v = y.at(t);
    if (v.size() != 1) throw PreconditionError("HMM observations are scalar category indices");
    if (std::isnan(v(0))) continue;
    if (v(0) != std::round(v(0)) || v(0) < 0.0 || v(0) >= p.categories())
      throw PreconditionError("HMM observation at t=" + std::to_string(t) + " is not a category index");
  }
  auto prm = std::make_shared<const HmmParams>(p);
  ModelSpec m;
  m.state_dim = 1;
  m.markovian = true;
  m.transition.sample = [prm](History h, int, Rng& rng) {
    if (h.empty()) return scalar_state(draw_row(prm->init.transpose(), 0, rng));
    const int a = hmm_state_index(h.back(), prm->states());
    if (a < 0) throw PreconditionError("HMM history holds a non-state value");
    return scalar_state(draw_row(prm->trans, a, rng));
  };
  m.transition.log_density = [prm](History h, const StateVec& x, int) {
    const int b = hmm_state_index(x, prm->states());
    if (b < 0) return kNegInf;
    if (h.empty()) return safe_log(prm->init(b));
    const int a = hmm_state_index(h.back(), prm->states());
    if (a < 0) return kNegInf;
    return safe_log(prm->trans(a, b));
  };
  m.log_observation = [prm](History, const StateVec& x, const Eigen::VectorXd& yt, int) {
    if (std::isnan(yt(0))) return 0.0;
    const int b = hmm_state_index(x, prm->states());
    if (b < 0) return kNegInf;
    return safe_log(prm->emit(b, static_cast<Eigen::Index>(yt(0))));
  };
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) vals[a] = a;
  m.alphabet = FiniteAlphabet::scalars(vals);
  m.trial = trial;
  m.pilot = pilot;
  m.observations = std::move(y);
  m.validate();
  return m;
}

}  // namespace lasmc
