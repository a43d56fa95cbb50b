#pragma once

#include <concepts>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lasmc/errors.hpp"
#include "lasmc/logspace.hpp"
#include "lasmc/rng.hpp"

namespace lasmc {

// Result of extending a path by one state: the updated sufficient carry plus
// log g_t and log f_t for the new state.
template <class Carry>
struct Advance {
  Carry carry;
  double log_transition = 0.0;
  double log_observation = 0.0;
  double log_target() const { return log_transition + log_observation; }
};

template <class State>
struct Draw {
  State x;
  double log_q = 0.0;
};

// A model binds its observation sequence. Carry is whatever the model needs
// to evaluate the next increment (last state, Kalman belief, full history).
template <class M>
concept SequentialModel = requires(const M& m, const typename M::Carry& c, const typename M::State& x, int t,
                                   Rng& rng) {
  { m.horizon() } -> std::convertible_to<int>;
  { m.initial_carry() } -> std::convertible_to<typename M::Carry>;
  { m.advance(c, x, t) } -> std::same_as<Advance<typename M::Carry>>;
  { m.draw_trial(c, t, rng) } -> std::same_as<Draw<typename M::State>>;
  { m.draw_pilot(c, t, rng) } -> std::same_as<Draw<typename M::State>>;
};

template <class M>
concept FiniteModel = SequentialModel<M> && requires(const M& m, int t, int i) {
  { m.alphabet_size(t) } -> std::convertible_to<int>;
  { m.symbol(t, i) } -> std::convertible_to<typename M::State>;
};

// Optional hooks.
template <class M>
concept HasGreedyIndex = requires(const M& m, const typename M::Carry& c, int t, std::span<const int> subset) {
  { m.greedy_index(c, t, subset) } -> std::convertible_to<int>;
};

template <class M>
concept HasPriorLogProb = requires(const M& m, const typename M::Carry& c, int t, int i) {
  { m.prior_log_prob(c, t, i) } -> std::convertible_to<double>;
};

template <class M>
concept HasFeature = requires(const M& m, const typename M::Carry& c, const typename M::State& x) {
  { m.feature(c, x) } -> std::convertible_to<Eigen::VectorXd>;
};

template <class M>
concept HasSummary = requires(const M& m, const typename M::Carry& c, const typename M::State& x) {
  { m.summary(c, x) } -> std::convertible_to<double>;
};

template <class M>
concept HasMarkovFlag = requires(const M& m) {
  { m.is_markovian() } -> std::convertible_to<bool>;
};

template <class M>
bool model_is_markovian(const M& m) {
  if constexpr (HasMarkovFlag<M>) return m.is_markovian();
  return false;
}

// log pi_t(x_t = a_i | prefix) for every alphabet member, normalized.
template <FiniteModel M>
std::vector<double> posterior_log_probs(const M& model, const typename M::Carry& c, int t) {
  const int n = model.alphabet_size(t);
  std::vector<double> lp(n);
  for (int i = 0; i < n; ++i) lp[i] = model.advance(c, model.symbol(t, i), t).log_target();
  const double z = log_sum_exp(lp);
  if (z == kNegInf) throw NumericalError("one-step posterior has no support at time " + std::to_string(t));
  for (double& v : lp) v -= z;
  return lp;
}

template <FiniteModel M>
Draw<typename M::State> posterior_draw(const M& model, const typename M::Carry& c, int t, Rng& rng) {
  const std::vector<double> lp = posterior_log_probs(model, c, t);
  const int i = sample_log_categorical(lp, rng);
  return {model.symbol(t, i), lp[i]};
}

// ---------------------------------------------------------------------------
// Closure-based general model.

using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 8, 1>;
// x_{0:t-1}; for Markovian models only x_{t-1} (empty at t = 0).
using History = std::span<const StateVec>;

inline StateVec scalar_state(double v) { return StateVec::Constant(1, v); }

struct Sampler {
  std::function<StateVec(History, int, Rng&)> sample;
  std::function<double(History, const StateVec&, int)> log_density;
  bool valid() const { return static_cast<bool>(sample) && static_cast<bool>(log_density); }
};

enum class TrialKind { prior, posterior, custom };

struct ObservationSeq {
  std::vector<Eigen::VectorXd> y;  // y[0] unused

  int horizon() const { return static_cast<int>(y.size()) - 1; }
  const Eigen::VectorXd& at(int t) const {
    if (t < 1 || t > horizon()) throw PreconditionError("observation index " + std::to_string(t) + " outside 1.." +
                                                        std::to_string(horizon()));
    return y[t];
  }
  static ObservationSeq from_scalars(std::span<const double> ys) {
    ObservationSeq o;
    o.y.resize(ys.size() + 1);
    for (std::size_t i = 0; i < ys.size(); ++i) o.y[i + 1] = Eigen::VectorXd::Constant(1, ys[i]);
    return o;
  }
};

struct FiniteAlphabet {
  std::vector<StateVec> symbols;

  FiniteAlphabet() = default;
  explicit FiniteAlphabet(std::vector<StateVec> s) : symbols(std::move(s)) {
    if (symbols.empty()) throw PreconditionError("alphabet must be nonempty");
    for (std::size_t i = 0; i < symbols.size(); ++i)
      for (std::size_t k = i + 1; k < symbols.size(); ++k)
        if (symbols[i].size() == symbols[k].size() && symbols[i] == symbols[k])
          throw PreconditionError("alphabet symbols must be distinct");
  }
  static FiniteAlphabet scalars(std::span<const double> v) {
    std::vector<StateVec> s;
    for (double x : v) s.push_back(scalar_state(x));
    return FiniteAlphabet(std::move(s));
  }
  int size() const { return static_cast<int>(symbols.size()); }
  int index_of(const StateVec& x) const {
    for (int i = 0; i < size(); ++i)
      if (symbols[i].size() == x.size() && symbols[i] == x) return i;
    return -1;
  }
};

struct SpecCarry {
  StateVec last;
  int t = -1;  // time of `last`; -1 before x_0
  std::shared_ptr<const std::vector<StateVec>> path;  // non-Markovian models only
};

class ModelSpec {
 public:
  using State = StateVec;
  using Carry = SpecCarry;

  int state_dim = 1;
  bool markovian = true;
  Sampler transition;  // g_t; at t = 0 the history is empty
  std::function<double(History, const StateVec&, const Eigen::VectorXd&, int)> log_observation;  // f_t
  Sampler initial;  // q_0; unset means g_0
  TrialKind trial = TrialKind::prior;
  Sampler custom_trial;
  TrialKind pilot = TrialKind::prior;
  Sampler custom_pilot;
  std::optional<FiniteAlphabet> alphabet;
  ObservationSeq observations;

  void validate() const {
    if (state_dim < 1) throw PreconditionError("state_dim must be positive");
    if (!transition.valid()) throw PreconditionError("transition sampler and density are required");
    if (!log_observation) throw PreconditionError("observation density is required");
    if (trial == TrialKind::custom && !custom_trial.valid()) throw PreconditionError("custom trial is incomplete");
    if (pilot == TrialKind::custom && !custom_pilot.valid()) throw PreconditionError("custom pilot is incomplete");
    if ((trial == TrialKind::posterior || pilot == TrialKind::posterior) && !alphabet)
      throw PreconditionError("posterior trial needs a finite alphabet");
  }

  int horizon() const { return observations.horizon(); }
  bool is_markovian() const { return markovian; }
  Carry initial_carry() const {
    Carry c;
    if (!markovian) c.path = std::make_shared<const std::vector<StateVec>>();
    return c;
  }

  History history(const Carry& c) const {
    if (!markovian) return History(*c.path);
    if (c.t < 0) return {};
    return History(&c.last, 1);
  }

  Advance<Carry> advance(const Carry& c, const StateVec& x, int t) const {
    if (t != c.t + 1) throw PreconditionError("advance out of order");
    if (t > horizon()) throw PreconditionError("horizon exceeded at t=" + std::to_string(t));
    const History h = history(c);
    Advance<Carry> a;
    a.log_transition = transition.log_density(h, x, t);
    a.log_observation = t == 0 ? 0.0 : log_observation(h, x, observations.at(t), t);
    if (std::isnan(a.log_transition)) a.log_transition = kNegInf;
    if (std::isnan(a.log_observation)) a.log_observation = kNegInf;
    a.carry.last = x;
    a.carry.t = t;
    if (!markovian) {
      auto p = std::make_shared<std::vector<StateVec>>(*c.path);
      p->push_back(x);
      a.carry.path = std::move(p);
    }
    return a;
  }

  Draw<StateVec> draw_trial(const Carry& c, int t, Rng& rng) const { return draw(c, t, rng, trial, custom_trial); }
  Draw<StateVec> draw_pilot(const Carry& c, int t, Rng& rng) const { return draw(c, t, rng, pilot, custom_pilot); }

  double log_trial(const Carry& c, const StateVec& x, int t) const { return density(c, x, t, trial, custom_trial); }
  double log_pilot(const Carry& c, const StateVec& x, int t) const { return density(c, x, t, pilot, custom_pilot); }

  int alphabet_size(int) const { return require_alphabet().size(); }
  const StateVec& symbol(int, int i) const { return require_alphabet().symbols[i]; }

  double prior_log_prob(const Carry& c, int t, int i) const {
    return transition.log_density(history(c), symbol(t, i), t);
  }

  Eigen::VectorXd feature(const Carry&, const StateVec& x) const { return x; }
  double summary(const Carry&, const StateVec& x) const { return x(0); }

 private:
  const FiniteAlphabet& require_alphabet() const {
    if (!alphabet) throw PreconditionError("model has no finite alphabet");
    return *alphabet;
  }

  Draw<StateVec> draw(const Carry& c, int t, Rng& rng, TrialKind kind, const Sampler& custom) const {
    const History h = history(c);
    if (t == 0) {
      const Sampler& s = initial.valid() ? initial : transition;
      StateVec x = s.sample(h, 0, rng);
      return {x, s.log_density(h, x, 0)};
    }
    switch (kind) {
      case TrialKind::prior: {
        StateVec x = transition.sample(h, t, rng);
        return {x, transition.log_density(h, x, t)};
      }
      case TrialKind::posterior:
        return posterior_draw(*this, c, t, rng);
      case TrialKind::custom: {
        StateVec x = custom.sample(h, t, rng);
        return {x, custom.log_density(h, x, t)};
      }
    }
    throw PreconditionError("unknown trial kind");
  }

  double density(const Carry& c, const StateVec& x, int t, TrialKind kind, const Sampler& custom) const {
    const History h = history(c);
    if (t == 0) return (initial.valid() ? initial : transition).log_density(h, x, 0);
    switch (kind) {
      case TrialKind::prior:
        return transition.log_density(h, x, t);
      case TrialKind::posterior: {
        const int i = require_alphabet().index_of(x);
        if (i < 0) return kNegInf;
        return posterior_log_probs(*this, c, t)[i];
      }
      case TrialKind::custom:
        return custom.log_density(h, x, t);
    }
    return kNegInf;
  }
};

// log g_t + log f_t for the path x_{0:t}.
double log_target_increment(const ModelSpec& model, std::span<const StateVec> path, int t);

// log g_t + log f_t - log q_t for the path x_{0:t}; the trial density must be
// positive at x_t.
double incremental_weight(const ModelSpec& model, std::span<const StateVec> path, int t);

// Carry reached after feeding x_{0:t} (t = path.size() - 1).
SpecCarry carry_for_path(const ModelSpec& model, std::span<const StateVec> path);

}  // namespace lasmc
