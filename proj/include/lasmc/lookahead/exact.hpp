#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "lasmc/engine.hpp"

namespace lasmc {

// Number of future paths x_t..x_last; throws past the enumeration guard.
template <FiniteModel M>
double enumeration_size(const M& model, int t, int last, double guard = kEnumerationGuard) {
  double n = 1.0;
  for (int s = t; s <= last; ++s) {
    n *= model.alphabet_size(s);
    if (n > guard)
      throw GuardError("exact enumeration over times " + std::to_string(t) + ".." + std::to_string(last) +
                       " exceeds the 1e6 path limit; use a pilot lookahead strategy instead");
  }
  return n;
}

// log sum_{x_t..x_last} exp(sum_s log g_s f_s) given the carry at t-1;
// zero when last < t.
template <FiniteModel M>
double log_future_mass(const M& model, const typename M::Carry& c, int t, int last) {
  if (last < t) return 0.0;
  const int n = model.alphabet_size(t);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto a = model.advance(c, model.symbol(t, i), t);
    const double lt = finite_or_neg_inf(a.log_target());
    v[i] = lt == kNegInf ? kNegInf : lt + log_future_mass(model, a.carry, t + 1, last);
  }
  return log_sum_exp(v);
}

struct LookaheadMarginal {
  std::vector<double> log_branch;  // log of unnormalized mass for x_t = a_i
  double log_total = 0.0;          // log Z over x_t..x_{t+delta}
  std::vector<double> prob;        // normalized
};

// pi_{t+delta}(x_t = a_i | prefix) by exhaustive enumeration of the future,
// truncated at the horizon.
template <FiniteModel M>
LookaheadMarginal exact_lookahead_marginal(const M& model, const typename M::Carry& prefix, int t, int delta) {
  if (delta < 0) throw PreconditionError("lookahead depth must be nonnegative");
  if (t > model.horizon()) throw PreconditionError("horizon exceeded");
  const int last = std::min(t + delta, model.horizon());
  enumeration_size(model, t, last);
  const int n = model.alphabet_size(t);
  LookaheadMarginal r;
  r.log_branch.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto a = model.advance(prefix, model.symbol(t, i), t);
    const double lt = finite_or_neg_inf(a.log_target());
    r.log_branch[i] = lt == kNegInf ? kNegInf : lt + log_future_mass(model, a.carry, t + 1, last);
  }
  r.log_total = log_sum_exp(r.log_branch);
  if (r.log_total == kNegInf) throw NumericalError("lookahead marginal has no support at t=" + std::to_string(t));
  r.prob.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r.prob[i] = std::exp(r.log_branch[i] - r.log_total);
  return r;
}

struct ExactStepInfo {
  // branch_prob[j][i] = pi_{t+delta}(x_t = a_i | x_{0:t-1} of particle j),
  // filled when requested; particle j after the step descends from j.
  std::vector<std::vector<double>> branch_prob;
};

// x_0 ~ q_0 weighted against pi_delta(x_0).
template <FiniteModel M>
ParticleSystem<M> exact_lookahead_initialize(const M& model, int m, int delta, Rng& rng, int retain_depth = 0) {
  ParticleSystem<M> sys = initialize(model, m, rng, retain_depth);
  const int last = std::min(delta, model.horizon());
  enumeration_size(model, 1, last);
  auto& lw = sys.logw_mut();
  parallel_for(m, [&](int j) {
    if (lw[j] == kNegInf) return;
    lw[j] += log_future_mass(model, sys.frontier(j).carry, 1, last);
  });
  return sys;
}

// x_t drawn from pi_{t+delta}(x_t | x_{0:t-1});
// w_t = w_{t-1} pi_{t+delta}(x_{0:t-1}) / pi_{t+delta-1}(x_{0:t-1}).
template <FiniteModel M>
void exact_lookahead_step(ParticleSystem<M>& sys, const M& model, int delta, Rng& rng, ExactStepInfo* info = nullptr) {
  const int t = sys.time() + 1;
  if (t > model.horizon()) throw PreconditionError("horizon exceeded at t=" + std::to_string(t));
  const int m = sys.size();
  const int T = model.horizon();
  enumeration_size(model, t, std::min(t + delta, T));
  using Node = typename ParticleSystem<M>::Node;
  std::vector<Node> next(static_cast<std::size_t>(m));
  std::vector<double> inc(static_cast<std::size_t>(m));
  if (info) info->branch_prob.assign(static_cast<std::size_t>(m), {});
  for_each_particle(m, rng(), [&](int j, Rng& r) {
    const Node& p = sys.frontier(j);
    const LookaheadMarginal marg = exact_lookahead_marginal(model, p.carry, t, delta);
    const double den = log_future_mass(model, p.carry, t, std::min(t + delta - 1, T));
    const int i = sample_log_categorical(marg.log_branch, r);
    auto x = model.symbol(t, i);
    auto a = model.advance(p.carry, x, t);
    inc[j] = marg.log_total - den;
    next[j] = Node{std::move(x), std::move(a.carry), j};
    if (info) info->branch_prob[j] = marg.prob;
  });
  sys.push_layer(std::move(next));
  auto& lw = sys.logw_mut();
  for (int j = 0; j < m; ++j) lw[j] += inc[j];
}

// Rao-Blackwellized estimate of E_{pi_{t+delta}} h after an exact step:
// sum_j w_j sum_i h(j, i) p_ji / sum_j w_j, where h sees the parent prefix and
// candidate a_i.
template <FiniteModel M, class H>
Estimate rao_blackwell_estimate(const ParticleSystem<M>& sys, const ExactStepInfo& info, H&& h) {
  return weighted_estimate(sys.logw(), [&](int j) {
    double s = 0.0;
    const auto& p = info.branch_prob[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * h(j, static_cast<int>(i));
    return s;
  });
}

}  // namespace lasmc
